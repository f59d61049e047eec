from .hopf import (HOPF_DEGREE, HopfPolynomial, hopf_f, hopf_polynomial,
                   hopf_roots_and_transversality)
from .lyapunov import lyapunov_coefficient_l1
from .continuation import BifurcationPoint, Branch, continue_equilibria
from .curves import Codim1Curve, locate_snlc, trace_codim1_curve
