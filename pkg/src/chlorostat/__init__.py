"""Reduced chemostat model of a three-species chlorophenol-degrading consortium."""

__version__ = "0.1.0"

from .errors import (ChlorostatError, DomainError, IntegrationFailure, InvalidParameterError,
                     NoPreimageError, NotOnLocusError, PropertyViolation, RegionViolation,
                     SamplingWindowError)
from .kinetics import (GrowthKinetics, ModelParams, MonodKinetics, UnscaledParams,
                       default_kinetics, eval_growth, eval_growth_partials, mu2_inverse,
                       scale_parameters)
from .model import OmegaRegion, jacobian_full, lift, project, rhs_full, rhs_reduced
from .presets import PRESET_NAMES, load_params, preset
from .equilibria import Equilibrium, PresencePattern, enumerate_equilibria
from .stability import StabilityReport, classify, eigen_signature, jacobian_reduced
