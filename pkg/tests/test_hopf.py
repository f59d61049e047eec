import numpy as np
import pytest
from scipy.optimize import brentq

from chlorostat.bifurcation.hopf import (HOPF_DEGREE, HopfPolynomial, feasible_window, hopf_f,
                                         hopf_locus_check, hopf_polynomial,
                                         hopf_roots_and_transversality)
from chlorostat.errors import SamplingWindowError
from chlorostat.presets import preset


def test_signs_at_operating_points(fig1, fig2):
    assert hopf_f(fig1) < 0
    assert hopf_f(fig2) > 0


@pytest.mark.parametrize("free", ["u_f", "u_g", "u_h"])
def test_degree_certified_on_extra_samples(fig1, free):
    hp = hopf_polynomial(fig1, free=free)
    assert hp.degree == HOPF_DEGREE[free]
    a, b = hp.window
    vals = []
    for v in np.linspace(a, b, 40):
        vals.append((hp(v), hopf_f(fig1.with_(**{free: float(v)}))))
    ref = max(abs(f) for _, f in vals)
    assert max(abs(g - f) for g, f in vals) <= 1e-9 * ref
    assert set(hp.fixed) == {"alpha", "u_f", "u_g", "u_h"} - {free}


def test_hydrogen_root_against_brentq(fig1):
    hp = hopf_polynomial(fig1, free="u_h")
    roots = hopf_roots_and_transversality(hp)
    assert len(roots) == 1
    r, transversal = roots[0]
    assert transversal
    assert r == pytest.approx(0.102520, abs=1e-4)
    ref = brentq(lambda v: hopf_f(fig1.with_(u_h=v)), 0.05, 0.3, xtol=1e-14)
    assert r == pytest.approx(ref, rel=1e-9)


def test_double_root_not_transversal():
    # f = (v - 0.4)^2 (v + 2), tangential at 0.4
    coef = np.polynomial.polynomial.polyfromroots([0.4, 0.4, -2.0])[::-1]
    hp = HopfPolynomial("u_f", coef, {}, (0.0, 1.0), 0.0)
    roots = hopf_roots_and_transversality(hp)
    assert len(roots) == 1 and roots[0][0] == pytest.approx(0.4, abs=1e-6)
    assert roots[0][1] is False
    simple = HopfPolynomial("u_f", np.array([1.0, -0.4]), {}, (0.0, 1.0), 0.0)
    assert hopf_roots_and_transversality(simple) == [(pytest.approx(0.4), True)]


def test_empty_window_is_an_error(fig1):
    with pytest.raises(SamplingWindowError):
        hopf_polynomial(fig1, free="u_f", window=(0.0, 1e-4))
    with pytest.raises(SamplingWindowError):
        feasible_window(fig1.with_(u_g=0.0, u_h=0.0), None, "u_f", hi=0.1)
    with pytest.raises(ValueError):
        hopf_polynomial(fig1, free="alpha")


def test_locus_check(fig1):
    r = hopf_roots_and_transversality(hopf_polynomial(fig1, free="u_h"))[0][0]
    ok, a2, a1, a0 = hopf_locus_check(fig1.with_(u_h=r), tol=1e-6)
    assert ok and a1 > 0
    assert not hopf_locus_check(fig1)[0]


def test_other_presets_have_polynomial_structure():
    p = preset("fig6")
    hp = hopf_polynomial(p, free="u_f")
    assert hp.holdout_residual <= 1e-8
