import numpy as np
import pytest
from scipy.optimize import brentq

from chlorostat.equilibria import (PATTERN_ORDER, PresencePattern, e110_polynomial,
                                   enumerate_equilibria, eq_000, eq_001, eq_010, eq_011,
                                   eq_100, eq_101, eq_110_all, eq_111, equilibrium_residual)
from chlorostat.kinetics import GrowthKinetics, default_kinetics
from chlorostat.model import rhs_reduced, substrates
from chlorostat.presets import preset


class Generic(GrowthKinetics):
    """Monod rates hidden behind the generic interface (bisection inverses)."""

    def __init__(self, k):
        self.k = k
        self.phi2 = k.phi2

    def mu0(self, s0, s2):
        return self.k.mu0(s0, s2)

    def mu1(self, s1, s2):
        return self.k.mu1(s1, s2)

    def mu2(self, s2):
        return self.k.mu2(s2)

    def partials(self, s0, s1, s2):
        return self.k.partials(s0, s1, s2)


def names(eqs):
    return [e.name for e in eqs]


def test_patterns():
    assert len(PATTERN_ORDER) == 8
    assert PresencePattern.from_label("101").support == (0, 2)
    assert str(PresencePattern.from_label("011")) == "011"


def test_zero_equilibrium(fig1):
    e = eq_000(fig1)
    assert np.array_equal(e.x, np.zeros(3))
    assert np.array_equal(e.lifted[3:], [fig1.u_f, fig1.u_g, fig1.u_h])
    assert np.all(rhs_reduced(fig1, None, e.x) == 0)


def test_single_species_values(fig1, fig2):
    assert eq_001(fig1).x[2] == pytest.approx(0.0473693, rel=1e-5)
    assert eq_001(fig2).x[2] == pytest.approx(0.297369, rel=1e-5)
    assert eq_100(fig1).x[0] == pytest.approx(0.000299015, rel=1e-5)
    assert eq_100(fig2).x[0] == pytest.approx(0.00183202, rel=1e-5)
    k = default_kinetics(fig1)
    e = eq_100(fig1)
    s = substrates(fig1, e.x)
    assert abs(k.mu0(s[0], s[2]) - fig1.alpha) < 1e-10


def test_existence_boundaries(fig1):
    k = default_kinetics(fig1)
    assert eq_001(fig1.with_(alpha=k.mu2(fig1.u_h) * (1 + 1e-9))) is None
    assert eq_001(fig1.with_(alpha=1.01 * k.mu2(fig1.u_h))) is None
    assert eq_100(fig1.with_(alpha=k.mu0(fig1.u_f, fig1.u_h) * 1.001)) is None
    assert eq_010(fig1.with_(u_g=0)) is None


def test_phenol_only_equilibrium_against_bisection():
    # absent at the second persistence example itself: mu1(u_g, u_h) < alpha there
    p = preset("perst2")
    k = default_kinetics(p)
    assert k.mu1(p.u_g, p.u_h) < p.alpha and eq_010(p) is None
    p = p.with_(alpha=1e-4)
    e = eq_010(p)
    assert e is not None
    g = lambda x1: k.mu1(p.u_g - x1, p.omega1 * x1 + p.u_h) - p.alpha
    x1 = brentq(g, 0, p.u_g, xtol=1e-18)
    assert e.x[1] == pytest.approx(x1, rel=1e-10)
    assert equilibrium_residual(p, k, e) <= 1e-10


def test_101_closed_form_against_root_finding():
    p = preset("fig6").with_(u_h=200.0, alpha=0.05)
    k = default_kinetics(p)
    e = eq_101(p)
    assert e is not None
    m = k.mu2_inv(p.alpha)
    assert e.lifted[5] == pytest.approx(m, rel=1e-10)
    x0 = brentq(lambda v: k.mu0(p.u_f - v, m) - p.alpha, 0, p.u_f, xtol=1e-16)
    assert e.x[0] == pytest.approx(x0, rel=1e-10)
    assert eq_101(p.with_(u_h=0.01)) is None


def test_011_closed_form_against_root_finding():
    p = preset("perst2")
    k = default_kinetics(p)
    e = eq_011(p)
    assert e is not None
    m = k.mu2_inv(p.alpha)
    assert e.lifted[5] == pytest.approx(m, rel=1e-10)
    x1 = brentq(lambda v: k.mu1(p.u_g - v, m) - p.alpha, 0, p.u_g, xtol=1e-20)
    assert e.x[1] == pytest.approx(x1, rel=1e-10)
    assert eq_011(p.with_(u_g=0, u_h=1e-4)) is None


def test_110_reference_pairs(fig1, fig2):
    a = eq_110_all(fig1)
    assert names(a) == ["E110(1)", "E110(2)"]
    assert np.allclose(a[0].x, [0.0545964, 0.00534486, 0], rtol=1e-5)
    assert np.allclose(a[1].x, [0.489465, 0.0487183, 0], rtol=1e-5)
    b = eq_110_all(fig2)
    assert np.allclose(b[0].x, [0.0528596, 0.00502299, 0], rtol=1e-5)
    assert np.allclose(b[1].x, [0.489467, 0.0485697, 0], rtol=1e-5)
    k = default_kinetics(fig1)
    for p, e in [(fig1, e) for e in a] + [(fig2, e) for e in b]:
        s = substrates(p, e.x)
        assert abs(k.mu0(s[0], s[2]) - p.alpha) <= 1e-9
        assert abs(k.mu1(s[1], s[2]) - p.alpha) <= 1e-9


def test_110_polynomial_is_cubic(fig1):
    poly = e110_polynomial(fig1)
    # formally quartic, but the leading terms cancel
    coef = np.pad(poly.coef, (0, 5 - len(poly.coef)))
    assert abs(coef[4]) <= 1e-12 * np.abs(coef).max()
    assert abs(coef[3]) > 1e-6 * np.abs(coef).max()


def test_interior_values(fig1, fig2):
    a, b = eq_111(fig1), eq_111(fig2)
    assert np.allclose(a.x, [0.306611, 0.0520205, 36.2277], rtol=1e-5)
    assert np.allclose(b.x, [0.306611, 0.0520205, 36.4777], rtol=1e-5)
    assert a.x[0] == b.x[0] and a.x[1] == b.x[1]
    assert np.abs(rhs_reduced(fig1, None, a.x)).max() < 1e-9


def test_enumeration_fig1(fig1):
    eqs = enumerate_equilibria(fig1)
    assert names(eqs) == ["E000", "E100", "E001", "E110(1)", "E110(2)", "E111"]
    for e in eqs:
        assert equilibrium_residual(fig1, None, e) <= 1e-9
        assert e.existence_ok


def test_no_inflow_only_origin(fig1):
    assert names(enumerate_equilibria(fig1.with_(u_f=0, u_g=0, u_h=0))) == ["E000"]


def test_enumeration_stable_under_perturbation(fig1):
    base = enumerate_equilibria(fig1)
    pert = enumerate_equilibria(fig1.with_(alpha=fig1.alpha * (1 + 1e-9)))
    assert names(base) == names(pert)
    for a, b in zip(base, pert):
        assert np.allclose(a.x, b.x, rtol=1e-6, atol=1e-12)


def random_params(rng, n):
    base = preset("fig1")
    for _ in range(n):
        yield base.with_(alpha=rng.uniform(1e-3, 0.3), u_f=rng.uniform(0.05, 3.0),
                         u_g=rng.choice([0.0, rng.uniform(0, 0.01)]), u_h=rng.uniform(0, 1.0))


def test_closed_forms_against_generic_oracles(rng):
    checked = 0
    for p in random_params(rng, 1000):
        k = default_kinetics(p)
        g = Generic(k)
        for fn in (eq_001, eq_101, eq_011, eq_111):
            a, b = fn(p, k), fn(p, g)
            assert (a is None) == (b is None), (fn.__name__, p)
            if a is not None:
                assert np.allclose(a.x, b.x, rtol=1e-8, atol=1e-12 * max(1, np.abs(a.x).max()))
                checked += 1
    assert checked > 200


def test_110_polynomial_against_scan(rng):
    for p in list(random_params(rng, 60)):
        k = default_kinetics(p)
        a = eq_110_all(p, k)
        b = eq_110_all(p, Generic(k))
        # the scan can miss tangential pairs; every scanned root must be a polynomial root
        for e in b:
            assert any(np.allclose(e.x, f.x, rtol=1e-8) for f in a)


def test_uniqueness_and_110_count(rng):
    for p in random_params(rng, 300):
        eqs = enumerate_equilibria(p)
        labels = [e.pattern.label for e in eqs]
        for lab in ("100", "010", "001", "101", "011", "111"):
            assert labels.count(lab) <= 1
        assert labels.count("110") <= 4
    for uf in np.linspace(0.1, 3.0, 15):
        for a in np.linspace(0.005, 0.3, 15):
            p = preset("fig4").with_(u_f=float(uf), alpha=float(a))
            assert len(eq_110_all(p)) <= 2


def test_include_infeasible(fig1):
    p = fig1.with_(u_h=0.0, u_g=0.0)
    assert eq_001(p) is None
    e = eq_001(p, include_infeasible=True)
    assert e is not None and not e.existence_ok and e.lifted is None
