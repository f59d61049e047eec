import numpy as np
import pytest

from chlorostat.dynamics.cycles import sample_interior
from chlorostat.equilibria import (eq_000, eq_001, eq_100, eq_110_all, eq_111,
                                   enumerate_equilibria)
from chlorostat.errors import ChlorostatError, RegionViolation
from chlorostat.kinetics import default_kinetics
from chlorostat.model import rhs_reduced
from chlorostat.presets import preset
from chlorostat.stability import (char_coefficients, classify, cubic_roots, eigen_signature,
                                  eigenvalues, jacobian_reduced, rh_coefficients_interior)


def fd_jacobian(p, x, h=1e-6):
    J = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        # relative step: an absolute step in x1 moves s2 by omega1 * h
        e[j] = h * abs(x[j])
        J[:, j] = (rhs_reduced(p, None, x + e) - rhs_reduced(p, None, x - e)) / (2 * e[j])
    return J


def det_expansion(J, lam):
    return np.linalg.det(lam * np.eye(3) - J)


def random_interior_equilibria(rng, n):
    """Feasible interior equilibria over random inflows and dilution rates."""
    base = preset("fig1")
    out = []
    while len(out) < n:
        p = base.with_(alpha=rng.uniform(1e-3, 0.2), u_f=rng.uniform(0.05, 3.0),
                       u_g=rng.uniform(0, 0.01), u_h=rng.uniform(0, 1.0))
        e = eq_111(p)
        if e is not None:
            out.append((p, e))
    return out


def test_jacobian_at_origin_is_diagonal(fig1, kin):
    J = jacobian_reduced(fig1, kin, np.zeros(3))
    m = kin.rates(fig1.u_f, fig1.u_g, fig1.u_h)
    assert np.array_equal(J, np.diag(np.array(m) - fig1.alpha))


def test_jacobian_against_fd(fig1):
    for x in sample_interior(fig1, 200, seed=11):
        Ja = jacobian_reduced(fig1, None, x)
        Jf = fd_jacobian(fig1, x)
        assert np.allclose(Ja, Jf, rtol=1e-6, atol=1e-6 * np.abs(Ja).max())


def test_jacobian_outside_region(fig1):
    with pytest.raises(RegionViolation):
        jacobian_reduced(fig1, None, [fig1.u_f * 2, 0, 0])


def test_e110_third_row(fig1, kin):
    for e in eq_110_all(fig1):
        J = jacobian_reduced(fig1, kin, e.x)
        s2 = e.lifted[5]
        assert J[2, 0] == 0 and J[2, 1] == 0
        assert J[2, 2] == pytest.approx(kin.mu2(s2) - fig1.alpha, abs=1e-12)
        assert any(abs(z - J[2, 2]) <= 1e-9 for z in classify(fig1, kin, e).eigenvalues)


def test_char_coefficients_against_determinant(rng):
    for _ in range(200):
        J = rng.normal(size=(3, 3))
        a2, a1, a0 = char_coefficients(J)
        for lam in rng.normal(size=3):
            assert lam**3 + a2 * lam**2 + a1 * lam + a0 == pytest.approx(det_expansion(J, lam),
                                                                         rel=1e-9, abs=1e-9)


def test_interior_coefficients_against_determinant(rng):
    for p, e in random_interior_equilibria(rng, 200):
        J = jacobian_reduced(p, None, e.x)
        a2, a1, a0 = rh_coefficients_interior(p, None, e.x)
        assert a2 > 0 and a0 > 0
        b = char_coefficients(J)
        for ours, ref in zip((a2, a1, a0), b):
            assert ours == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(abs(a2 * a1), abs(a0)) ** 0.5)


def test_interior_coefficients_need_interior(fig1):
    with pytest.raises(ChlorostatError):
        rh_coefficients_interior(fig1, None, [0.1, 0.0, 0.1])


def test_cubic_roots_against_companion(rng):
    for _ in range(500):
        a2, a1, a0 = rng.normal(size=3) * 10 ** rng.uniform(-3, 2, 3)
        ours = cubic_roots(a2, a1, a0)
        ref = np.roots([1, a2, a1, a0])
        for z in ref:
            assert np.min(np.abs(ours - z)) <= 1e-7 * max(1.0, abs(z))


def test_cubic_roots_repeated():
    # (lambda + 1)^3 and (lambda + 1)^2 (lambda - 2)
    assert np.allclose(cubic_roots(3, 3, 1), -1, atol=1e-5)
    r = cubic_roots(0, -3, -2)
    assert np.allclose(np.sort(r.real), [-1, -1, 2], atol=1e-6)


def test_eigenvalues_match_numpy(rng):
    for _ in range(200):
        J = rng.normal(size=(3, 3))
        ours = eigenvalues(J)
        for z in np.linalg.eigvals(J):
            assert np.min(np.abs(ours - z)) <= 1e-8 * max(1.0, abs(z))


def test_routh_hurwitz_agrees_with_eigenvalues(rng):
    disagree = 0
    stable = 0
    for p, e in random_interior_equilibria(rng, 1000):
        a2, a1, a0 = rh_coefficients_interior(p, None, e.x)
        rh = a2 > 0 and a0 > 0 and a2 * a1 > a0
        ev = np.linalg.eigvals(jacobian_reduced(p, None, e.x))
        if np.abs(ev.real).min() <= 1e-9:
            continue
        stable += rh
        disagree += rh != bool(np.all(ev.real < 0))
        r = classify(p, None, e)
        assert r.rh_stable == rh and "rh_disagreement" not in r.details
    assert disagree == 0
    assert 0 < stable < 1000


def test_labels_first_operating_point(fig1):
    labels = {e.name: classify(fig1, None, e).label for e in enumerate_equilibria(fig1)}
    assert labels == {"E000": "unstable", "E100": "stable", "E001": "unstable",
                      "E110(1)": "unstable", "E110(2)": "unstable", "E111": "unstable"}
    a2, a1, a0 = rh_coefficients_interior(fig1, None, eq_111(fig1).x)
    assert a2 * a1 - a0 < 0


def test_labels_second_operating_point(fig2):
    labels = {e.name: classify(fig2, None, e).label for e in enumerate_equilibria(fig2)}
    assert labels["E100"] == "stable" and labels["E111"] == "stable"
    assert sum(v == "stable" for v in labels.values()) == 2


def test_washout_stable_node(fig1):
    p = fig1.with_(alpha=5.0)
    r = classify(p, None, eq_000(p))
    assert r.classification == "stable node" and eigen_signature(p, None, eq_000(p)) == (0, 3)


def test_110_report_carries_both_conditions(fig1):
    for e in eq_110_all(fig1):
        d = classify(fig1, None, e).details
        assert "alpha_exceeds_mu2" in d and "a0_positive" in d


def test_signatures_first_persistence_point():
    p = preset("perst1")
    sig = {e.pattern.label: eigen_signature(p, None, e) for e in enumerate_equilibria(p)}
    assert sig["000"] == (2, 1)
    for lab in ("100", "001", "110"):
        assert sig[lab] == (1, 2), lab


def test_stable_signature_is_zero_three(fig1):
    assert eigen_signature(fig1, None, eq_100(fig1)) == (0, 3)


def test_nonhyperbolic_signature_raises(fig1):
    k = default_kinetics(fig1)
    p = fig1.with_(alpha=k.mu2(fig1.u_h))
    e = eq_001(p.with_(alpha=p.alpha * (1 - 1e-13)))
    r = classify(p, k, eq_000(p))
    assert r.n_zero == 1 and r.label == "nonhyperbolic"
    with pytest.raises(ChlorostatError):
        eigen_signature(p, k, eq_000(p))
    assert e is not None
