import numpy as np
import pytest

from chlorostat.bifurcation.continuation import direct_hopf_root
from chlorostat.bifurcation.curves import locate_snlc, seed_hopf, trace_codim1_curve
from chlorostat.bifurcation.hopf import hopf_locus_check
from chlorostat.bifurcation.lyapunov import lyapunov_coefficient_l1
from chlorostat.equilibria import eq_110_all, eq_111
from chlorostat.errors import ChlorostatError, NotOnLocusError
from chlorostat.presets import preset


@pytest.fixture(scope="module")
def hopf_curve():
    return trace_codim1_curve(preset("fig6"), kind="hopf", params=("alpha", "u_f"),
                              ranges=((1e-3, 0.3), (0.05, 3.0)))


@pytest.fixture(scope="module")
def fold_curve():
    return trace_codim1_curve(preset("fig4"), kind="fold", params=("alpha", "u_f"),
                              ranges=((0.01, 0.3), (0.05, 3.0)))


def at(p, row):
    return p.with_(alpha=float(row[0]), u_f=float(row[1]))


def test_hopf_curve_points_on_locus(hopf_curve):
    p = preset("fig6")
    for row, x in zip(hopf_curve.values, hopf_curve.states):
        q = at(p, row)
        e = eq_111(q)
        assert e is not None
        assert np.allclose(e.x, x, rtol=1e-7)
        ok, a2, a1, a0 = hopf_locus_check(q, tol=1e-6)
        assert abs(a2 * a1 - a0) <= 1e-6 * a2 * a1 or a1 < 1e-6


def test_hopf_curve_slices_against_scalar_roots(hopf_curve):
    p = preset("fig6")
    rows = hopf_curve.values[5:-5:8]
    for a, uf in rows:
        ref = direct_hopf_root(p.with_(u_f=float(uf)), None, "alpha", (a - 2e-3, a + 2e-3))
        assert a == pytest.approx(ref, abs=1e-8)


def test_one_bautin_with_sign_change(hopf_curve):
    p = preset("fig6")
    bautin = [pt for pt in hopf_curve.points if pt.kind == "bautin"]
    assert len(bautin) == 1
    signs = np.sign(hopf_curve.l1[np.isfinite(hopf_curve.l1)])
    assert np.count_nonzero(np.diff(signs)) == 1
    # the Lyapunov module, evaluated independently two points either side
    i = int(np.nonzero(np.diff(np.sign(hopf_curve.l1)))[0][0])
    l_before = lyapunov_coefficient_l1(at(p, hopf_curve.values[i - 1]), tol=1e-6)
    l_after = lyapunov_coefficient_l1(at(p, hopf_curve.values[i + 2]), tol=1e-6)
    assert l_before * l_after < 0
    l_mid = lyapunov_coefficient_l1(at(p, [bautin[0].params["alpha"], bautin[0].params["u_f"]]),
                                    tol=1e-6)
    assert abs(l_mid) <= 1e-3 * max(abs(l_before), abs(l_after))


def test_bogdanov_takens_flag(hopf_curve):
    bt = [pt for pt in hopf_curve.points if pt.kind == "bogdanov-takens"]
    assert len(bt) == 1
    d = bt[0].diagnostics
    assert d["candidate"] and d["a1"] < 1e-6 * d["a1_max"]
    assert "a1=0" in hopf_curve.stop_reasons


def test_fold_curve_slices(fold_curve):
    p = preset("fig4")
    assert len(fold_curve.values) > 20
    for a, uf in fold_curve.values[3:-3:10]:
        q = p.with_(u_f=float(uf))
        # two (110) equilibria just below the fold, none just above
        assert len(eq_110_all(q.with_(alpha=a * (1 - 1e-6)))) == 2
        assert len(eq_110_all(q.with_(alpha=a * (1 + 1e-6)))) == 0


def test_fold_curve_through_one_parameter_fold(fold_curve):
    # the one-parameter sweep at u_f = 2 finds its fold at alpha = 0.1685405
    v = fold_curve.values
    i = int(np.nonzero(np.diff(np.sign(v[:, 1] - 2.0)))[0][0])
    t = (2.0 - v[i, 1]) / (v[i + 1, 1] - v[i, 1])
    assert v[i, 0] + t * (v[i + 1, 0] - v[i, 0]) == pytest.approx(0.168540481409, abs=1e-4)


def test_seed_off_locus():
    p = preset("fig6")
    with pytest.raises(NotOnLocusError):
        trace_codim1_curve(p, kind="hopf", seed=(p, eq_111(p).x))
    with pytest.raises(NotOnLocusError):
        seed_hopf(p, free="alpha", prange=(0.2, 0.21), n=5)


def test_snlc_bisection_with_injected_predicate():
    p = preset("fig1")
    v = locate_snlc(p, param="u_h", bracket=(0.0, 1.0), predicate=lambda q: q.u_h < 0.123456,
                    tol=1e-6)
    assert v == pytest.approx(0.123456, abs=1e-6)
    with pytest.raises(ChlorostatError):
        locate_snlc(p, param="u_h", bracket=(0.0, 1.0), predicate=lambda q: True)
