import numpy as np
import pytest

from chlorostat.dynamics.cycles import (RunResult, check_face_no_cycles, cluster_runs,
                                        detect_bistability, detect_cycle, interior_point,
                                        sample_face, sample_interior)
from chlorostat.dynamics.integrate import integrate
from chlorostat.dynamics.persistence import (persistence_check,
                                             verify_persistence_by_simulation)
from chlorostat.equilibria import eq_100, eq_111
from chlorostat.errors import PropertyViolation
from chlorostat.model import OmegaRegion, lift
from chlorostat.presets import preset


@pytest.fixture(scope="module")
def fig1_cycle():
    p = preset("fig1")
    return p, detect_cycle(p, y0=interior_point(p))


def test_zero_horizon_returns_initial_state(fig1):
    x = interior_point(fig1)
    tr = integrate(fig1, None, x, 0.0)
    assert len(tr) == 1 and np.array_equal(tr.final, lift(fig1, x))


def test_bad_initial_state(fig1):
    with pytest.raises(ValueError):
        integrate(fig1, None, [0.1, 0.0], 1.0)
    with pytest.raises(ValueError):
        integrate(fig1, None, [0.1, 0, 0, -1, 0, 0], 1.0)
    with pytest.raises(ValueError):
        integrate(fig1, None, interior_point(fig1), 1.0, method="euler")


def test_face_invariance_exact(fig1):
    for face, off in (("01", 2), ("02", 1), ("12", 0)):
        for x in sample_face(fig1, face, 3, seed=4):
            tr = integrate(fig1, None, x, 2000.0)
            assert np.all(tr.y[:, off] == 0.0)


def test_solvers_agree(fig1):
    x = interior_point(fig1)
    a = integrate(fig1, None, x, 300.0, tol=1e-10, method="rk45")
    b = integrate(fig1, None, x, 300.0, tol=1e-10, method="lsoda")
    assert np.allclose(a.final, b.final, rtol=1e-5, atol=1e-9)
    assert a.diagnostics["method"] == ["rk45"] and b.diagnostics["method"] == ["lsoda"]


def test_trajectory_stays_in_omega(fig1):
    tr = integrate(fig1, None, interior_point(fig1), 5000.0)
    assert tr.diagnostics["min_component"] > -1e-8
    om = OmegaRegion(fig1)
    assert all(om.contains(y[:3], tol=1e-7) for y in tr.y[::50])


def test_cycle_at_low_hydrogen(fig1_cycle):
    p, r = fig1_cycle
    assert r.status == "cycle"
    assert r.cycle.period > 0 and r.cycle.poincare_residual < 1e-4
    assert np.all(r.cycle.amplitude > 0)


def test_poincare_return_by_reintegration(fig1_cycle):
    # an independent run from the last peak must come back after one period
    p, r = fig1_cycle
    y = r.cycle.peak_state
    tr = integrate(p, None, y, r.cycle.period, tol=1e-11)
    assert np.abs(tr.final - y).max() <= 1e-4 * np.abs(y).max()


def test_equilibrium_at_high_hydrogen(fig2):
    r = detect_cycle(fig2, y0=interior_point(fig2))
    assert r.status == "equilibrium" and r.equilibrium.name == "E111"
    assert np.allclose(r.final[:3], eq_111(fig2).x, rtol=1e-4)


def test_equilibrium_start_is_classified_immediately(fig1):
    e = eq_100(fig1)
    r = detect_cycle(fig1, y0=e.x)
    assert r.status == "equilibrium" and r.equilibrium.name == "E100"


def test_bistability_high_hydrogen(fig2):
    rep = detect_bistability(fig2, samples=8, seed=0)
    labels = sorted(a.label for a in rep.attractors)
    assert labels == ["E100", "E111"] and not rep.undecided
    assert sum(a.fraction for a in rep.attractors) == pytest.approx(1.0)


def test_cluster_runs_groups_by_period():
    def cyc(period):
        from chlorostat.dynamics.cycles import CycleInfo
        info = CycleInfo(period, np.ones(3), 1.0, True, 0.0, np.ones(6))
        return RunResult("cycle", info, None, np.ones(6), 1.0)

    runs = [cyc(100.0), cyc(100.05), cyc(150.0), RunResult("inconclusive", None, None, np.ones(6), 1.0)]
    atts, undecided = cluster_runs(runs)
    assert len(atts) == 2 and undecided == [3]
    assert atts[0].samples == [0, 1]


def test_face_sampler(fig1):
    om = OmegaRegion(fig1)
    for face, off in (("01", 2), ("02", 1), ("12", 0)):
        pts = sample_face(fig1, face, 50, seed=1)
        assert len(pts) == 50
        for x in pts:
            assert x[off] == 0 and om.contains(x)
    assert sample_face(fig1.with_(u_g=0.0), "12", 10) == []


def test_no_cycles_on_faces(fig1):
    for face in ("01", "02", "12"):
        rep = check_face_no_cycles(fig1, face=face, samples=10, seed=7)
        assert rep.n_cycles == 0 and rep.n_inconclusive == 0
    with pytest.raises(ValueError):
        check_face_no_cycles(fig1, face="00")


def test_interior_sampler_inside_omega(fig1):
    om = OmegaRegion(fig1)
    pts = sample_interior(fig1, 100, seed=3)
    assert all(om.contains(x) and np.all(x > 0) for x in pts)
    assert np.array_equal(sample_interior(fig1, 5, seed=3), sample_interior(fig1, 5, seed=3))


def test_persistence_verdicts():
    v1 = persistence_check(preset("perst1"))
    assert v1.matched_theorem == "theorem-1" and v1.uniform_persistent
    assert v1.signatures["E000"] == (2, 1)
    v2 = persistence_check(preset("perst2"))
    assert v2.matched_theorem == "theorem-2" and v2.uniform_persistent
    assert v2.signatures["E011"] == (1, 2)


def test_no_persistence_with_stable_boundary(fig1):
    v = persistence_check(fig1)
    assert v.matched_theorem == "none" and not v.uniform_persistent
    assert any("E100" in n for n in v.notes)


def test_persistence_probe():
    p = preset("perst1")
    s = verify_persistence_by_simulation(p, samples=3, seed=2)
    assert s.passed and np.all(s.floors > 1e-6)
    with pytest.raises(PropertyViolation):
        verify_persistence_by_simulation(preset("fig1"), samples=1, floor_eps=1e3,
                                         t_end=10.0, raise_on_fail=True)
