import numpy as np
import pytest
from scipy.optimize import brentq

from chlorostat.bifurcation.continuation import continue_equilibria, direct_hopf_root
from chlorostat.equilibria import eq_110_all
from chlorostat.kinetics import default_kinetics
from chlorostat.presets import preset


@pytest.fixture(scope="module")
def fig4_run():
    return continue_equilibria(preset("fig4"), param="alpha", prange=(0.01, 0.3))


@pytest.fixture(scope="module")
def uf1_run():
    return continue_equilibria(preset("fig4").with_(u_f=1.0), param="alpha", prange=(0.01, 0.3))


def fold_oracle(p, lo, hi):
    """Bisection on the number of (110) equilibria, 2 below the fold and 0 above."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if len(eq_110_all(p.with_(alpha=mid))) == 2 else (lo, mid)
    return 0.5 * (lo + hi)


def transcritical_oracle(p, lo, hi):
    """alpha where mu2 at the larger-x0 (110) equilibrium equals alpha."""
    k = default_kinetics(p)

    def g(a):
        e = eq_110_all(p.with_(alpha=a))[-1]
        return k.mu2(e.lifted[5]) - a

    return brentq(g, lo, hi, xtol=1e-15)


def test_fold_then_transcritical(fig4_run):
    branches, events = fig4_run
    kinds = [e.kind for e in events]
    assert kinds == ["fold", "transcritical"]
    fold, tc = events
    assert fold.pattern == "110" and tc.diagnostics["partner"] == "111"
    p = preset("fig4")
    assert fold.params["alpha"] == pytest.approx(fold_oracle(p, 0.15, 0.18), abs=1e-9)
    assert tc.params["alpha"] == pytest.approx(transcritical_oracle(p, 0.15, 0.1684), abs=1e-9)


def test_events_stable_under_halved_steps(fig4_run):
    _, ev = fig4_run
    _, ev2 = continue_equilibria(preset("fig4"), prange=(0.01, 0.3), h0=5e-4, h_max=1e-2)
    assert [e.kind for e in ev] == [e.kind for e in ev2]
    for a, b in zip(ev, ev2):
        assert abs(a.params["alpha"] - b.params["alpha"]) <= 1e-6


def test_branch_patterns(fig4_run):
    branches, _ = fig4_run
    pats = sorted(b.pattern for b in branches)
    assert pats == ["000", "110", "111"]
    e111 = next(b for b in branches if b.pattern == "111")
    assert "x2=0" in e111.stop_reasons
    assert np.all(e111.states[:-1] > 0) and abs(e111.states[-1, 2]) <= 1e-12


def test_hopf_at_lower_feed(uf1_run):
    _, events = uf1_run
    assert [e.kind for e in events] == ["fold", "transcritical", "hopf"]
    h = events[-1]
    ref = direct_hopf_root(preset("fig4").with_(u_f=1.0), None, "alpha", (0.06, 0.09))
    assert h.params["alpha"] == pytest.approx(ref, abs=1e-8)
    d = h.diagnostics
    assert d["a2"] > 0 and d["a1"] > 0 and d["a0"] > 0
    ev = np.array([complex(*z) if isinstance(z, (list, tuple)) else z for z in d["eigenvalues"]])
    assert np.min(np.abs(ev + d["a2"])) <= 1e-6 * d["a2"]
    assert np.min(np.abs(ev - 1j * np.sqrt(d["a1"]))) <= 1e-6
    assert "l1" in d


def test_trivial_branch_events():
    # with hydrogen in the feed the washout state loses stability when mu2(u_h) = alpha
    p = preset("fig6")
    k = default_kinetics(p)
    branches, events = continue_equilibria(p, prange=(0.01, 3.5))
    tc = [e for e in events if e.pattern == "000"]
    assert len(tc) >= 1
    for e in tc:
        j = e.diagnostics["species"]
        q = p.with_(alpha=e.params["alpha"])
        assert k.rates(q.u_f, q.u_g, q.u_h)[j] == pytest.approx(q.alpha, rel=1e-12)
    b0 = next(b for b in branches if b.pattern == "000")
    assert np.all(b0.states == 0)


def test_no_events_on_washout_without_feed(fig4_run):
    _, events = fig4_run
    assert not [e for e in events if e.pattern == "000"]


def test_labels_change_only_at_events(fig4_run, uf1_run):
    for branches, events in (fig4_run, uf1_run):
        for b in branches:
            labs = [r.label if r is not None else None for r in b.reports]
            for i in range(len(labs) - 1):
                if labs[i] != labs[i + 1]:
                    lo, hi = sorted(b.values[i:i + 2])
                    # at a turning point both neighbours lie on one side in alpha,
                    # so also accept an event whose state lies between them
                    x_lo, x_hi = sorted(b.states[i:i + 2, 0])
                    near = [e for e in events
                            if (lo - 1e-9 <= e.params["alpha"] <= hi + 1e-9
                                or x_lo <= e.state[0] <= x_hi)
                            and (e.pattern == b.pattern or b.pattern in e.diagnostics.get("also_on", [])
                                 or e.diagnostics.get("partner") == b.pattern)]
                    assert near, (b.pattern, lo, hi)


def test_events_ordered_by_decreasing_parameter(uf1_run):
    _, events = uf1_run
    a = [e.params["alpha"] for e in events]
    assert a == sorted(a, reverse=True)
    rec = events[0].as_record()
    assert rec["kind"] == "fold" and set(rec["params"]) == {"alpha", "u_f", "u_g", "u_h"}


def test_empty_range():
    assert continue_equilibria(preset("fig4"), prange=(0.2, 0.1)) == ([], [])
    with pytest.raises(ValueError):
        continue_equilibria(preset("fig4"), param="omega1")
