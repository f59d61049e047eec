"""Limit-cycle and attractor detection by direct simulation.

Peaks of x0(t) are located on the fly (sign change of dx0/dt, refined on
the solver's dense output).  After discarding a transient of
max(30% of the horizon, 100/alpha), a run is periodic when the last five
peak heights agree to 1e-4 (relative) and the inter-peak intervals agree
to 1e-3.  A run ends early once it is periodic or once it sits within the
clustering tolerance of an equilibrium that is stable within the run's
invariant subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.stats import qmc

from ..equilibria import enumerate_equilibria
from ..errors import PropertyViolation
from ..kinetics import default_kinetics
from ..model import substrates
from ..stability import jacobian_reduced
from .integrate import Trajectory, as_full_state, integrate, make_system

PEAK_RTOL = 1e-4
PERIOD_RTOL = 1e-3
N_MATCH = 5
MIN_PEAKS = 8
AMP_RTOL = 1e-3
# peak heights must also agree relative to the oscillation amplitude, which
# rejects slowly decaying oscillations about a weakly stable focus
DRIFT_RTOL = 1e-3
CLUSTER_RTOL = 1e-4
CLUSTER_ATOL = 1e-8

FACES = {"01": (0, 1), "02": (0, 2), "12": (1, 2)}


def _kin(p, k):
    return default_kinetics(p) if k is None else k


@dataclass
class CycleInfo:
    period: float
    amplitude: np.ndarray  # max - min of x0, x1, x2 over the last period
    peak_height: float
    converged: bool
    poincare_residual: float
    peak_state: np.ndarray


@dataclass
class RunResult:
    status: str  # cycle | equilibrium | inconclusive
    cycle: CycleInfo | None
    equilibrium: object | None  # Equilibrium
    final: np.ndarray
    t_final: float
    peaks: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    trajectory: Trajectory | None = None


def transient_time(p, horizon):
    return max(0.3 * horizon, 100.0 / p.alpha if p.alpha > 0 else 0.0)


def close(a, b, rtol=CLUSTER_RTOL, atol=CLUSTER_ATOL) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(np.abs(a - b) <= np.maximum(rtol * np.maximum(np.abs(a), np.abs(b)), atol)))


def _stable_targets(p, k, support):
    """Equilibria inside the subspace spanned by ``support`` that are stable within it."""
    out = []
    for e in enumerate_equilibria(p, k):
        if any(e.x[i] != 0 for i in range(3) if i not in support):
            continue
        J = jacobian_reduced(p, k, e.x)
        idx = list(support)
        if idx:
            ev = np.linalg.eigvals(J[np.ix_(idx, idx)])
            if ev.real.max() >= 0:
                continue
        out.append(e)
    return out


def _periodic(peaks, t_discard, amp=None):
    post = [pk for pk in peaks if pk[0] >= t_discard]
    if len(post) < MIN_PEAKS:
        return None
    last = post[-N_MATCH:]
    h = np.array([pk[1] for pk in last])
    tt = np.array([pk[0] for pk in last])
    if (h.max() - h.min()) > PEAK_RTOL * abs(h).max():
        return None
    if amp is not None and (h.max() - h.min()) > DRIFT_RTOL * amp:
        return None
    iv = np.diff(tt)
    if (iv.max() - iv.min()) > PERIOD_RTOL * iv.mean():
        return None
    return float(iv.mean())


def detect_cycle(p, k=None, y0=None, horizon: float = 3e5, tol: float = 1e-8,
                 early_stop: bool = True, keep_trajectory: bool = False) -> RunResult:
    """Simulate from ``y0`` and classify the long-run behaviour."""
    k = _kin(p, k)
    y_init = as_full_state(p, y0)
    support = tuple(i for i in range(3) if y_init[i] != 0)
    targets = _stable_targets(p, k, support)
    tx = np.array([e.x for e in targets]) if targets else None
    fun, _ = make_system(p, k)
    t_discard = transient_time(p, horizon)
    peaks = []  # (t, height, full state)
    troughs = []
    state = {"d": fun(0.0, y_init)[0], "eq": None, "period": None, "rows": [],
             "amp": None, "n": 0, "t_check": 0.0}
    check_dt = 1.0 / p.alpha if p.alpha > 0 else np.inf

    def observer(t_old, t, y, solver):
        d = fun(t, y)[0]
        d_old = state["d"]
        state["d"] = d
        state["rows"].append(y)
        if d_old > 0 >= d or d_old < 0 <= d:
            dense = solver.dense_output()
            g = lambda s: fun(s, dense(s))[0]
            try:
                tp = brentq(g, t_old, t, xtol=1e-12 * max(1.0, t)) if g(t_old) * g(t) < 0 else t
            except ValueError:
                tp = t
            yp = dense(tp)
            if d_old > 0:
                peaks.append((tp, float(yp[0]), yp))
                # amplitude over the cycle that just closed
                rows = np.array(state["rows"])[:, :3]
                state["amp"] = rows.max(axis=0) - rows.min(axis=0)
                state["rows"] = [y]
                per = _periodic(peaks, t_discard, state["amp"][0])
                if per is not None and state["amp"][0] > AMP_RTOL * abs(yp[0]):
                    state["period"] = per
                    return early_stop
            else:
                troughs.append((tp, float(yp[0])))
        state["n"] += 1
        if targets and (state["n"] % 50 == 0 or t - state["t_check"] >= check_dt):
            state["t_check"] = t
            x = y[:3]
            tol_ = np.maximum(CLUSTER_RTOL * np.maximum(np.abs(tx), np.abs(x)), CLUSTER_ATOL)
            hit = np.nonzero(np.all(np.abs(tx - x) <= tol_, axis=1))[0]
            if hit.size:
                state["eq"] = targets[hit[0]]
                return early_stop
        return False

    traj = integrate(p, k, y_init, horizon, tol=tol, observer=observer, record=keep_trajectory)
    final = traj.final.copy()
    t_final = float(traj.t[-1])
    if state["period"] is None:
        per = _periodic(peaks, t_discard, None if state["amp"] is None else state["amp"][0])
        if per is not None and state["amp"] is not None and state["amp"][0] > AMP_RTOL * abs(peaks[-1][1]):
            state["period"] = per
    if state["eq"] is None and state["period"] is None:
        for e in targets:
            if close(final[:3], e.x):
                state["eq"] = e
    diag = dict(traj.diagnostics, horizon=horizon, t_discard=t_discard,
                n_peaks=len(peaks), n_peaks_post=sum(pk[0] >= t_discard for pk in peaks))
    cyc = None
    if state["period"] is not None:
        last, prev = peaks[-1][2], peaks[-2][2]
        res = float(np.abs(last - prev).max() / np.abs(last).max())
        cyc = CycleInfo(state["period"], state["amp"], peaks[-1][1], True, res, last)
        status = "cycle"
    elif state["eq"] is not None:
        status = "equilibrium"
    else:
        status = "inconclusive"
    return RunResult(status, cyc, state["eq"] if status == "equilibrium" else None,
                     final, t_final, [(t, h) for t, h, _ in peaks], diag,
                     traj if keep_trajectory else None)


def sample_interior(p, n, seed=0):
    """Latin-hypercube initial conditions strictly inside Omega.

    Fractions r in (0,1)^3 map to x0 = r0 u_f, then x1 and x2 between the
    lower and upper limits implied by the conservation laws.
    """
    lhs = qmc.LatinHypercube(d=3, seed=seed).random(n)
    return [interior_point(p, r) for r in 0.02 + 0.96 * lhs]


def interior_point(p, r=(0.5, 0.5, 0.5)):
    """Map fractions r in (0,1)^3 to a point of Omega (x0 first, then x1, then x2)."""
    r0, r1, r2 = r
    x0 = r0 * p.u_f
    lo1 = max(0.0, (p.omega2 * x0 - p.u_h) / p.omega1)
    hi1 = p.u_g + p.omega0 * x0
    x1 = lo1 + r1 * (hi1 - lo1)
    hi2 = p.u_h - p.omega2 * x0 + p.omega1 * x1
    return np.array([x0, x1, r2 * hi2])


@dataclass
class Attractor:
    kind: str  # equilibrium | cycle
    label: str
    representative: np.ndarray
    period: float | None
    fraction: float
    samples: list


def cluster_runs(runs) -> tuple[list[Attractor], list[int]]:
    """Group run outcomes into distinct attractors; also return inconclusive indices."""
    groups: list[dict] = []
    undecided = []
    for i, r in enumerate(runs):
        if r.status == "equilibrium":
            key = ("equilibrium", r.equilibrium.x)
        elif r.status == "cycle":
            key = ("cycle", r.cycle.period)
        else:
            undecided.append(i)
            continue
        for g in groups:
            if g["kind"] != key[0]:
                continue
            if key[0] == "equilibrium" and close(g["rep"], key[1]):
                g["samples"].append(i)
                break
            if key[0] == "cycle" and abs(g["rep"] - key[1]) <= PERIOD_RTOL * g["rep"]:
                g["samples"].append(i)
                break
        else:
            label = r.equilibrium.name if key[0] == "equilibrium" else "cycle"
            groups.append({"kind": key[0], "rep": key[1], "samples": [i], "label": label,
                           "run": r})
    n = len(runs)
    atts = []
    for g in groups:
        rep = np.asarray(g["rep"]) if g["kind"] == "equilibrium" else g["run"].cycle.peak_state[:3]
        atts.append(Attractor(g["kind"], g["label"], rep,
                              g["rep"] if g["kind"] == "cycle" else None,
                              len(g["samples"]) / n, g["samples"]))
    return atts, undecided


@dataclass
class BistabilityReport:
    attractors: list
    undecided: list
    seed: int
    samples: int
    runs: list = field(repr=False, default_factory=list)


def detect_bistability(p, k=None, samples: int = 8, seed: int = 0, horizon: float = 3e5,
                       tol: float = 1e-8, initial_states=None, jobs: int = 1) -> BistabilityReport:
    """Distinct attractors reached from sampled interior initial conditions."""
    k = _kin(p, k)
    inits = list(initial_states) if initial_states is not None else sample_interior(p, samples, seed)
    runs = _run_many(p, k, inits, horizon, tol, jobs)
    atts, undecided = cluster_runs(runs)
    return BistabilityReport(atts, undecided, seed, len(inits), runs)


def _one(args):
    p, k, y0, horizon, tol = args
    return detect_cycle(p, k, y0, horizon=horizon, tol=tol)


def _run_many(p, k, inits, horizon, tol, jobs=1):
    tasks = [(p, k, y0, horizon, tol) for y0 in inits]
    if jobs and jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_one, tasks))
    return [_one(t) for t in tasks]


def sample_face(p, face, n, seed=0):
    """Random initial conditions in Omega with the complementary component zero.

    Returns an empty list when the face has no relative interior (for
    example the x1x2 face when u_g = 0).
    """
    idx = FACES[face]
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        r = 0.02 + 0.96 * rng.random(3)
        x = np.zeros(3)
        # fill in index order so each bound uses the components already set
        for i in idx:
            if i == 0:
                # without x1 the hydrogen balance caps x0 at u_h / omega2
                lo, hi = 0.0, p.u_f if 1 in idx else min(p.u_f, p.u_h / p.omega2)
            elif i == 1:
                lo = max(0.0, (p.omega2 * x[0] - p.u_h) / p.omega1)
                hi = p.u_g + p.omega0 * x[0]
            else:
                lo, hi = 0.0, p.u_h - p.omega2 * x[0] + p.omega1 * x[1]
            if hi <= lo:
                return out
            x[i] = lo + r[i] * (hi - lo)
        out.append(x)
    return out


@dataclass
class FaceReport:
    face: str
    samples: int
    n_cycles: int
    n_equilibrium: int
    n_inconclusive: int
    endpoints: dict
    seed: int


def check_face_no_cycles(p, k=None, face: str = "01", samples: int = 100, seed: int = 0,
                         horizon: float | None = None, tol: float = 1e-8,
                         raise_on_cycle: bool = False, jobs: int = 1) -> FaceReport:
    """Simulate face-restricted runs and count any periodic outcome."""
    k = _kin(p, k)
    if face not in FACES:
        raise ValueError(f"face must be one of {sorted(FACES)}")
    if horizon is None:
        horizon = 400.0 / p.alpha
    inits = sample_face(p, face, samples, seed)
    runs = _run_many(p, k, inits, horizon, tol, jobs)
    ends: dict = {}
    for r in runs:
        key = r.equilibrium.name if r.status == "equilibrium" else r.status
        ends[key] = ends.get(key, 0) + 1
    rep = FaceReport(face, len(runs), sum(r.status == "cycle" for r in runs),
                     sum(r.status == "equilibrium" for r in runs),
                     sum(r.status == "inconclusive" for r in runs), ends, seed)
    if raise_on_cycle and rep.n_cycles:
        raise PropertyViolation(f"periodic orbit detected on face {face}")
    return rep
