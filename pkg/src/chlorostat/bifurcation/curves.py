"""Two-parameter tracing of Hopf and fold curves, and a bisection locator
for saddle-node bifurcations of limit cycles.

The defining system of a codimension-one curve is the equilibrium
equations of a pattern plus one scalar test:

* hopf: a1 - a0 / a2 of the full reduced Jacobian (zero iff a2 a1 = a0
  when a2 > 0), on the interior pattern 111
* fold: det of the pattern's block of d(mu - alpha)/dx

The test row of the Jacobian is taken by central differences.  Along a
Hopf curve l1 is recorded at every point; sign changes are located as
Bautin points, and an end of the curve where a1 has dropped to zero is
flagged as a Bogdanov-Takens candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..errors import ChlorostatError, NotOnLocusError
from ..equilibria import eq_111
from ..kinetics import default_kinetics
from ..model import OmegaRegion
from ..stability import char_coefficients
from . import arclength
from .continuation import PARAMS, BifurcationPoint, continue_equilibria
from .hopf import hopf_f
from .lyapunov import first_lyapunov, multilinear_forms

BT_RATIO = 1e-6
FD_STEP = 1e-7


def _kin(p, k):
    return default_kinetics(p) if k is None else k


class Codim1System:
    """Scaled unknowns (x_S, lambda_1, lambda_2); equations G_S and one test."""

    def __init__(self, p, k, kind, pattern, params, ranges):
        if kind not in ("hopf", "fold"):
            raise ValueError("kind must be 'hopf' or 'fold'")
        if len(params) != 2 or params[0] == params[1] or any(n not in PARAMS for n in params):
            raise ValueError(f"params must be two distinct names from {PARAMS}")
        self.p, self.k, self.kind = p, _kin(p, k), kind
        self.pattern = "111" if kind == "hopf" else pattern
        self.S = [i for i, c in enumerate(self.pattern) if c == "1"]
        self.params = tuple(params)
        self.ranges = [tuple(map(float, r)) for r in ranges]
        top = p.with_(**{n: max(r[1], getattr(p, n)) for n, r in zip(params, self.ranges)})
        bounds = OmegaRegion(top).bounds()
        self.sbounds = np.maximum(bounds, 1e-12)
        self.sx = self.sbounds[self.S]
        self.sl = np.array([max(r[1] - r[0], 1e-12) for r in self.ranges])
        self.M = OmegaRegion(p).matrix
        self.test_scale = 1.0

    def unpack(self, z):
        x = np.zeros(3)
        x[self.S] = z[:len(self.S)] * self.sx
        return x, z[len(self.S):] * self.sl

    def pack(self, x, lams):
        return np.concatenate([np.asarray(x, dtype=float)[self.S] / self.sx,
                               np.asarray(lams, dtype=float) / self.sl])

    def params_at(self, lams):
        return self.p.with_(**{n: float(v) for n, v in zip(self.params, lams)})

    def _parts(self, z):
        x, lams = self.unpack(z)
        vals = {n: getattr(self.p, n) for n in PARAMS}
        vals.update(dict(zip(self.params, lams)))
        c = np.array([vals["u_f"], vals["u_g"], vals["u_h"]])
        s = c + self.M @ x
        return x, lams, vals["alpha"], s

    def jacobian_at(self, z):
        """Reduced Jacobian without substrate clipping (smooth in z)."""
        x, _, a, s = self._parts(z)
        mu = np.asarray(self.k.rates(*s))
        G = self.k.gradients(s) @ self.M
        return np.diag(mu - a) + x[:, None] * G

    def raw_test(self, z):
        if self.kind == "hopf":
            a2, a1, a0 = char_coefficients(self.jacobian_at(z))
            return a1 - a0 / a2
        x, _, _, s = self._parts(z)
        G = self.k.gradients(s) @ self.M
        return np.linalg.det(G[np.ix_(self.S, self.S)])

    def F(self, z):
        x, lams, a, s = self._parts(z)
        mu = self.k.rates(*s)
        eqs = [mu[i] - a for i in self.S]
        return np.array(eqs + [self.raw_test(z) / self.test_scale])

    def DF(self, z):
        x, lams, a, s = self._parts(z)
        G = self.k.gradients(s)[self.S]
        Dx = (G @ self.M[:, self.S]) * self.sx
        Dl = np.zeros((len(self.S), 2))
        for j, n in enumerate(self.params):
            Dl[:, j] = -1.0 if n == "alpha" else G[:, PARAMS.index(n) - 1]
        top = np.hstack([Dx, Dl * self.sl])
        row = np.empty(len(z))
        for j in range(len(z)):
            e = np.zeros(len(z))
            e[j] = FD_STEP
            row[j] = (self.raw_test(z + e) - self.raw_test(z - e)) / (2 * FD_STEP)
        return np.vstack([top, row / self.test_scale])

    def slack(self, z):
        x, lams, _, s = self._parts(z)
        vals = {}
        for i in self.S:
            vals[f"x{i}=0"] = x[i] / self.sbounds[i]
        for i in range(3):
            vals[f"s{i}=0"] = s[i] / self.sbounds[i]
        for n, v, r, w in zip(self.params, lams, self.ranges, self.sl):
            vals[f"{n}-min"] = (v - r[0]) / w
            vals[f"{n}-max"] = (r[1] - v) / w
        if self.kind == "hopf":
            vals["a1=0"] = char_coefficients(self.jacobian_at(z))[1] / self.test_scale
        name = min(vals, key=vals.get)
        return vals[name], name

    def tests(self, z):
        """[l1, a1] on a Hopf curve, [parameter-1 tangent proxy] on a fold curve."""
        if self.kind == "fold":
            return np.array([self.raw_test(z)])
        J = self.jacobian_at(z)
        a1 = char_coefficients(J)[1]
        l1 = np.nan
        if a1 > 0:
            x, lams, _, _ = self._parts(z)
            B, C = multilinear_forms(self.params_at(lams), self.k, x)
            try:
                l1 = first_lyapunov(J, B, C)[0]
            except NotOnLocusError:
                pass
        return np.array([l1, a1])


@dataclass
class Codim1Curve:
    kind: str
    pattern: str
    params: tuple
    values: np.ndarray  # (n, 2) parameter coordinates
    states: np.ndarray  # (n, 3)
    l1: np.ndarray | None
    a1: np.ndarray | None
    stop_reasons: tuple
    points: list = field(default_factory=list)  # codim-2 BifurcationPoint


def seed_hopf(p, k=None, free: str = "alpha", prange=(1e-3, 0.3), n: int = 600):
    """A Hopf point on E111 at fixed other parameters, by bracketing a2 a1 - a0 in ``free``."""
    k = _kin(p, k)
    grid = np.linspace(prange[0], prange[1], n)
    vals = []
    for v in grid:
        f = hopf_f(p.with_(**{free: float(v)}), k)
        vals.append(np.nan if f is None else f)
    vals = np.array(vals)
    for i in range(n - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0:
            v = brentq(lambda t: hopf_f(p.with_(**{free: float(t)}), k), grid[i], grid[i + 1],
                       xtol=1e-15)
            q = p.with_(**{free: float(v)})
            return q, eq_111(q, k).x
    raise NotOnLocusError(f"no Hopf point of E111 found for {free} in {tuple(prange)}")


def seed_fold(p, k=None, pattern: str = "110", free: str = "alpha", prange=(0.01, 0.3)):
    """A fold point of ``pattern`` from a one-parameter sweep in ``free``."""
    _, events = continue_equilibria(p, k, free, prange)
    for e in events:
        if e.kind == "fold" and e.pattern == pattern:
            return p.with_(**{free: e.params[free]}), e.state
    raise NotOnLocusError(f"no fold of E{pattern} found for {free} in {tuple(prange)}")


def trace_codim1_curve(p0, k=None, kind: str = "hopf", params=("alpha", "u_f"),
                       ranges=((1e-3, 0.3), (0.05, 3.0)), seed=None, pattern: str = "110",
                       h0: float = arclength.H_INIT, h_max: float = arclength.H_MAX,
                       max_steps: int = 20000) -> Codim1Curve:
    """Trace a Hopf or fold curve in two parameters from a seed on the locus.

    ``seed`` is (params, x) on the curve; by default one is found by
    sweeping the first parameter at p0.
    """
    k = _kin(p0, k)
    if seed is None:
        if kind == "hopf":
            seed = seed_hopf(p0, k, params[0], ranges[0])
        else:
            seed = seed_fold(p0, k, pattern, params[0], ranges[0])
    q, x = seed
    sys_ = Codim1System(q, k, kind, pattern, params, ranges)
    z0 = sys_.pack(x, [getattr(q, n) for n in params])
    if kind == "hopf":
        a2, a1, a0 = char_coefficients(sys_.jacobian_at(z0))
        if not a1 > 0:
            raise NotOnLocusError("seed has a1 <= 0")
        sys_.test_scale = a1
    else:
        sys_.test_scale = max(abs(sys_.raw_test(sys_.pack(x * 1.01, [getattr(q, n) for n in params]))), 1e-300)
    resid = np.abs(sys_.F(z0)).max()
    if resid > 1e-6:
        raise NotOnLocusError(f"seed is not on the {kind} locus (residual {resid:.3e})")
    z0 = arclength.correct(sys_.F, sys_.DF, z0, arclength.tangent(sys_.DF(z0))) if resid > 1e-11 else z0
    if z0 is None:
        raise NotOnLocusError("seed correction failed")
    t0 = arclength.tangent(sys_.DF(z0))
    kw = dict(h0=h0, h_max=h_max, max_steps=max_steps)
    fwd = arclength.trace(sys_.F, sys_.DF, z0, t0, sys_.slack, sys_.tests, **kw)
    bwd = arclength.trace(sys_.F, sys_.DF, z0, -t0, sys_.slack, sys_.tests, **kw)
    zs = bwd.z[::-1] + fwd.z[1:]
    tests = np.array(bwd.tests[::-1] + fwd.tests[1:])
    unpacked = [sys_.unpack(z) for z in zs]
    states = np.array([u[0] for u in unpacked])
    values = np.array([u[1] for u in unpacked])
    ends = (bwd.boundary or bwd.stop_reason, fwd.boundary or fwd.stop_reason)
    curve = Codim1Curve(kind, sys_.pattern, tuple(params), values, states,
                        tests[:, 0] if kind == "hopf" else None,
                        tests[:, 1] if kind == "hopf" else None, ends)
    if kind == "hopf":
        curve.points = _codim2_points(sys_, zs, tests, ends)
    return curve


def _point(sys_, kind, z, diag):
    x, lams = sys_.unpack(z)
    q = sys_.params_at(lams)
    params = {n: getattr(q, n) for n in PARAMS}
    J = sys_.jacobian_at(z)
    diag = dict(diag, eigenvalues=np.linalg.eigvals(J).tolist())
    return BifurcationPoint(kind, params, x, sys_.pattern, diag)


def _codim2_points(sys_, zs, tests, ends):
    pts = []
    l1 = tests[:, 0]
    for i in range(len(zs) - 1):
        if np.isfinite(l1[i]) and np.isfinite(l1[i + 1]) and l1[i] * l1[i + 1] < 0:
            z = arclength.locate_zero(sys_.F, sys_.DF, zs[i], zs[i + 1],
                                      lambda q: sys_.tests(q)[0], l1[i], l1[i + 1])
            if z is not None:
                pts.append(_point(sys_, "bautin", z, {"l1_before": float(l1[i]),
                                                      "l1_after": float(l1[i + 1])}))
    a1 = tests[:, 1]
    amax = np.nanmax(a1)
    for idx, end in ((0, ends[0]), (len(zs) - 1, ends[1])):
        if a1[idx] < BT_RATIO * amax:
            pts.append(_point(sys_, "bogdanov-takens", zs[idx],
                              {"a1": float(a1[idx]), "a1_max": float(amax), "end": end,
                               "candidate": True}))
    return pts


def locate_snlc(p, k=None, param: str = "alpha", bracket=(0.0, 1.0), predicate=None,
                tol: float = 1e-4, max_iter: int = 60, **cycle_kw) -> float:
    """Parameter value where stable cycles disappear, by bisection on cycle existence.

    ``predicate(q) -> bool`` reports whether a stable cycle exists at
    parameters q; it must differ at the two bracket ends.  The default
    runs the cycle detector from a slightly perturbed interior equilibrium.
    """
    k = _kin(p, k)
    if predicate is None:
        predicate = lambda q: _cycle_exists(q, k, **cycle_kw)  # noqa: E731
    lo, hi = map(float, bracket)
    plo = predicate(p.with_(**{param: lo}))
    phi = predicate(p.with_(**{param: hi}))
    if plo == phi:
        raise ChlorostatError("cycle existence does not change across the bracket")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if predicate(p.with_(**{param: mid})) == plo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _cycle_exists(q, k, horizon=3e5, tol=1e-8, offset=0.1):
    from ..dynamics.cycles import detect_cycle

    e = eq_111(q, k)
    if e is None:
        return False
    y0 = e.x * np.array([1.0, 1.0, 1.0 - offset])
    return detect_cycle(q, k, y0, horizon=horizon, tol=tol).status == "cycle"
