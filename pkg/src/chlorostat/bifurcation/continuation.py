"""One-parameter continuation of equilibrium branches with event detection.

A branch with presence pattern S is continued on the reduced equations
mu_i(s) = alpha for i in S (biomass factors divided out), so it passes
smoothly through the points where it crosses a face; leaving Omega ends
the branch.  Along a branch three kinds of test functions are watched:

* det of the S-block of d(mu - alpha)/dx   -> fold (turning point)
* mu_j - alpha for each absent species j   -> transcritical, where the
  branch of pattern S + {j} crosses this one
* a2 a1 - a0 of the full Jacobian, a1 > 0  -> Hopf

Each factor vanishing makes det J vanish, which is how fold and
transcritical points are told apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..equilibria import (Equilibrium, PresencePattern, enumerate_equilibria, eq_101, eq_011,
                          eq_110_all, eq_111, eq_001, eq_010, eq_100)
from ..kinetics import default_kinetics
from ..model import OmegaRegion, lift, substrates
from ..stability import char_coefficients, classify, jacobian_reduced
from . import arclength
from .lyapunov import first_lyapunov, multilinear_forms

PARAMS = ("alpha", "u_f", "u_g", "u_h")
EVENT_TOL = 1e-10


def _kin(p, k):
    return default_kinetics(p) if k is None else k


@dataclass
class BifurcationPoint:
    kind: str  # fold | transcritical | hopf | saddle-node-of-cycles | bautin | bogdanov-takens
    params: dict
    state: np.ndarray
    pattern: str
    diagnostics: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params),
                "state": [float(v) for v in self.state], "pattern": self.pattern,
                "diagnostics": _jsonable(self.diagnostics)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex) or isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


@dataclass
class Branch:
    pattern: str
    param: str
    values: np.ndarray
    states: np.ndarray
    reports: list
    stop_reasons: tuple
    arclength: np.ndarray | None = None

    def equilibrium_at(self, i, p, k=None) -> Equilibrium:
        q = p.with_(**{self.param: float(self.values[i])})
        return Equilibrium(PresencePattern.from_label(self.pattern), self.states[i],
                           lift(q, self.states[i], tol=1e-8), True, "numeric-refined")

    def __len__(self):
        return len(self.values)


class EquilibriumSystem:
    """Scaled defining equations of a pattern's branch in (x_S, parameter)."""

    def __init__(self, p, k, pattern: str, param: str, prange):
        self.p = p
        self.k = _kin(p, k)
        self.pattern = pattern
        self.S = [i for i, c in enumerate(pattern) if c == "1"]
        self.absent = [i for i in range(3) if i not in self.S]
        self.param = param
        self.lo, self.hi = prange
        q = p.with_(**{param: max(self.hi, getattr(p, param))})
        bounds = OmegaRegion(q).bounds()
        self.sx = np.maximum(bounds[self.S], 1e-12)
        self.sl = max(self.hi - self.lo, 1e-12)
        self.M = OmegaRegion(p).matrix
        self.sbounds = np.maximum(bounds, 1e-12)

    # coordinates
    def unpack(self, z):
        x = np.zeros(3)
        x[self.S] = z[:-1] * self.sx
        return x, z[-1] * self.sl

    def pack(self, x, lam):
        return np.append(np.asarray(x, dtype=float)[self.S] / self.sx, lam / self.sl)

    def params_at(self, lam):
        return self.p.with_(**{self.param: float(lam)}) if lam >= 0 else None

    def _subs(self, x, lam):
        c = np.array([self.p.u_f, self.p.u_g, self.p.u_h])
        if self.param != "alpha":
            c[PARAMS.index(self.param) - 1] = lam
        return c + self.M @ x

    def _alpha(self, lam):
        return lam if self.param == "alpha" else self.p.alpha

    def F(self, z):
        x, lam = self.unpack(z)
        s = self._subs(x, lam)
        mu = self.k.rates(*s)
        a = self._alpha(lam)
        return np.array([mu[i] - a for i in self.S])

    def DF(self, z):
        x, lam = self.unpack(z)
        s = self._subs(x, lam)
        G = self.k.gradients(s)[self.S]  # rows: d mu_i / ds
        Dx = G @ self.M[:, self.S]
        if self.param == "alpha":
            Dl = -np.ones(len(self.S))
        else:
            Dl = G[:, PARAMS.index(self.param) - 1]
        return np.hstack([Dx * self.sx, (Dl * self.sl)[:, None]])

    def slack(self, z):
        x, lam = self.unpack(z)
        s = self._subs(x, lam)
        vals = {}
        for i in self.S:
            vals[f"x{i}=0"] = x[i] / self.sbounds[i]
        for i in range(3):
            vals[f"s{i}=0"] = s[i] / self.sbounds[i]
        vals["param-min"] = (lam - self.lo) / self.sl
        vals["param-max"] = (self.hi - lam) / self.sl
        name = min(vals, key=vals.get)
        return vals[name], name

    def tests(self, z):
        """[fold det, transverse rates..., hopf f, a1]."""
        x, lam = self.unpack(z)
        s = self._subs(x, lam)
        a = self._alpha(lam)
        G = self.k.gradients(s)
        mu = self.k.rates(*s)
        block = (G @ self.M)[np.ix_(self.S, self.S)]
        out = [np.linalg.det(block)]
        out += [mu[j] - a for j in self.absent]
        q = self.params_at(lam)
        J = jacobian_reduced(q, self.k, x) if q is not None else np.full((3, 3), np.nan)
        a2, a1, a0 = char_coefficients(J)
        out += [a2 * a1 - a0, a1]
        return np.array(out)


def _seed_grid(p, k, param, prange, n):
    vals = np.linspace(prange[0], prange[1], n)
    seeds = []
    for v in vals:
        q = p.with_(**{param: float(v)})
        for e in enumerate_equilibria(q, k):
            if e.pattern.label != "000":
                seeds.append((e.pattern.label, float(v), e.x.copy()))
    return seeds


def _on_branch(sys_, z, branch_z, tol=1e-3):
    """Distance test of a scaled point against a traced polyline."""
    Z = np.asarray(branch_z)
    if len(Z) == 1:
        return np.linalg.norm(Z[0] - z) < tol
    a, b = Z[:-1], Z[1:]
    d = b - a
    L2 = np.einsum("ij,ij->i", d, d)
    L2[L2 == 0] = 1.0
    s = np.clip(np.einsum("ij,ij->i", z - a, d) / L2, 0, 1)
    proj = a + s[:, None] * d
    return bool(np.min(np.linalg.norm(proj - z, axis=1)) < tol)


def _partner(p, k, param, lam, x, j, pattern):
    """Pattern of the branch crossing at a transcritical point, if it can be found."""
    bigger = list(pattern)
    bigger[j] = "1"
    big = "".join(bigger)
    finders = {"100": eq_100, "010": eq_010, "001": eq_001, "101": eq_101, "011": eq_011,
               "111": eq_111}
    q = p.with_(**{param: float(lam)})
    cands = eq_110_all(q, k, include_infeasible=True) if big == "110" else []
    if big in finders:
        try:
            e = finders[big](q, k, include_infeasible=True)
        except Exception:
            e = None
        if e is not None:
            cands = [e]
    scale = np.maximum(OmegaRegion(q).bounds(), 1e-12)
    for e in cands:
        if np.max(np.abs(e.x - x) / scale) < 1e-6:
            return big
    return None


def _describe_hopf(q, k, x):
    J = jacobian_reduced(q, k, x)
    a2, a1, a0 = char_coefficients(J)
    diag = {"a2": a2, "a1": a1, "a0": a0, "omega": float(np.sqrt(max(a1, 0.0))),
            "eigenvalues": np.linalg.eigvals(J).tolist()}
    if a1 > 0:
        B, C = multilinear_forms(q, k, x)
        try:
            diag["l1"] = first_lyapunov(J, B, C)[0]
        except Exception as exc:  # pair not resolved at this point
            diag["l1_error"] = str(exc)
    return diag


def _events_on_branch(sys_, curve, p, k):
    events = []
    T = np.array(curve.tests)
    Z = curve.z
    n_abs = len(sys_.absent)
    for i in range(len(Z) - 1):
        ta, tb = T[i], T[i + 1]
        # fold
        if np.sign(ta[0]) * np.sign(tb[0]) < 0:
            z = arclength.locate_zero(sys_.F, sys_.DF, Z[i], Z[i + 1], lambda q: sys_.tests(q)[0],
                                      ta[0], tb[0])
            if z is not None:
                x, lam = sys_.unpack(z)
                t = arclength.tangent(sys_.DF(z))
                events.append(("fold", lam, x, {"tangent_param_component": float(t[-1]),
                                                "block_det": float(sys_.tests(z)[0])}))
        for m in range(n_abs):
            c = 1 + m
            if np.sign(ta[c]) * np.sign(tb[c]) < 0:
                z = arclength.locate_zero(sys_.F, sys_.DF, Z[i], Z[i + 1],
                                          lambda q, c=c: sys_.tests(q)[c], ta[c], tb[c])
                if z is not None:
                    x, lam = sys_.unpack(z)
                    j = sys_.absent[m]
                    partner = _partner(p, sys_.k, sys_.param, lam, x, j, sys_.pattern)
                    kind = "transcritical" if partner else "branch-point"
                    events.append((kind, lam, x, {"species": j, "partner": partner}))
        hf = 1 + n_abs
        if np.sign(ta[hf]) * np.sign(tb[hf]) < 0 and (ta[hf + 1] > 0 or tb[hf + 1] > 0):
            z = arclength.locate_zero(sys_.F, sys_.DF, Z[i], Z[i + 1],
                                      lambda q: sys_.tests(q)[hf], ta[hf], tb[hf])
            if z is not None:
                x, lam = sys_.unpack(z)
                q = sys_.params_at(lam)
                d = _describe_hopf(q, sys_.k, x)
                if d["a1"] > 0:
                    events.append(("hopf", lam, x, d))
    return events


def _branch_reports(p, k, param, pattern, values, states):
    reps = []
    pat = PresencePattern.from_label(pattern)
    for lam, x in zip(values, states):
        q = p.with_(**{param: float(lam)})
        e = Equilibrium(pat, x, None, True, "numeric-refined")
        try:
            reps.append(classify(q, k, e))
        except Exception:
            reps.append(None)
    return reps


def _trivial_branch(p, k, param, prange, n=401):
    """The (000) branch: x = 0 for all parameter values; events where mu_j(inflow) = alpha."""
    vals = np.linspace(prange[0], prange[1], n)
    states = np.zeros((n, 3))
    events = []

    def rate(lam, j):
        q = p.with_(**{param: float(lam)})
        return k.rates(q.u_f, q.u_g, q.u_h)[j] - q.alpha

    for j in range(3):
        g = np.array([rate(v, j) for v in vals])
        for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
            lam = brentq(rate, vals[i], vals[i + 1], args=(j,), xtol=1e-15)
            pat = ["0", "0", "0"]
            pat[j] = "1"
            events.append(("transcritical", lam, np.zeros(3), {"species": j, "partner": "".join(pat)}))
    reps = _branch_reports(p, k, param, "000", vals, states)
    return Branch("000", param, vals, states, reps, ("param-min", "param-max")), events


def continue_equilibria(p0, k=None, param: str = "alpha", prange=(0.01, 0.3),
                        h0: float = arclength.H_INIT, h_max: float = arclength.H_MAX,
                        h_min: float = arclength.H_MIN, n_seeds: int = 41,
                        max_steps: int = 20000):
    """Trace every equilibrium branch over ``prange`` and collect bifurcation events.

    Returns (branches, events); events are ordered by decreasing parameter.
    """
    k = _kin(p0, k)
    if param not in PARAMS:
        raise ValueError(f"param must be one of {PARAMS}")
    lo, hi = float(prange[0]), float(prange[1])
    if not hi > lo:
        return [], []
    branches = []
    raw_events = []
    b0, ev0 = _trivial_branch(p0, k, param, (lo, hi))
    branches.append(b0)
    raw_events += [("000",) + e for e in ev0]
    traced: dict[str, list] = {}
    systems: dict[str, EquilibriumSystem] = {}
    for pattern, lam, x in _seed_grid(p0, k, param, (lo, hi), n_seeds):
        sys_ = systems.setdefault(pattern, EquilibriumSystem(p0, k, pattern, param, (lo, hi)))
        z0 = sys_.pack(x, lam)
        if any(_on_branch(sys_, z0, zs) for zs in traced.get(pattern, [])):
            continue
        t0 = arclength.tangent(sys_.DF(z0))
        kw = dict(h0=h0, h_min=h_min, h_max=h_max, max_steps=max_steps)
        fwd = arclength.trace(sys_.F, sys_.DF, z0, t0, sys_.slack, sys_.tests, **kw)
        bwd = arclength.trace(sys_.F, sys_.DF, z0, -t0, sys_.slack, sys_.tests, **kw)
        zs = bwd.z[::-1] + fwd.z[1:]
        tests = bwd.tests[::-1] + fwd.tests[1:]
        curve = arclength.Curve(zs, None, tests)
        traced.setdefault(pattern, []).append(zs)
        xs, lams = zip(*(sys_.unpack(z) for z in zs))
        states = np.array(xs)
        values = np.array(lams)
        s_arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(np.array(zs), axis=0), axis=1))])
        reps = _branch_reports(p0, k, param, pattern, values, states)
        branches.append(Branch(pattern, param, values, states, reps,
                               (bwd.boundary or bwd.stop_reason, fwd.boundary or fwd.stop_reason),
                               s_arc))
        raw_events += [(pattern,) + e for e in _events_on_branch(sys_, curve, p0, k)]
    events = _dedupe(p0, param, raw_events)
    return branches, events


def _dedupe(p0, param, raw):
    out: list[BifurcationPoint] = []
    for pattern, kind, lam, x, diag in raw:
        dup = False
        for e in out:
            if e.kind == kind and abs(e.params[param] - lam) <= 1e-8 * max(1.0, abs(lam)) \
                    and np.max(np.abs(e.state - x)) <= 1e-6 * max(1.0, np.max(np.abs(x))):
                e.diagnostics.setdefault("also_on", []).append(pattern)
                dup = True
                break
        if dup:
            continue
        q = p0.with_(**{param: float(lam)})
        params = {n: getattr(q, n) for n in PARAMS}
        out.append(BifurcationPoint(kind, params, np.asarray(x, dtype=float), pattern, dict(diag)))
    out.sort(key=lambda e: -e.params[param])
    return out


def direct_hopf_root(p, k, param, bracket):
    """Hopf parameter value by scalar root finding on a2 a1 - a0 at the interior equilibrium."""
    from .hopf import hopf_f

    k = _kin(p, k)

    def f(v):
        val = hopf_f(p.with_(**{param: float(v)}), k)
        if val is None:
            raise ValueError("no interior equilibrium")
        return val

    return brentq(f, bracket[0], bracket[1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
