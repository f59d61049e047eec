"""Equilibria of the reduced system.

Every equilibrium is labelled by its presence pattern (which biomass
components are nonzero).  Closed forms are used where they exist; the
(110) class reduces to a single polynomial in x0; single-species
equilibria come from bracketed root finding on strictly decreasing maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .errors import NoPreimageError
from .kinetics import GrowthKinetics, ModelParams, MonodKinetics, default_kinetics
from .model import lift, rhs_reduced, substrates

TIE_TOL = 1e-10


@dataclass(frozen=True, order=True)
class PresencePattern:
    bits: tuple[bool, bool, bool]

    @classmethod
    def from_label(cls, label: str) -> "PresencePattern":
        if len(label) != 3 or set(label) - {"0", "1"}:
            raise ValueError(f"bad presence pattern {label!r}")
        return cls(tuple(c == "1" for c in label))

    @property
    def label(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def __str__(self):
        return self.label


# the order in which patterns are listed in tables
PATTERN_ORDER = tuple(PresencePattern.from_label(s)
                      for s in ("000", "100", "010", "001", "101", "011", "110", "111"))
_RANK = {pat: i for i, pat in enumerate(PATTERN_ORDER)}


@dataclass
class Equilibrium:
    pattern: PresencePattern
    x: np.ndarray
    lifted: np.ndarray | None
    existence_ok: bool
    provenance: str  # closed-form | polynomial-root | numeric-refined
    boundary: bool = False
    index: int | None = None  # numbering among several equilibria of one pattern
    notes: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        base = f"E{self.pattern.label}"
        return base if self.index is None else f"{base}({self.index})"

    def __repr__(self):
        xs = ", ".join(f"{v:.6g}" for v in self.x)
        flag = "" if self.existence_ok else ", infeasible"
        return f"<{self.name} ({xs}){flag}>"


def _kin(p, k):
    return default_kinetics(p) if k is None else k


def _make(p, pattern, x, provenance, include_infeasible, index=None):
    """Attach the Omega check and the lift, or return None if infeasible."""
    pat = PresencePattern.from_label(pattern)
    x = np.array(x, dtype=float)
    for i in range(3):
        if not pat.bits[i]:
            x[i] = 0.0
    s = substrates(p, x)
    checks = [x[i] for i in pat.support] + list(s)
    ok = all(np.isfinite(checks)) and min(checks, default=1.0) >= -TIE_TOL
    # positive components must be genuinely positive, not just tied at zero
    ok = ok and all(x[i] > 0 or abs(x[i]) <= TIE_TOL for i in pat.support)
    if not ok and not include_infeasible:
        return None
    boundary = ok and min((abs(c) for c in checks), default=1.0) <= TIE_TOL
    lifted = lift(p, x, tol=TIE_TOL) if ok else None
    return Equilibrium(pat, x, lifted, bool(ok), provenance, boundary, index)


def eq_000(p: ModelParams, k: GrowthKinetics | None = None) -> Equilibrium:
    return _make(p, "000", (0, 0, 0), "closed-form", True)


def eq_001(p, k=None, include_infeasible=False):
    """Methanogen-only equilibrium: x2 = u_h - mu2^{-1}(alpha)."""
    k = _kin(p, k)
    if p.alpha == 0:
        m = 0.0
    else:
        try:
            m = k.mu2_inv(p.alpha)
        except NoPreimageError:
            return None
    x2 = p.u_h - m
    if x2 <= 0 and not include_infeasible:
        return None
    return _make(p, "001", (0, 0, x2), "closed-form", include_infeasible)


def eq_100(p, k=None, include_infeasible=False):
    """Chlorophenol-degrader-only equilibrium by root finding.

    x0 -> mu0(u_f - x0, u_h - omega2 x0) is strictly decreasing on
    (0, min(u_f, u_h/omega2)), so a sign change brackets the unique root.
    """
    k = _kin(p, k)
    hi = min(p.u_f, p.u_h / p.omega2)
    g = lambda x0: k.mu0(max(p.u_f - x0, 0.0), max(p.u_h - p.omega2 * x0, 0.0)) - p.alpha
    if hi <= 0 or g(0.0) <= 0:
        return None
    x0 = brentq(g, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return _make(p, "100", (x0, 0, 0), "numeric-refined", include_infeasible)


def eq_010(p, k=None, include_infeasible=False):
    """Phenol-degrader-only equilibrium; x1 -> mu1(u_g - x1, omega1 x1 + u_h) decreases."""
    k = _kin(p, k)
    hi = p.u_g
    g = lambda x1: k.mu1(max(p.u_g - x1, 0.0), p.omega1 * x1 + p.u_h) - p.alpha
    if hi <= 0 or g(0.0) <= 0:
        return None
    x1 = brentq(g, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return _make(p, "010", (0, x1, 0), "numeric-refined", include_infeasible)


def _mu2_inv_or_none(p, k):
    if p.alpha <= 0:
        return None
    try:
        return k.mu2_inv(p.alpha)
    except NoPreimageError:
        return None


def eq_101(p, k=None, include_infeasible=False):
    k = _kin(p, k)
    m = _mu2_inv_or_none(p, k)
    if m is None:
        return None
    a = p.alpha
    if isinstance(k, MonodKinetics):
        den = a * (k.K_P + m) - m
        if den == 0:
            return None
        x0 = (a * (1 + p.u_f) * (k.K_P + m) - p.u_f * m) / den
        prov = "closed-form"
    else:
        s0 = k.mu0_inv_s0(a, m)
        if s0 is None:
            return None
        x0 = p.u_f - s0
        prov = "numeric-refined"
    x2 = -p.omega2 * x0 + p.u_h - m
    if not include_infeasible and (x0 <= 0 or x2 <= 0):
        return None
    return _make(p, "101", (x0, 0, x2), prov, include_infeasible)


def eq_011(p, k=None, include_infeasible=False):
    k = _kin(p, k)
    m = _mu2_inv_or_none(p, k)
    if m is None:
        return None
    a = p.alpha
    if isinstance(k, MonodKinetics):
        den = a * (1 + k.K_I * m) - k.phi1
        if den == 0:
            return None
        x1 = (a * (1 + p.u_g) * (1 + k.K_I * m) - p.u_g * k.phi1) / den
        prov = "closed-form"
    else:
        s1 = k.mu1_inv_s1(a, m)
        if s1 is None:
            return None
        x1 = p.u_g - s1
        prov = "numeric-refined"
    x2 = p.omega1 * x1 + p.u_h - m
    if not include_infeasible and (x1 <= 0 or x2 <= 0):
        return None
    return _make(p, "011", (0, x1, x2), prov, include_infeasible)


def eq_111(p, k=None, include_infeasible=False):
    """Interior equilibrium.  x0 and x1 do not depend on u_h."""
    k = _kin(p, k)
    m = _mu2_inv_or_none(p, k)
    if m is None:
        return None
    a = p.alpha
    if isinstance(k, MonodKinetics):
        KP, KI, p1, p2 = k.K_P, k.K_I, k.phi1, k.phi2
        d0 = KP * (p2 - a) + a - 1
        d1 = a * (1 + KI * a / (p2 - a)) - p1
        if d0 == 0 or d1 == 0:
            return None
        x0 = 1 + p.u_f + 1 / d0
        x1 = p.omega0 * x0 + p.u_g + 1 + p1 / d1
        prov = "closed-form"
    else:
        s0 = k.mu0_inv_s0(a, m)
        s1 = k.mu1_inv_s1(a, m)
        if s0 is None or s1 is None:
            return None
        x0 = p.u_f - s0
        x1 = p.omega0 * x0 + p.u_g - s1
        prov = "numeric-refined"
    x2 = -p.omega2 * x0 + p.omega1 * x1 + p.u_h - m
    return _make(p, "111", (x0, x1, x2), prov, include_infeasible)


def e110_polynomial(p: ModelParams, k: MonodKinetics | None = None) -> Polynomial:
    """Polynomial in x0 whose real roots contain the (110) equilibria.

    On the face x2 = 0 the condition mu0 = alpha gives s2 = N/D with
    D = (1-alpha)s0 - alpha and N = alpha K_P (1+s0); the conservation
    laws then give x1 and s1 = S/D, all rational in x0.  Clearing the
    denominators of mu1 = alpha leaves

        phi1 S D - alpha (D + S)(D + K_I N) = 0.

    Formally quartic; the x0^4 terms cancel, so the true degree is 3.
    """
    k = _kin(p, k)
    a = p.alpha
    X = Polynomial([0.0, 1.0])
    s0 = p.u_f - X
    D = (1 - a) * s0 - a
    N = a * k.K_P * (1 + s0)
    S = (p.omega0 * X + p.u_g) * D - (N + (p.omega2 * X - p.u_h) * D) / p.omega1
    return k.phi1 * S * D - a * (D + S) * (D + k.K_I * N)


def _face110_residual(p, k, x0, x1):
    s0, s1, s2 = substrates(p, (x0, x1, 0.0))
    return np.array([k.mu0(s0, s2) - p.alpha, k.mu1(s1, s2) - p.alpha])


def _polish_110(p, k, x0, x1, iters=20):
    """2-D Newton on (mu0 - alpha, mu1 - alpha) over the face x2 = 0."""
    w0, w1, w2 = p.omega0, p.omega1, p.omega2
    for _ in range(iters):
        s0, s1, s2 = substrates(p, (x0, x1, 0.0))
        if min(s0, s1, s2) < 0:
            break
        r = _face110_residual(p, k, x0, x1)
        d00, d02, d11, d12, _ = k.partials(s0, s1, s2)
        J = np.array([[-d00 - w2 * d02, w1 * d02],
                      [w0 * d11 - w2 * d12, -d11 + w1 * d12]])
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        x0, x1 = x0 + dx[0], x1 + dx[1]
        if abs(dx[0]) <= 1e-16 * max(abs(x0), 1e-300) and abs(dx[1]) <= 1e-16 * max(abs(x1), 1e-300):
            break
    return x0, x1


def _x1_from_x0_110(p, k, x0):
    """x1 on the face x2 = 0 such that mu0 = alpha, or None."""
    s0 = p.u_f - x0
    s2 = k.mu0_inv_s2(p.alpha, s0) if s0 > 0 else None
    if s2 is None:
        return None
    return (s2 + p.omega2 * x0 - p.u_h) / p.omega1


def eq_110_all(p, k=None, include_infeasible=False) -> list[Equilibrium]:
    """All (110) equilibria, numbered by increasing x0."""
    k = _kin(p, k)
    if p.alpha <= 0 or p.u_f <= 0:
        return []
    cands = []
    if isinstance(k, MonodKinetics):
        poly = e110_polynomial(p, k)
        prov = "polynomial-root"
        scale = np.abs(poly.coef).max()
        if scale == 0:
            return []
        poly = Polynomial(poly.coef / scale).trim(1e-14)
        roots = poly.roots() if poly.degree() > 0 else []
        for r in roots:
            if abs(r.imag) > 1e-9 * max(1.0, abs(r.real)):
                continue
            cands.append(r.real)
    else:
        # generic rates: scan mu1 - alpha along the mu0 = alpha curve
        prov = "numeric-refined"
        grid = np.linspace(0, p.u_f, 4001)[1:-1]
        vals = []
        for x0 in grid:
            x1 = _x1_from_x0_110(p, k, x0)
            if x1 is None:
                vals.append(np.nan)
                continue
            s1 = p.omega0 * x0 + p.u_g - x1
            s2 = -p.omega2 * x0 + p.omega1 * x1 + p.u_h
            vals.append(k.mu1(max(s1, 0), max(s2, 0)) - p.alpha)
        vals = np.array(vals)
        for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
            cands.append(0.5 * (grid[i] + grid[i + 1]))
    out = []
    for x0 in sorted(cands):
        if not 0 < x0 < p.u_f:
            continue
        x1 = _x1_from_x0_110(p, k, x0)
        if x1 is None:
            continue
        lo = max(0.0, (p.omega2 * x0 - p.u_h) / p.omega1)
        if not lo < x1 < p.u_g + p.omega0 * x0:
            if not include_infeasible:
                continue
        x0, x1 = _polish_110(p, k, x0, x1)
        if np.abs(_face110_residual(p, k, x0, x1)).max() > 1e-9:
            continue
        e = _make(p, "110", (x0, x1, 0), prov, include_infeasible)
        if e is not None and not any(abs(e.x[0] - o.x[0]) <= 1e-12 * max(1, abs(e.x[0])) for o in out):
            out.append(e)
    out.sort(key=lambda e: e.x[0])
    for i, e in enumerate(out, 1):
        e.index = i
    return out


def enumerate_equilibria(p: ModelParams, k: GrowthKinetics | None = None) -> list[Equilibrium]:
    """All feasible equilibria ordered by pattern, then x0."""
    k = _kin(p, k)
    found = [eq_000(p, k)]
    for fn in (eq_100, eq_010, eq_001, eq_101, eq_011):
        e = fn(p, k)
        if e is not None:
            found.append(e)
    found.extend(eq_110_all(p, k))
    e = eq_111(p, k)
    if e is not None:
        found.append(e)
    found.sort(key=lambda e: (_RANK[e.pattern], e.x[0]))
    return found


def equilibrium_residual(p, k, e: Equilibrium) -> float:
    return float(np.abs(rhs_reduced(p, _kin(p, k), e.x, strict=False)).max())
