"""Hopf test function f = a2 a1 - a0 at the interior equilibrium.

With all but one inflow fixed, f is a polynomial in the free inflow
(degree 2 in u_h, 3 in u_f and u_g): x0 and x1 are affine in the
inflows and the substrate levels at the interior equilibrium do not
depend on them.  The coefficients are recovered by interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from ..equilibria import eq_111
from ..errors import SamplingWindowError
from ..kinetics import default_kinetics
from ..stability import rh_coefficients_interior

HOPF_DEGREE = {"u_f": 3, "u_g": 3, "u_h": 2}


def _kin(p, k):
    return default_kinetics(p) if k is None else k


def hopf_f(p, k=None) -> float | None:
    """a2 a1 - a0 at the interior equilibrium, or None if it does not exist."""
    k = _kin(p, k)
    e = eq_111(p, k)
    if e is None:
        return None
    a2, a1, a0 = rh_coefficients_interior(p, k, e.x)
    return a2 * a1 - a0


@dataclass
class HopfPolynomial:
    free_parameter: str
    coefficients: np.ndarray  # highest degree first, like b3, b2, b1, b0
    fixed: dict
    window: tuple[float, float]
    holdout_residual: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(self.coefficients[::-1])

    def __call__(self, v):
        return self.polynomial(v)


def feasible_window(p, k, free, lo=0.0, hi=None, n=2001):
    """Longest interval of the free parameter on which the interior equilibrium exists."""
    k = _kin(p, k)
    if hi is None:
        hi = max(2.0 * getattr(p, free), 1.0)
    grid = np.linspace(lo, hi, n)
    ok = np.array([eq_111(p.with_(**{free: v}), k) is not None for v in grid])
    best, start = None, None
    for i, flag in enumerate(np.append(ok, False)):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if best is None or i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    if best is None or best[1] - best[0] < 2:
        raise SamplingWindowError(f"interior equilibrium does not exist for {free} in [{lo}, {hi}]")
    i0, i1 = best
    a = grid[i0]
    b = grid[i1 - 1]
    # shrink slightly so no sample sits on an existence boundary
    pad = 1e-6 * (b - a)
    return a + pad, b - pad


def hopf_polynomial(p, k=None, free: str = "u_h", window=None, n_holdout: int = 5,
                    tol: float = 1e-8) -> HopfPolynomial:
    """Interpolate f in the free inflow at Chebyshev nodes of the feasible window."""
    k = _kin(p, k)
    if free not in HOPF_DEGREE:
        raise ValueError(f"free parameter must be one of {sorted(HOPF_DEGREE)}")
    deg = HOPF_DEGREE[free]
    a, b = window if window is not None else feasible_window(p, k, free)
    if not b > a:
        raise SamplingWindowError(f"empty sampling window ({a}, {b})")
    cheb = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * cheb
    vals = []
    for v in nodes:
        fv = hopf_f(p.with_(**{free: float(v)}), k)
        if fv is None:
            raise SamplingWindowError(f"no interior equilibrium at {free}={v}")
        vals.append(fv)
    # fit in the scaled variable t in [-1, 1], then convert to monomials
    fit = Chebyshev.fit(nodes, vals, deg, domain=[a, b])
    poly = fit.convert(kind=Polynomial, domain=[-1, 1], window=[-1, 1])
    coefs = np.zeros(deg + 1)
    coefs[: len(poly.coef)] = poly.coef
    held = 0.5 * (a + b) + 0.5 * (b - a) * np.linspace(-0.9, 0.9, n_holdout)
    scale = max(np.abs(vals).max(), 1e-300)
    resid = 0.0
    for v in held:
        fv = hopf_f(p.with_(**{free: float(v)}), k)
        if fv is None:
            raise SamplingWindowError(f"no interior equilibrium at {free}={v}")
        resid = max(resid, abs(fit(v) - fv) / scale)
    if resid > tol:
        raise SamplingWindowError(
            f"interpolant misses held-out samples by {resid:.2e} (relative); "
            f"f is not a degree-{deg} polynomial on this window")
    fixed = {n: getattr(p, n) for n in ("alpha", "u_f", "u_g", "u_h") if n != free}
    return HopfPolynomial(free, coefs[::-1].copy(), fixed, (float(a), float(b)), float(resid))


def hopf_roots_and_transversality(hp: HopfPolynomial, within_window: bool = True,
                                  rel_tol: float = 1e-7):
    """Real roots of the Hopf polynomial, each flagged transversal or not.

    A root is transversal when the derivative polynomial does not vanish
    there, i.e. the root is not also a local extremum of f.
    """
    P = hp.polynomial.trim()
    if P.degree() < 1:
        return []
    dP = P.deriv()
    a, b = hp.window
    coef_scale = np.abs(P.coef).max()
    out = []
    for r in P.roots():
        if abs(r.imag) > 1e-7 * max(1.0, abs(r.real)):
            continue
        x = float(r.real)
        if within_window and not (a <= x <= b):
            continue
        # derivative scale comparable with the size of the polynomial near x
        ref = max(abs(c) * abs(x) ** i for i, c in enumerate(P.coef)) / max(abs(x), 1e-12)
        transversal = abs(dP(x)) > rel_tol * max(ref, coef_scale * 1e-300)
        out.append((x, bool(transversal)))
    out.sort()
    # a double root shows up as two nearly equal roots
    merged = []
    for x, t in out:
        if merged and abs(x - merged[-1][0]) <= 1e-6 * max(1.0, abs(x)):
            merged[-1] = (0.5 * (x + merged[-1][0]), False)
        else:
            merged.append((x, t))
    return merged


def hopf_locus_check(p, k=None, tol=1e-8):
    """(on_locus, a2, a1, a0) with |a2 a1 - a0| measured relative to a2 a1."""
    k = _kin(p, k)
    e = eq_111(p, k)
    if e is None:
        return False, None, None, None
    a2, a1, a0 = rh_coefficients_interior(p, k, e.x)
    ok = a1 > 0 and abs(a2 * a1 - a0) <= tol * max(abs(a2 * a1), abs(a0), 1e-300)
    return ok, a2, a1, a0
