"""Jacobian of the reduced system, Routh-Hurwitz data and stability labels."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import Equilibrium
from .errors import ChlorostatError, RegionViolation
from .kinetics import default_kinetics
from .model import VIOLATION_TOL, substrates

HYPERBOLIC_TOL = 1e-9


def _kin(p, k):
    return default_kinetics(p) if k is None else k


def jacobian_reduced(p, k, x) -> np.ndarray:
    """Analytic Jacobian of the reduced vector field at ``x``."""
    k = _kin(p, k)
    x0, x1, x2 = (float(v) for v in x)
    s = substrates(p, (x0, x1, x2))
    if s.min() < -VIOLATION_TOL:
        raise RegionViolation(f"Jacobian requested outside Omega at {x}")
    s0, s1, s2 = np.maximum(s, 0.0)
    m0, m1, m2 = k.rates(s0, s1, s2)
    d00, d02, d11, d12, d22 = k.partials(s0, s1, s2)
    a, w0, w1, w2 = p.alpha, p.omega0, p.omega1, p.omega2
    return np.array([
        [m0 - a + x0 * (-d00 - w2 * d02), w1 * x0 * d02, -x0 * d02],
        [x1 * (w0 * d11 - w2 * d12), m1 - a + x1 * (-d11 + w1 * d12), -x1 * d12],
        [-w2 * x2 * d22, w1 * x2 * d22, m2 - a - x2 * d22],
    ])


def char_coefficients(J) -> tuple[float, float, float]:
    """(a2, a1, a0) with det(lambda I - J) = lambda^3 + a2 lambda^2 + a1 lambda + a0."""
    J = np.asarray(J, dtype=float)
    a2 = -(J[0, 0] + J[1, 1] + J[2, 2])
    a1 = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
          + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
          + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
    det = (J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
           - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
           + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]))
    return a2, a1, -det


def _partials_at(p, k, x):
    s = np.maximum(substrates(p, x), 0.0)
    return k.partials(*s)


def rh_coefficients_interior(p, k, x) -> tuple[float, float, float]:
    """Characteristic coefficients at an interior equilibrium, from the partials.

    Uses mu_i = alpha at the equilibrium, which makes a2 and a0 manifestly
    positive.
    """
    k = _kin(p, k)
    x0, x1, x2 = (float(v) for v in x)
    if min(x0, x1, x2) <= 0:
        raise ChlorostatError("interior coefficients need x0, x1, x2 > 0")
    d00, d02, d11, d12, d22 = _partials_at(p, k, (x0, x1, x2))
    w0, w1, w2 = p.omega0, p.omega1, p.omega2
    a2 = x0 * (d00 + w2 * d02) + x1 * (d11 - w1 * d12) + x2 * d22
    a1 = (x1 * d11 * (x0 * d00 - (w0 * w1 - w2) * x0 * d02 + x2 * d22)
          + x0 * d00 * (-w1 * x1 * d12 + x2 * d22))
    a0 = x0 * x1 * x2 * d00 * d11 * d22
    return a2, a1, a0


def quadratic_coefficients(p, k, e: Equilibrium) -> dict:
    """Coefficients (a1, a0) of the 2x2 block at two-species equilibria.

    The block is stable iff a1 > 0 and a0 > 0.  The third eigenvalue is
    the transverse growth rate mu_j - alpha of the absent species; for
    (110) it is reported separately as ``transverse``.
    """
    k = _kin(p, k)
    x0, x1, x2 = e.x
    d00, d02, d11, d12, d22 = _partials_at(p, k, e.x)
    w0, w1, w2 = p.omega0, p.omega1, p.omega2
    s = np.maximum(substrates(p, e.x), 0.0)
    m = k.rates(*s)
    lab = e.pattern.label
    if lab == "101":
        a1 = x0 * (d00 + w2 * d02) + x2 * d22
        a0 = x0 * x2 * d00 * d22
        transverse = m[1] - p.alpha
    elif lab == "011":
        a1 = x1 * (d11 - w1 * d12) + x2 * d22
        a0 = x1 * x2 * d11 * d22
        transverse = m[0] - p.alpha
    elif lab == "110":
        a1 = x0 * (d00 + w2 * d02) + x1 * (d11 - w1 * d12)
        a0 = x0 * x1 * (d00 * (d11 - w1 * d12) + d02 * d11 * (w2 - w0 * w1))
        transverse = m[2] - p.alpha
    else:
        raise ChlorostatError(f"no quadratic block for pattern {lab}")
    return {"a1": a1, "a0": a0, "transverse": transverse}


def cubic_roots(a2, a1, a0) -> np.ndarray:
    """Roots of lambda^3 + a2 lambda^2 + a1 lambda + a0, sorted by real part.

    Closed form (trigonometric / Cardano); when the discriminant is close
    to zero the roots are taken from the companion matrix instead.  Each
    root gets two Newton corrections.
    """
    # depressed cubic t^3 + P t + Q with lambda = t - a2/3
    sh = a2 / 3.0
    P = a1 - a2 * a2 / 3.0
    Q = 2 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (Q / 2) ** 2 + (P / 3) ** 3
    scale = max(abs(a2), abs(a1) ** 0.5, abs(a0) ** (1 / 3), 1e-300)
    if abs(disc) <= 1e-10 * scale**6:
        roots = np.roots([1.0, a2, a1, a0]).astype(complex)
    elif disc > 0:
        sq = math.sqrt(disc)
        u = np.cbrt(-Q / 2 + sq)
        v = np.cbrt(-Q / 2 - sq)
        w = complex(-0.5, math.sqrt(3) / 2)
        roots = np.array([u + v, u * w + v * w.conjugate(), u * w.conjugate() + v * w]) - sh
    else:
        r = 2 * math.sqrt(-P / 3)
        arg = max(-1.0, min(1.0, 3 * Q / (P * r)))
        th = math.acos(arg) / 3
        roots = np.array([r * math.cos(th - 2 * math.pi * j / 3) for j in range(3)],
                         dtype=complex) - sh
    out = []
    for z in roots:
        z = complex(z)
        for _ in range(2):
            f = ((z + a2) * z + a1) * z + a0
            df = (3 * z + 2 * a2) * z + a1
            if df == 0:
                break
            step = f / df
            if not cmath.isfinite(step):
                break
            z -= step
        out.append(z)
    out = np.array(out)
    # real cubic: snap tiny imaginary parts, keep pairs conjugate
    out = np.where(np.abs(out.imag) <= 1e-14 * np.maximum(1.0, np.abs(out)), out.real + 0j, out)
    return out[np.lexsort((out.imag, out.real))]


def eigenvalues(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    a2, a1, a0 = char_coefficients(J)
    ev = cubic_roots(a2, a1, a0)
    # block-triangular matrices: read the exact diagonal entries off
    if not np.all(np.isfinite(ev)):
        ev = np.sort_complex(np.linalg.eigvals(J))
    return ev


@dataclass
class StabilityReport:
    eigenvalues: np.ndarray
    n_pos: int
    n_neg: int
    n_zero: int
    classification: str
    rh_coefficients: tuple
    rh_stable: bool | None = None
    details: dict = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.n_pos == 0 and self.n_zero == 0

    @property
    def label(self) -> str:
        if self.n_zero:
            return "nonhyperbolic"
        return "stable" if self.stable else "unstable"


def _classify_eigs(ev, tol):
    re = ev.real
    n_pos = int((re > tol).sum())
    n_neg = int((re < -tol).sum())
    n_zero = 3 - n_pos - n_neg
    if n_zero:
        cls = "nonhyperbolic"
    elif n_pos == 0:
        cls = "stable node" if np.all(np.abs(ev.imag) == 0) else "asymptotically stable"
    elif n_neg == 0:
        cls = "unstable node"
    else:
        cls = "saddle"
    return n_pos, n_neg, n_zero, cls


def _block_eigenvalues(p, k, e):
    """Eigenvalues from the per-pattern block structure (exact transverse rates)."""
    J = jacobian_reduced(p, k, e.x)
    sup = list(e.pattern.support)
    off = [i for i in range(3) if i not in sup]
    ev = [complex(J[i, i]) for i in off]
    if len(sup) == 3:
        return eigenvalues(J)
    if sup:
        B = J[np.ix_(sup, sup)]
        ev.extend(complex(z) for z in np.linalg.eigvals(B))
    ev = np.array(ev)
    return ev[np.lexsort((ev.imag, ev.real))]


def classify(p, k, e: Equilibrium, tol: float = HYPERBOLIC_TOL) -> StabilityReport:
    """Eigenvalues, sign counts and a stability label for an equilibrium.

    Boundary equilibria use the block-triangular structure of the Jacobian
    (rows of absent species are diagonal).  Interior equilibria use the
    cubic and are cross-checked against the Routh-Hurwitz conditions.
    """
    k = _kin(p, k)
    J = jacobian_reduced(p, k, e.x)
    ev = _block_eigenvalues(p, k, e)
    n_pos, n_neg, n_zero, cls = _classify_eigs(ev, tol)
    lab = e.pattern.label
    details = {}
    rh_stable = None
    if lab == "111":
        a2, a1, a0 = rh_coefficients_interior(p, k, e.x)
        coeffs = (a2, a1, a0)
        rh_stable = bool(a2 > 0 and a0 > 0 and a2 * a1 > a0)
        details["hopf_f"] = a2 * a1 - a0
        if n_zero == 0 and rh_stable != (n_pos == 0):
            details["rh_disagreement"] = True
    elif lab in ("101", "011", "110"):
        q = quadratic_coefficients(p, k, e)
        coeffs = (q["a1"], q["a0"])
        details.update(q)
        block_stable = q["a1"] > 0 and q["a0"] > 0
        rh_stable = bool(block_stable and q["transverse"] < 0)
        if lab == "110":
            details["alpha_exceeds_mu2"] = bool(q["transverse"] < 0)
            details["a0_positive"] = bool(q["a0"] > 0)
    else:
        coeffs = char_coefficients(J)
    return StabilityReport(ev, n_pos, n_neg, n_zero, cls, coeffs, rh_stable, details)


def eigen_signature(p, k, e: Equilibrium, tol: float = HYPERBOLIC_TOL) -> tuple[int, int]:
    """(number of eigenvalues with Re > 0, number with Re < 0)."""
    r = classify(p, k, e, tol)
    if r.n_zero:
        raise ChlorostatError(f"{e.name} is nonhyperbolic; eigen-signature undefined")
    return r.n_pos, r.n_neg
