"""Vector fields of the full and reduced systems and the region Omega.

Full state ordering is ``(x0, x1, x2, s0, s1, s2)``; reduced state is
``(x0, x1, x2)``.  With zero decay rates the substrates relax onto the
affine set

    s0 = u_f - x0
    s1 = u_g + omega0 x0 - x1
    s2 = u_h - omega2 x0 + omega1 x1 - x2

and the biomass equations close on themselves (the reduced system).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RegionViolation
from .kinetics import GrowthKinetics, ModelParams, default_kinetics

CLIP_TOL = 1e-12
VIOLATION_TOL = 1e-8


def _kin(p, k):
    return default_kinetics(p) if k is None else k


def substrates(p: ModelParams, x) -> np.ndarray:
    """Substrate levels implied by the conservation laws (unclipped)."""
    x0, x1, x2 = x
    return np.array([
        p.u_f - x0,
        p.u_g + p.omega0 * x0 - x1,
        p.u_h - p.omega2 * x0 + p.omega1 * x1 - x2,
    ])


def lift(p: ModelParams, x, tol: float = VIOLATION_TOL) -> np.ndarray:
    """Reduced state -> full state on Omega."""
    x = np.asarray(x, dtype=float)
    s = substrates(p, x)
    if (s < -tol).any() or (x < -tol).any():
        raise RegionViolation(f"state {x.tolist()} lies outside Omega (substrates {s.tolist()})")
    return np.concatenate([x, s])


def project(y) -> np.ndarray:
    return np.asarray(y, dtype=float)[:3].copy()


def residual_conservation(p: ModelParams, y) -> np.ndarray:
    """Distance of a full state from Omega along the three conservation laws."""
    x0, x1, x2, s0, s1, s2 = y
    w0, w1, w2 = p.omega0, p.omega1, p.omega2
    return np.array([
        x0 + s0 - p.u_f,
        x1 + w0 * s0 + s1 - w0 * p.u_f - p.u_g,
        w2 * x0 + x2 + w0 * w1 * s0 + w1 * s1 + s2 - w0 * w1 * p.u_f - w1 * p.u_g - p.u_h,
    ])


@dataclass(frozen=True)
class OmegaRegion:
    """Omega as a set in reduced coordinates: x >= 0 and implied substrates >= 0."""

    p: ModelParams

    @property
    def matrix(self) -> np.ndarray:
        """M with substrates = offset + M x."""
        p = self.p
        return np.array([[-1.0, 0.0, 0.0],
                         [p.omega0, -1.0, 0.0],
                         [-p.omega2, p.omega1, -1.0]])

    @property
    def offset(self) -> np.ndarray:
        return np.array([self.p.u_f, self.p.u_g, self.p.u_h])

    def substrates(self, x):
        return substrates(self.p, x)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool((x >= -tol).all() and (self.substrates(x) >= -tol).all())

    def bounds(self) -> np.ndarray:
        """Upper bounds of x0, x1, x2 over Omega (used as natural scales)."""
        p = self.p
        b0 = p.u_f
        b1 = p.u_g + p.omega0 * b0
        b2 = p.u_h + p.omega1 * b1
        return np.array([b0, b1, b2])

    def slack(self, x) -> float:
        """Smallest of the six defining inequalities (negative outside)."""
        x = np.asarray(x, dtype=float)
        return float(min(x.min(), self.substrates(x).min()))


def rhs_full(p: ModelParams, k: GrowthKinetics | None, y) -> np.ndarray:
    """Right-hand side of the six-dimensional system including decay terms.

    Substrates are clipped at zero before the kinetics are evaluated, so
    integrators may overshoot slightly without producing nonsense rates.
    """
    k = _kin(p, k)
    x0, x1, x2, s0, s1, s2 = (float(v) for v in y)
    m0, m1, m2 = k.rates(max(s0, 0.0), max(s1, 0.0), max(s2, 0.0))
    a = p.alpha
    r0, r1, r2 = m0 * x0, m1 * x1, m2 * x2
    return np.array([
        r0 - (a + p.k_A) * x0,
        r1 - (a + p.k_B) * x1,
        r2 - (a + p.k_C) * x2,
        a * (p.u_f - s0) - r0,
        a * (p.u_g - s1) + p.omega0 * r0 - r1,
        a * (p.u_h - s2) - p.omega2 * r0 + p.omega1 * r1 - r2,
    ])


def clipped_substrates(p, x, strict=True):
    s = substrates(p, x)
    if strict and s.min() < -VIOLATION_TOL:
        raise RegionViolation(f"substrates {s.tolist()} negative beyond {VIOLATION_TOL}")
    return np.maximum(s, 0.0)


def rhs_reduced(p: ModelParams, k: GrowthKinetics | None, x, strict: bool = True) -> np.ndarray:
    """Right-hand side of the reduced system on Omega.

    With ``strict`` a substrate more negative than 1e-8 raises
    ``RegionViolation``; otherwise it is silently clipped.
    """
    k = _kin(p, k)
    s0, s1, s2 = clipped_substrates(p, x, strict)
    m = k.rates(s0, s1, s2)
    a = p.alpha
    return np.array([(m[0] - a) * x[0], (m[1] - a) * x[1], (m[2] - a) * x[2]])


def jacobian_full(p: ModelParams, k: GrowthKinetics | None, y) -> np.ndarray:
    """Analytic 6x6 Jacobian of ``rhs_full`` (substrates clipped at zero)."""
    k = _kin(p, k)
    x0, x1, x2, s0, s1, s2 = (float(v) for v in y)
    s0, s1, s2 = max(s0, 0.0), max(s1, 0.0), max(s2, 0.0)
    m0, m1, m2 = k.rates(s0, s1, s2)
    d00, d02, d11, d12, d22 = k.partials(s0, s1, s2)
    a, w0, w1, w2 = p.alpha, p.omega0, p.omega1, p.omega2
    J = np.zeros((6, 6))
    J[0, 0] = m0 - a - p.k_A
    J[0, 3] = d00 * x0
    J[0, 5] = d02 * x0
    J[1, 1] = m1 - a - p.k_B
    J[1, 4] = d11 * x1
    J[1, 5] = d12 * x1
    J[2, 2] = m2 - a - p.k_C
    J[2, 5] = d22 * x2
    J[3, 0] = -m0
    J[3, 3] = -a - d00 * x0
    J[3, 5] = -d02 * x0
    J[4, 0] = w0 * m0
    J[4, 1] = -m1
    J[4, 3] = w0 * d00 * x0
    J[4, 4] = -a - d11 * x1
    J[4, 5] = w0 * d02 * x0 - d12 * x1
    J[5, 0] = -w2 * m0
    J[5, 1] = w1 * m1
    J[5, 2] = -m2
    J[5, 3] = -w2 * d00 * x0
    J[5, 4] = w1 * d11 * x1
    J[5, 5] = -a - w2 * d02 * x0 + w1 * d12 * x1 - d22 * x2
    return J
