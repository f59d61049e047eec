"""Model parameters, dimensional scaling and growth kinetics.

The dimensionless system uses three specific growth rates:

    mu0(s0, s2) = s0/(1+s0) * s2/(K_P+s2)          chlorophenol degrader
    mu1(s1, s2) = phi1 * s1/(1+s1) * 1/(1+K_I s2)  phenol degrader
    mu2(s2)     = phi2 * s2/(1+s2)                 methanogen

``MonodKinetics`` implements these with analytic derivatives up to third
order.  ``GrowthKinetics`` is the abstract interface; its default methods
fall back to bisection and finite differences so that other rate laws
only need to supply the three rates and their first partials.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InvalidParameterError, NoPreimageError

# molar masses used in the stoichiometric ratios (chlorophenol, phenol)
_M_CH = 208.0
_M_PH = 224.0


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters of the reduced and full systems."""

    alpha: float
    u_f: float
    u_g: float
    u_h: float
    omega0: float
    omega1: float
    omega2: float
    phi1: float
    phi2: float
    K_P: float
    K_I: float
    k_A: float = 0.0
    k_B: float = 0.0
    k_C: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise InvalidParameterError(f"{f.name} must be a real number, got {v!r}")
            if not math.isfinite(v):
                raise InvalidParameterError(f"{f.name} must be finite, got {v}")
            object.__setattr__(self, f.name, v)
        for name in ("omega0", "omega1", "omega2", "phi1", "phi2", "K_P", "K_I"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be positive")
        for name in ("alpha", "u_f", "u_g", "u_h", "k_A", "k_B", "k_C"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be non-negative")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class UnscaledParams:
    """Dimensional chemostat parameters (rates per day, concentrations in kg COD/m^3)."""

    D: float
    S_ch_in: float
    S_ph_in: float
    S_H2_in: float
    k_m_ch: float
    k_m_ph: float
    k_m_H2: float
    K_S_ch: float
    K_S_ph: float
    K_S_H2: float
    K_S_H2_c: float
    Y_ch: float
    Y_ph: float
    Y_H2: float
    K_I_H2: float
    k_dec_ch: float = 0.0
    k_dec_ph: float = 0.0
    k_dec_H2: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            object.__setattr__(self, f.name, v)
            if not math.isfinite(v):
                raise InvalidParameterError(f"{f.name} must be finite")
            if f.name.startswith("k_dec"):
                if v < 0:
                    raise InvalidParameterError(f"{f.name} must be non-negative")
            elif f.name.startswith("Y_"):
                if not 0 < v < 1:
                    raise InvalidParameterError(f"{f.name} must lie in (0, 1)")
            elif v <= 0:
                raise InvalidParameterError(f"{f.name} must be positive")


def scale_parameters(u: UnscaledParams) -> ModelParams:
    """Map dimensional parameters to the dimensionless ``ModelParams``."""
    rate = u.k_m_ch * u.Y_ch
    with np.errstate(all="raise"):
        try:
            vals = dict(
                alpha=u.D / rate,
                u_f=u.S_ch_in / u.K_S_ch,
                u_g=u.S_ph_in / u.K_S_ph,
                u_h=u.S_H2_in / u.K_S_H2,
                omega0=(u.K_S_ch / u.K_S_ph) * (_M_PH / _M_CH) * (1 - u.Y_ch),
                omega1=(u.K_S_ph / u.K_S_H2) * (32.0 / _M_PH) * (1 - u.Y_ph),
                omega2=(16.0 / _M_CH) * (u.K_S_ch / u.K_S_H2),
                phi1=u.k_m_ph * u.Y_ph / rate,
                phi2=u.k_m_H2 * u.Y_H2 / rate,
                K_P=u.K_S_H2_c / u.K_S_H2,
                K_I=u.K_S_H2 / u.K_I_H2,
                k_A=u.k_dec_ch / rate,
                k_B=u.k_dec_ph / rate,
                k_C=u.k_dec_H2 / rate,
            )
        except (ZeroDivisionError, FloatingPointError) as exc:
            raise InvalidParameterError(f"scaling failed: {exc}") from exc
    return ModelParams(**vals)


class GrowthPartials(NamedTuple):
    d0_s0: float
    d0_s2: float
    d1_s1: float
    d1_s2: float
    d2_s2: float


def _check_domain(*s):
    for v in s:
        if not v >= 0 or not math.isfinite(v):
            raise DomainError(f"substrate concentrations must be finite and >= 0, got {s}")


class GrowthKinetics(ABC):
    """Evaluation interface for the three specific growth rates."""

    phi2: float  # supremum of mu2, used to bound the inverse

    @abstractmethod
    def mu0(self, s0: float, s2: float) -> float: ...

    @abstractmethod
    def mu1(self, s1: float, s2: float) -> float: ...

    @abstractmethod
    def mu2(self, s2: float) -> float: ...

    @abstractmethod
    def partials(self, s0: float, s1: float, s2: float) -> GrowthPartials: ...

    def rates(self, s0, s1, s2):
        return self.mu0(s0, s2), self.mu1(s1, s2), self.mu2(s2)

    def mu2_inv(self, alpha: float) -> float:
        """Preimage of ``alpha`` on the increasing branch of mu2 (bisection)."""
        if not 0 < alpha < self.phi2:
            raise NoPreimageError(f"mu2 has no preimage for alpha={alpha}")
        hi = 1.0
        while self.mu2(hi) < alpha:
            hi *= 2.0
            if hi > 1e300:
                raise NoPreimageError(f"mu2 has no preimage for alpha={alpha}")
        return bisect_increasing(self.mu2, alpha, 0.0, hi)

    def mu0_inv_s0(self, alpha, s2):
        """s0 with mu0(s0, s2) = alpha, or None if alpha is out of reach."""
        return _invert_unbounded(lambda s: self.mu0(s, s2), alpha)

    def mu1_inv_s1(self, alpha, s2):
        return _invert_unbounded(lambda s: self.mu1(s, s2), alpha)

    def mu0_inv_s2(self, alpha, s0):
        return _invert_unbounded(lambda s: self.mu0(s0, s), alpha)

    def gradients(self, s):
        """Gradients of (mu0, mu1, mu2) w.r.t. (s0, s1, s2) as a 3x3 array."""
        d = self.partials(*s)
        return np.array([[d.d0_s0, 0.0, d.d0_s2],
                         [0.0, d.d1_s1, d.d1_s2],
                         [0.0, 0.0, d.d2_s2]])

    def derivative_tensors(self, s):
        """(gradient, Hessian, third-derivative) arrays for the three rates.

        Shapes (3,3), (3,3,3), (3,3,3,3); the leading index selects the rate.
        Default: central differences of the analytic gradient.
        """
        s = np.asarray(s, dtype=float)

        def hess(x, h=1e-5):
            out = np.zeros((3, 3, 3))
            for j in range(3):
                e = np.zeros(3)
                e[j] = h * max(1.0, abs(x[j]))
                out[:, :, j] = (self.gradients(x + e) - self.gradients(x - e)) / (2 * e[j])
            return out

        G = self.gradients(s)
        H = hess(s)
        T = np.zeros((3, 3, 3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1e-4 * max(1.0, abs(s[k]))
            T[:, :, :, k] = (hess(s + e) - hess(s - e)) / (2 * e[k])
        return G, H, T


def bisect_increasing(fn, target, lo, hi, rtol=1e-15, maxit=300):
    """Solve fn(x) = target for nondecreasing fn on [lo, hi] by bisection."""
    flo = fn(lo) - target
    fhi = fn(hi) - target
    if flo > 0 or fhi < 0:
        raise NoPreimageError("target not bracketed")
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * abs(hi):
            break
    return 0.5 * (lo + hi)


def _invert_unbounded(fn, target):
    hi = 1.0
    while fn(hi) < target:
        hi *= 2.0
        if hi > 1e200:
            return None
    return bisect_increasing(fn, target, 0.0, hi)


# derivatives (orders 0..3) of the one-dimensional Monod factors
def _sat(s, K=1.0):
    d = K + s
    return (s / d, K / d**2, -2 * K / d**3, 6 * K / d**4)


def _inh(s, KI):
    d = 1 + KI * s
    return (1 / d, -KI / d**2, 2 * KI**2 / d**3, -6 * KI**3 / d**4)


_ONE = (1.0, 0.0, 0.0, 0.0)


class MonodKinetics(GrowthKinetics):
    """Double-Monod growth with hydrogen inhibition of the phenol degrader."""

    def __init__(self, phi1, phi2, K_P, K_I):
        self.phi1 = float(phi1)
        self.phi2 = float(phi2)
        self.K_P = float(K_P)
        self.K_I = float(K_I)

    @classmethod
    def from_params(cls, p: ModelParams) -> "MonodKinetics":
        return cls(p.phi1, p.phi2, p.K_P, p.K_I)

    def __repr__(self):
        return (f"MonodKinetics(phi1={self.phi1!r}, phi2={self.phi2!r}, "
                f"K_P={self.K_P!r}, K_I={self.K_I!r})")

    def mu0(self, s0, s2):
        return s0 / (1 + s0) * s2 / (self.K_P + s2)

    def mu1(self, s1, s2):
        return self.phi1 * s1 / (1 + s1) / (1 + self.K_I * s2)

    def mu2(self, s2):
        return self.phi2 * s2 / (1 + s2)

    def rates(self, s0, s1, s2):
        return (s0 / (1 + s0) * s2 / (self.K_P + s2),
                self.phi1 * s1 / (1 + s1) / (1 + self.K_I * s2),
                self.phi2 * s2 / (1 + s2))

    def partials(self, s0, s1, s2):
        KP, KI, p1 = self.K_P, self.K_I, self.phi1
        g0 = s0 / (1 + s0)
        h0 = s2 / (KP + s2)
        g1 = s1 / (1 + s1)
        k1 = 1 / (1 + KI * s2)
        return GrowthPartials(
            h0 / (1 + s0) ** 2,
            g0 * KP / (KP + s2) ** 2,
            p1 * k1 / (1 + s1) ** 2,
            -p1 * g1 * KI * k1 * k1,
            self.phi2 / (1 + s2) ** 2,
        )

    def mu2_inv(self, alpha):
        if not 0 < alpha < self.phi2:
            raise NoPreimageError(f"mu2 has no preimage for alpha={alpha} (phi2={self.phi2})")
        return alpha / (self.phi2 - alpha)

    def mu0_inv_s0(self, alpha, s2):
        r = alpha * (self.K_P + s2) / s2 if s2 > 0 else math.inf
        return r / (1 - r) if r < 1 else None

    def mu1_inv_s1(self, alpha, s2):
        r = alpha * (1 + self.K_I * s2) / self.phi1
        return r / (1 - r) if r < 1 else None

    def mu0_inv_s2(self, alpha, s0):
        g = s0 / (1 + s0)
        return alpha * self.K_P / (g - alpha) if g > alpha else None

    def derivative_tensors(self, s):
        s0, s1, s2 = (float(v) for v in s)
        # each rate is c * A(s_a) * B(s_b); products of 1-D factor derivatives
        factors = (
            (1.0, 0, _sat(s0), 2, _sat(s2, self.K_P)),
            (self.phi1, 1, _sat(s1), 2, _inh(s2, self.K_I)),
            (self.phi2, None, _ONE, 2, _sat(s2)),
        )
        G = np.zeros((3, 3))
        H = np.zeros((3, 3, 3))
        T = np.zeros((3, 3, 3, 3))
        for i, (c, ia, A, ib, B) in enumerate(factors):
            for order, arr in ((1, G[i]), (2, H[i]), (3, T[i])):
                for combo in itertools.product(range(3), repeat=order):
                    n = sum(q == ia for q in combo) if ia is not None else 0
                    m = sum(q == ib for q in combo)
                    if n + m == order:
                        arr[combo] = c * A[n] * B[m]
        return G, H, T


def default_kinetics(p: ModelParams) -> MonodKinetics:
    return MonodKinetics.from_params(p)


def eval_growth(k: GrowthKinetics, s0, s1, s2):
    """(mu0, mu1, mu2) at non-negative substrate levels."""
    _check_domain(s0, s1, s2)
    return k.rates(s0, s1, s2)


def eval_growth_partials(k: GrowthKinetics, s0, s1, s2) -> GrowthPartials:
    _check_domain(s0, s1, s2)
    return k.partials(s0, s1, s2)


def mu2_inverse(k: GrowthKinetics, alpha: float) -> float:
    return k.mu2_inv(alpha)
