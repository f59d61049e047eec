"""Time integration of the full system.

The reduced system is badly conditioned for direct integration (s2 is a
small difference of terms of size omega1 * x1), so reduced initial data
are lifted and the six-dimensional system is integrated instead; its
x-components are the reduced trajectory.

Integration starts with the explicit Dormand-Prince pair (RK45).  Two
monitors decide when to switch to LSODA with the analytic Jacobian:
more than half of the last 20 step attempts rejected, or the
Hairer-style stiffness estimate h*rho >= 3.25 on 15 accepted steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import LSODA, RK45

from ..errors import IntegrationFailure
from ..kinetics import default_kinetics
from ..model import jacobian_full, lift, residual_conservation

STIFF_HRHO = 3.25
STIFF_COUNT = 15
REJECT_WINDOW = 20


def _kin(p, k):
    return default_kinetics(p) if k is None else k


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # rows of (x0, x1, x2, s0, s1, s2)
    diagnostics: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return self.y[:, :3]

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    def __len__(self):
        return len(self.t)


def make_system(p, k):
    """(fun, jac) closures for the solvers; substrates are clipped at zero."""
    k = _kin(p, k)
    a, uf, ug, uh = p.alpha, p.u_f, p.u_g, p.u_h
    w0, w1, w2 = p.omega0, p.omega1, p.omega2
    kA, kB, kC = p.k_A, p.k_B, p.k_C
    rates = k.rates

    def fun(t, y):
        x0, x1, x2, s0, s1, s2 = y
        m0, m1, m2 = rates(s0 if s0 > 0 else 0.0, s1 if s1 > 0 else 0.0, s2 if s2 > 0 else 0.0)
        r0 = m0 * x0
        r1 = m1 * x1
        r2 = m2 * x2
        return np.array([r0 - (a + kA) * x0, r1 - (a + kB) * x1, r2 - (a + kC) * x2,
                         a * (uf - s0) - r0,
                         a * (ug - s1) + w0 * r0 - r1,
                         a * (uh - s2) - w2 * r0 + w1 * r1 - r2])

    def jac(t, y):
        return jacobian_full(p, k, y)

    return fun, jac


def as_full_state(p, y0) -> np.ndarray:
    y0 = np.asarray(y0, dtype=float)
    if y0.shape == (3,):
        return lift(p, y0)
    if y0.shape != (6,):
        raise ValueError("initial state must have 3 (reduced) or 6 (full) components")
    if not np.all(np.isfinite(y0)) or (y0 < 0).any():
        raise ValueError("initial state must be finite and non-negative")
    return y0.copy()


def _stage6_rho(solver, y_old, h):
    """Stiffness estimate rho ~ |f(y7) - f(y6)| / |y7 - y6| from the last RK45 step."""
    K = solver.K
    y6 = y_old + h * (solver.A[5, :5] @ K[:5])
    dy = np.linalg.norm(solver.y - y6)
    if dy == 0:
        return 0.0
    return float(np.linalg.norm(K[6] - K[5]) / dy)


def integrate(p, k, y0, t_end, tol: float = 1e-8, method: str = "auto",
              observer=None, record: bool = True, max_steps: int = 5_000_000,
              atol_scale: float = 1e-4) -> Trajectory:
    """Integrate from ``y0`` (reduced or full state) over [0, t_end].

    ``tol`` is the relative local error tolerance; the absolute tolerance
    is ``tol * atol_scale``.  ``observer(t_old, t, y, solver)`` is called
    after every accepted step and may return True to stop early.
    ``method`` is ``auto`` (RK45 with stiffness switch), ``rk45`` or
    ``lsoda``.
    """
    k = _kin(p, k)
    y = as_full_state(p, y0)
    fun, jac = make_system(p, k)
    ts = [0.0]
    ys = [y.copy()]
    diag = {"steps": 0, "rejected": 0, "method": [], "switched_at": None,
            "stopped_early": False, "tol": tol}
    if t_end <= 0:
        diag["method"] = []
        return Trajectory(np.array(ts), np.array(ys), diag | {"min_component": float(y.min()),
                                                              "max_residual": _resid(p, ys)})
    atol = tol * atol_scale
    use_lsoda = method == "lsoda"
    if method not in ("auto", "rk45", "lsoda"):
        raise ValueError(f"unknown method {method!r}")
    t = 0.0
    if not use_lsoda:
        solver = RK45(fun, 0.0, y, t_end, rtol=tol, atol=atol)
        diag["method"].append("rk45")
        attempts = []
        n_stiff = n_nonstiff = 0
        while solver.status == "running":
            y_old = solver.y.copy()
            t_old = solver.t
            nfev0 = solver.nfev
            msg = solver.step()
            if solver.status == "failed":
                raise IntegrationFailure(f"RK45 failed at t={t_old}: {msg}",
                                         Trajectory(np.array(ts), np.array(ys), diag))
            n_att = max(1, round((solver.nfev - nfev0) / 6))
            rej = n_att - 1
            diag["steps"] += 1
            diag["rejected"] += rej
            attempts.extend([1] * rej + [0])
            attempts = attempts[-REJECT_WINDOW:]
            h = solver.t - t_old
            hr = h * _stage6_rho(solver, y_old, h)
            if hr >= STIFF_HRHO:
                n_stiff += 1
                n_nonstiff = 0
            else:
                n_nonstiff += 1
                if n_nonstiff >= 6:
                    n_stiff = 0
            if record:
                ts.append(solver.t)
                ys.append(solver.y.copy())
            if observer is not None and observer(t_old, solver.t, solver.y, solver):
                diag["stopped_early"] = True
                break
            if diag["steps"] >= max_steps:
                raise IntegrationFailure("step limit reached", Trajectory(np.array(ts), np.array(ys), diag))
            if method == "auto" and solver.status == "running" and (
                    (len(attempts) >= REJECT_WINDOW and sum(attempts) > REJECT_WINDOW / 2)
                    or n_stiff >= STIFF_COUNT):
                use_lsoda = True
                diag["switched_at"] = solver.t
                break
        t, y = solver.t, solver.y.copy()
    if use_lsoda and not diag["stopped_early"] and t < t_end:
        # species absent at the start stay absent; decoupling them in the Newton
        # matrix keeps the LU solves from leaking roundoff into those components
        absent = [i for i in range(3) if y[i] == 0.0]
        if absent:
            full_jac = jac

            def jac(t, y):
                J = full_jac(t, y)
                J[absent, :] = 0.0
                J[:, absent] = 0.0
                return J

        solver = LSODA(fun, t, y, t_end, rtol=tol, atol=atol, jac=jac)
        diag["method"].append("lsoda")
        while solver.status == "running":
            t_old = solver.t
            msg = solver.step()
            if solver.status == "failed":
                raise IntegrationFailure(f"LSODA failed at t={t_old}: {msg}",
                                         Trajectory(np.array(ts), np.array(ys), diag))
            diag["steps"] += 1
            if record:
                ts.append(solver.t)
                ys.append(solver.y.copy())
            if observer is not None and observer(t_old, solver.t, solver.y, solver):
                diag["stopped_early"] = True
                break
            if diag["steps"] >= max_steps:
                raise IntegrationFailure("step limit reached", Trajectory(np.array(ts), np.array(ys), diag))
        t, y = solver.t, solver.y.copy()
    if not record:
        ts.append(t)
        ys.append(y)
    Y = np.array(ys)
    diag["min_component"] = float(Y.min())
    diag["max_residual"] = _resid(p, ys[-1:])
    return Trajectory(np.array(ts), Y, diag)


def _resid(p, ys):
    return float(max(np.abs(residual_conservation(p, y)).max() for y in ys))
