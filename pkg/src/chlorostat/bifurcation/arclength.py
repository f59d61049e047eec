"""Pseudo-arclength continuation of F(z) = 0, F: R^(n+1) -> R^n.

All vectors are in caller-scaled coordinates, so one step length applies
uniformly to every component.  Test functions are evaluated at each
accepted point; their zeros are located afterwards on the chord between
two bracketing points with ``locate_zero``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

H_INIT = 1e-3
H_MIN = 1e-9
H_MAX = 2e-2
NEWTON_TOL = 1e-11
NEWTON_MAXIT = 12


def tangent(DFz, prev=None):
    """Unit null vector of the n x (n+1) matrix DFz, oriented along ``prev``."""
    _, _, vt = np.linalg.svd(DFz)
    t = vt[-1]
    if prev is not None and t @ prev < 0:
        t = -t
    return t / np.linalg.norm(t)


def correct(F, DF, z_pred, d, tol=NEWTON_TOL, maxit=NEWTON_MAXIT):
    """Newton on F(z) = 0 restricted to the hyperplane d.(z - z_pred) = 0."""
    z = z_pred.copy()
    for _ in range(maxit):
        Fz = F(z)
        if not np.all(np.isfinite(Fz)):
            return None
        A = np.vstack([DF(z), d])
        rhs = -np.append(Fz, d @ (z - z_pred))
        try:
            dz = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            return None
        z = z + dz
        if np.linalg.norm(dz) <= tol * max(1.0, np.linalg.norm(z)):
            if np.abs(F(z)).max() <= 1e-8:
                return z
    return None


@dataclass
class Curve:
    z: list = field(default_factory=list)
    tangents: list = field(default_factory=list)
    tests: list = field(default_factory=list)
    stop_reason: str = ""
    boundary: str | None = None


def trace(F, DF, z0, t0, slack, tests, h0=H_INIT, h_min=H_MIN, h_max=H_MAX, max_steps=20000):
    """Follow the solution curve from z0 in direction t0.

    ``slack(z)`` returns (value, name) with value < 0 outside the domain;
    the crossing is located and appended as the last point.  ``tests(z)``
    returns a 1-D array of test-function values recorded per point.
    """
    cur = Curve()
    z = np.asarray(z0, dtype=float)
    t = tangent(DF(z), t0)
    cur.z.append(z)
    cur.tangents.append(t)
    cur.tests.append(tests(z))
    h = h0
    for _ in range(max_steps):
        z_new = correct(F, DF, z + h * t, t)
        if z_new is not None:
            t_new = tangent(DF(z_new), t)
            step = np.linalg.norm(z_new - z)
            # reject jumps to another branch and sharp turns
            if t_new @ t < 0.9 or step > 2 * h:
                z_new = None
        if z_new is None:
            h *= 0.5
            if h < h_min:
                cur.stop_reason = "step-collapse"
                return cur
            continue
        val, name = slack(z_new)
        if val < 0:
            v0, _ = slack(z)
            zb = locate_zero(F, DF, z, z_new, lambda q: slack(q)[0], v0, val)
            if zb is not None:
                cur.z.append(zb)
                cur.tangents.append(tangent(DF(zb), t))
                cur.tests.append(tests(zb))
            cur.stop_reason = "left-domain"
            cur.boundary = name
            return cur
        cur.z.append(z_new)
        cur.tangents.append(t_new)
        cur.tests.append(tests(z_new))
        z, t = z_new, t_new
        h = min(h * 1.5, h_max)
    cur.stop_reason = "max-steps"
    return cur


def locate_zero(F, DF, za, zb, g, ga=None, gb=None, xtol=1e-14):
    """Zero of g on the solution curve between za and zb (chord parameterisation)."""
    d = zb - za
    nd = np.linalg.norm(d)
    if nd == 0:
        return za.copy()
    u = d / nd
    cache = {}

    def point(s):
        if s not in cache:
            if s == 0.0:
                cache[s] = za
            elif s == 1.0:
                cache[s] = zb
            else:
                cache[s] = correct(F, DF, za + s * d, u)
        return cache[s]

    def gs(s):
        q = point(s)
        if q is None:
            raise ArithmeticError
        return g(q)

    ga = gs(0.0) if ga is None else ga
    gb = gs(1.0) if gb is None else gb
    if ga == 0:
        return za.copy()
    if gb == 0:
        return zb.copy()
    if ga * gb > 0:
        return None
    try:
        s = brentq(gs, 0.0, 1.0, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ArithmeticError, ValueError, RuntimeError):
        return None
    return point(s)
