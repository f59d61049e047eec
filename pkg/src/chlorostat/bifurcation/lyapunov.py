"""First Lyapunov coefficient at a Hopf point of the interior equilibrium.

Projection formula on the two-dimensional centre manifold:

    l1 = Re[ <p, C(q,q,qb)> - 2 <p, B(q, A^-1 B(q,qb))>
             + <p, B(qb, (2 i w I - A)^-1 B(q,q))> ] / (2 w)

with A q = i w q, A^T p = -i w p and <p, q> = 1.  B and C are the
second and third derivatives of the reduced vector field, built exactly
from the derivative tensors of the growth rates.
"""

from __future__ import annotations

import numpy as np

from ..errors import NotOnLocusError
from ..equilibria import eq_111
from ..kinetics import default_kinetics
from ..model import OmegaRegion, substrates
from ..stability import jacobian_reduced, rh_coefficients_interior


def _kin(p, k):
    return default_kinetics(p) if k is None else k


def multilinear_forms(p, k, x):
    """Second and third derivative tensors of the reduced vector field at x.

    Component i is F_i = x_i (mu_i(s) - alpha) with s = c + M x, so
    d2F_i/dx_j dx_k = delta_ij G_ik + delta_ik G_ij + x_i H_ijk, where G
    and H are gradients and Hessians of mu_i in x.
    """
    k = _kin(p, k)
    x = np.asarray(x, dtype=float)
    M = OmegaRegion(p).matrix
    s = np.maximum(substrates(p, x), 0.0)
    Gs, Hs, Ts = k.derivative_tensors(s)
    Gx = Gs @ M
    Hx = np.einsum("iab,aj,bk->ijk", Hs, M, M)
    Tx = np.einsum("iabc,aj,bk,cl->ijkl", Ts, M, M, M)
    eye = np.eye(3)
    B = (np.einsum("ij,ik->ijk", eye, Gx) + np.einsum("ik,ij->ijk", eye, Gx)
         + x[:, None, None] * Hx)
    C = (np.einsum("ij,ikl->ijkl", eye, Hx) + np.einsum("ik,ijl->ijkl", eye, Hx)
         + np.einsum("il,ijk->ijkl", eye, Hx) + x[:, None, None, None] * Tx)
    return B, C


def first_lyapunov(A, B, C):
    """l1 and the frequency for Jacobian A with multilinear tensors B, C."""
    ev, V = np.linalg.eig(A)
    i = int(np.argmax(ev.imag))
    w = ev[i].imag
    if w <= 0:
        raise NotOnLocusError("Jacobian has no complex pair")
    q = V[:, i]
    evl, W = np.linalg.eig(A.T)
    j = int(np.argmin(np.abs(evl + 1j * w)))
    pv = W[:, j]
    pv = pv / np.conj(np.vdot(pv, q))

    def Bf(u, v):
        return np.einsum("ijk,j,k->i", B, u, v)

    def Cf(u, v, z):
        return np.einsum("ijkl,j,k,l->i", C, u, v, z)

    qb = q.conj()
    h11 = np.linalg.solve(A, Bf(q, qb))
    h20 = np.linalg.solve(2j * w * np.eye(3) - A, Bf(q, q))
    val = np.vdot(pv, Cf(q, q, qb)) - 2 * np.vdot(pv, Bf(q, h11)) + np.vdot(pv, Bf(qb, h20))
    return float(val.real / (2 * w)), float(w)


def lyapunov_coefficient_l1(p, k=None, tol: float = 1e-8, check: bool = True, x=None):
    """Signed first Lyapunov coefficient at the interior equilibrium.

    Negative means supercritical (a stable cycle branches off).  With
    ``check`` the point must lie on the Hopf locus: a1 > 0 and
    |a2 a1 - a0| <= tol * a2 a1.
    """
    k = _kin(p, k)
    if x is None:
        e = eq_111(p, k)
        if e is None:
            raise NotOnLocusError("no interior equilibrium")
        x = e.x
    a2, a1, a0 = rh_coefficients_interior(p, k, x)
    if check and not (a1 > 0 and abs(a2 * a1 - a0) <= tol * max(abs(a2 * a1), 1e-300)):
        raise NotOnLocusError(f"not on the Hopf locus: a2*a1-a0={a2 * a1 - a0:.3e}, a1={a1:.3e}")
    A = jacobian_reduced(p, k, x)
    B, C = multilinear_forms(p, k, x)
    l1, _ = first_lyapunov(A, B, C)
    return l1
