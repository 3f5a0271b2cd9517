"""Geometric control machinery for the auxiliary linear system.

Given the canonical-form blocks (A_tilde, G, C_tilde, D_tilde) of a DAE,
this module computes

* the largest output-nulling ("weakly observable") subspace V*: initial
  states from which some input keeps the auxiliary output identically zero,
* a friend F_tilde, i.e. a feedback with (A_tilde + G F_tilde) V* within V*
  and (C_tilde + D_tilde F_tilde) V* = 0, and
* a full-column-rank matrix L whose image is ker D_tilde and the G-preimage
  of V*, parametrizing the residual input freedom.

The DAE's consistent trajectories live exactly on V*, which is what makes
the reduction to an ordinary linear system possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dae import CanonicalForm
from .errors import InternalConsistencyError
from .linalg import (
    DEFAULT_RANK_TOL,
    Subspace,
    image_basis,
    kernel_basis,
    numerical_rank,
    pseudoinverse,
)

FRIEND_DEFECT_TOL = 1e-9


def _system_scale(cf: CanonicalForm) -> float:
    """Magnitude of the auxiliary-system data, used to floor rank cut-offs
    so that blocks vanishing up to roundoff are treated as zero."""
    return max(
        1.0,
        float(np.linalg.norm(cf.A_tilde)) if cf.A_tilde.size else 0.0,
        float(np.linalg.norm(cf.G)) if cf.G.size else 0.0,
        float(np.linalg.norm(cf.C_tilde)) if cf.C_tilde.size else 0.0,
        float(np.linalg.norm(cf.D_tilde)) if cf.D_tilde.size else 0.0,
    )


def _zeroing_step(cf: CanonicalForm, V: Subspace, rank_tol: float) -> Subspace:
    """One step of the invariant-subspace iteration:
    {x : exists q with A_tilde x + G q in V and C_tilde x + D_tilde q = 0}."""
    r = cf.r
    Pp = V.perp_projector()
    top = np.hstack([Pp @ cf.A_tilde, Pp @ cf.G])
    bot = np.hstack([cf.C_tilde, cf.D_tilde])
    scale = _system_scale(cf)
    K = kernel_basis(np.vstack([top, bot]), rank_tol, scale=scale)
    return image_basis(K.basis[:r, :], rank_tol)


def weakly_observable_subspace(cf: CanonicalForm,
                               rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Largest output-nulling subspace of the auxiliary linear system.

    Runs the classical decreasing iteration V_0 = R^r,
    V_{k+1} = {x : exists q, A_tilde x + G q in V_k, C_tilde x + D_tilde q = 0}
    until the dimension stabilizes, which happens within r steps.  The
    result may be the zero subspace.
    """
    V = Subspace.full(cf.r)
    for _ in range(cf.r + 1):
        Vn = _zeroing_step(cf, V, rank_tol)
        if Vn.dim == V.dim:
            # fixed point: V_{k+1} is contained in V_k, so equal dimension
            # means equal subspace; keep the earlier basis (identity for
            # the full-space case).
            return V
        V = Vn
    raise InternalConsistencyError(
        "output-nulling iteration failed to stabilize within r steps"
    )


def friend(cf: CanonicalForm, V: Subspace,
           rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """A feedback F_tilde rendering V invariant with zero output on it.

    For each basis vector v of V the linear system

        (I - P_V)(A_tilde v + G u) = 0,   C_tilde v + D_tilde u = 0

    is solved for u by minimum-norm least squares; the feasibility residual
    is checked explicitly (failure indicates a tolerance problem, since V
    guarantees solvability).  Off V the friend acts as zero.
    """
    q_dim = cf.q_dim
    r = cf.r
    if V.dim == 0 or q_dim == 0:
        return np.zeros((q_dim, r))
    W = V.basis
    Pp = V.perp_projector()
    lhs = np.vstack([Pp @ cf.G, cf.D_tilde])
    rhs = -np.vstack([Pp @ cf.A_tilde @ W, cf.C_tilde @ W])
    U = pseudoinverse(lhs, rank_tol, scale=_system_scale(cf)) @ rhs
    resid = float(np.linalg.norm(lhs @ U - rhs))
    scale = 1.0 + float(np.linalg.norm(cf.A_tilde)) + float(np.linalg.norm(cf.G))
    if resid > FRIEND_DEFECT_TOL * scale:
        raise InternalConsistencyError(
            f"friend construction infeasible: residual {resid:.3e} "
            "(output-nulling subspace and feedback solve disagree)"
        )
    return U @ W.T


def input_kernel_matrix(cf: CanonicalForm, V: Subspace,
                        rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal L with Im L = ker D_tilde intersected with G^{-1}(V).

    The column count k may be zero.  G^{-1}(V) is computed as the kernel of
    (I - P_V) G.
    """
    stacked = np.vstack([cf.D_tilde, V.perp_projector() @ cf.G])
    return kernel_basis(stacked, rank_tol, scale=_system_scale(cf)).basis


@dataclass(frozen=True)
class OutputNullingData:
    """Bundle (V*, F_tilde, L) for one canonical form."""

    V: Subspace
    F_tilde: np.ndarray
    L: np.ndarray

    @property
    def k(self) -> int:
        return self.L.shape[1]

    def defects(self, cf: CanonicalForm) -> dict[str, float]:
        """Residuals of the defining conditions, for checks and reports."""
        W = self.V.basis
        Pp = self.V.perp_projector()
        Acl = cf.A_tilde + cf.G @ self.F_tilde
        out = cf.C_tilde + cf.D_tilde @ self.F_tilde
        return {
            "invariance": float(np.linalg.norm(Pp @ Acl @ W)),
            "output_zeroing": float(np.linalg.norm(out @ W)),
            "L_in_kernel": float(np.linalg.norm(cf.D_tilde @ self.L)),
            "GL_in_V": float(np.linalg.norm(Pp @ cf.G @ self.L)),
        }


def output_nulling(cf: CanonicalForm,
                   rank_tol: float = DEFAULT_RANK_TOL) -> OutputNullingData:
    """Compute (V*, F_tilde, L) and verify the defining identities."""
    V = weakly_observable_subspace(cf, rank_tol)
    F_tilde = friend(cf, V, rank_tol)
    L = input_kernel_matrix(cf, V, rank_tol)
    data = OutputNullingData(V=V, F_tilde=F_tilde, L=L)
    scale = 1.0 + float(np.linalg.norm(cf.A_tilde)) + float(np.linalg.norm(cf.G))
    for name, value in data.defects(cf).items():
        if value > FRIEND_DEFECT_TOL * scale:
            raise InternalConsistencyError(
                f"output-nulling identity '{name}' violated: defect {value:.3e}"
            )
    if numerical_rank(L, rank_tol) != data.k:
        raise InternalConsistencyError("L lost full column rank")
    return data
