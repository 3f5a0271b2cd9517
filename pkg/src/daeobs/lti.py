"""Reduction of a DAE to an ordinary linear system.

For  d(Ex)/dt = A_hat x + B_hat u  this module builds a linear system
(A_l, B_l, C_l, D_l) whose outputs, split as (x, u) = (C_s v + D_s g,
C_inp v + D_inp g), are exactly the DAE's trajectory pairs:

* the state space is the output-nulling subspace V* of the auxiliary
  system in canonical coordinates,
* the consistency space X = Im(E C_s) collects the values E x0 from which
  the DAE admits a solution on any horizon, and
* Lambda = (E C_s)^+ maps consistent initial data to the reduced state,
  with Lambda (E x(t)) = v(t) along every trajectory.

Structural identities enforced on every build: E D_s = 0,
rank(E C_s) = n_hat, Lambda (E C_s) = I, rank(D_l) = k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dae import CanonicalForm, DaeSystem, canonical_form
from .errors import ConsistencyError, InputError, InternalConsistencyError
from .geometric import OutputNullingData, output_nulling
from .linalg import (
    DEFAULT_RANK_TOL,
    Subspace,
    as_matrix,
    as_vector,
    image_basis,
    numerical_rank,
    pseudoinverse,
)
from .signals import SampledSignal, integrate_lti

BUILD_TOL = 1e-9


@dataclass(frozen=True)
class AssociatedLti:
    """The ordinary linear system parametrizing a DAE's trajectories."""

    A_l: np.ndarray
    B_l: np.ndarray
    C_l: np.ndarray
    D_l: np.ndarray
    C_s: np.ndarray
    C_inp: np.ndarray
    D_s: np.ndarray
    D_inp: np.ndarray
    X: Subspace
    Lambda: np.ndarray

    @property
    def n(self) -> int:
        return self.C_s.shape[0]

    @property
    def m(self) -> int:
        return self.C_inp.shape[0]

    @property
    def n_hat(self) -> int:
        return self.A_l.shape[0]

    @property
    def k(self) -> int:
        return self.D_l.shape[1]


@dataclass(frozen=True)
class ConstructionRecord:
    """Everything produced while reducing one DAE.

    Keeps the canonical form, subspace basis, friend and L alongside the
    final linear system so that two independent builds of the same DAE can
    be compared (they are always feedback equivalent).
    """

    sys: DaeSystem
    cf: CanonicalForm
    ond: OutputNullingData
    lti: AssociatedLti

    @property
    def V(self) -> Subspace:
        return self.ond.V


def _check(name: str, defect: float, scale: float, tol: float = BUILD_TOL):
    if defect > tol * (1.0 + scale):
        raise InternalConsistencyError(
            f"associated-system identity '{name}' violated: defect {defect:.3e}"
        )


def assemble(cf: CanonicalForm, ond: OutputNullingData,
             rank_tol: float = DEFAULT_RANK_TOL) -> ConstructionRecord:
    """Assemble the associated linear system from its ingredients.

    ``ond`` may come from :func:`daeobs.geometric.output_nulling` or carry
    any other legal basis/friend/L choice; all choices yield feedback-
    equivalent systems.
    """
    sys = cf.sys
    n, m, r = cf.n, cf.m, cf.r
    W = ond.V.basis
    n_hat = ond.V.dim
    F_tilde, L = ond.F_tilde, ond.L
    k = ond.k

    Acl = cf.A_tilde + cf.G @ F_tilde
    scale = 1.0 + float(np.linalg.norm(Acl))
    _check("(A + G F) V within V",
           float(np.linalg.norm(ond.V.perp_projector() @ Acl @ W)), scale)
    GL = cf.G @ L
    _check("G L within V", float(np.linalg.norm(ond.V.perp_projector() @ GL)),
           1.0 + float(np.linalg.norm(GL)))

    A_l = W.T @ Acl @ W
    B_l = W.T @ GL

    # Output map [x; u] = Cbar p + Dbar w in original coordinates:
    # Cbar = blkdiag(T, I_m) [I_r; F_tilde], Dbar = blkdiag(T, I_m) [0; L].
    stack_c = np.vstack([np.eye(r), F_tilde[: n - r, :]])
    C_bar = np.vstack([cf.T @ stack_c, F_tilde[n - r:, :]])
    stack_d = np.vstack([np.zeros((r, k)), L[: n - r, :]])
    D_bar = np.vstack([cf.T @ stack_d, L[n - r:, :]])

    C_l = C_bar @ W
    D_l = D_bar
    C_s, C_inp = C_l[:n, :], C_l[n:, :]
    D_s, D_inp = D_l[:n, :], D_l[n:, :]

    E = sys.E
    ECs = E @ C_s
    _check("E D_s = 0", float(np.linalg.norm(E @ D_s)),
           float(np.linalg.norm(E)))
    if numerical_rank(ECs, rank_tol) != n_hat:
        raise InternalConsistencyError(
            f"rank(E C_s) = {numerical_rank(ECs, rank_tol)} != n_hat = {n_hat}"
        )
    if numerical_rank(D_l, rank_tol) != k:
        raise InternalConsistencyError("rank(D_l) != k")
    Lambda = pseudoinverse(ECs, rank_tol)
    _check("Lambda (E C_s) = I",
           float(np.linalg.norm(Lambda @ ECs - np.eye(n_hat))), 1.0)
    X = image_basis(ECs, rank_tol)

    lti = AssociatedLti(
        A_l=A_l, B_l=B_l, C_l=C_l, D_l=D_l,
        C_s=C_s, C_inp=C_inp, D_s=D_s, D_inp=D_inp,
        X=X, Lambda=Lambda,
    )
    return ConstructionRecord(sys=sys, cf=cf, ond=ond, lti=lti)


def construct(sys: DaeSystem,
              rank_tol: float = DEFAULT_RANK_TOL) -> ConstructionRecord:
    """Full reduction pipeline: canonical form, output-nulling data,
    associated linear system."""
    cf = canonical_form(sys, rank_tol)
    ond = output_nulling(cf, rank_tol)
    return assemble(cf, ond, rank_tol)


def build_associated_lti(sys: DaeSystem,
                         rank_tol: float = DEFAULT_RANK_TOL) -> AssociatedLti:
    return construct(sys, rank_tol).lti


def is_consistent(lti: AssociatedLti, E, x0) -> bool:
    """True iff E x0 lies in the consistency space X, i.e. the DAE admits
    a solution from x0 on every horizon."""
    E = as_matrix(E, "E")
    x0 = as_vector(x0, "x0")
    if E.shape != (lti.n, lti.n) or x0.size != lti.n:
        raise InputError("E or x0 dimensions do not match the system")
    return lti.X.contains_vector(E @ x0)


def output_trajectory_from_v0(lti: AssociatedLti, v0,
                              g: SampledSignal) -> tuple[SampledSignal, SampledSignal, SampledSignal]:
    """Integrate the reduced system from v(0) = v0 and emit (x, u, v)."""
    v0 = as_vector(v0, "v0")
    if v0.size != lti.n_hat:
        raise InputError(f"v0 must have length {lti.n_hat}")
    if g.dim != lti.k:
        raise InputError(f"input signal must have dimension {lti.k}")
    v = integrate_lti(lti.A_l, lti.B_l, v0, g)
    x_vals = lti.C_s @ v.values + lti.D_s @ g.values
    u_vals = lti.C_inp @ v.values + lti.D_inp @ g.values
    x = SampledSignal(g.grid.copy(), x_vals)
    u = SampledSignal(g.grid.copy(), u_vals)
    return x, u, v


def output_trajectory(lti: AssociatedLti, E, x0,
                      g: SampledSignal) -> tuple[SampledSignal, SampledSignal, SampledSignal]:
    """DAE trajectory (x, u) generated by the input g from the initial
    state x0, together with the reduced state v.

    Requires E x0 to be consistent; the reduced initial state is
    v(0) = Lambda (E x0), and Lambda (E x(t)) = v(t) holds along the
    result up to integration error.
    """
    E = as_matrix(E, "E")
    x0 = as_vector(x0, "x0")
    if not is_consistent(lti, E, x0):
        raise ConsistencyError(
            "initial state is inconsistent: E x0 is outside the "
            "consistency space, the DAE has no solution from it"
        )
    v0 = lti.Lambda @ (E @ x0)
    return output_trajectory_from_v0(lti, v0, g)
