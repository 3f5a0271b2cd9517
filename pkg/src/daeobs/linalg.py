"""Rank-aware dense linear algebra: pseudoinverse, kernel/image bases,
subspace arithmetic and symmetric matrix functions.

All rank decisions in the package go through a single relative threshold:
a singular value sigma is treated as zero when

    sigma <= rank_tol * sigma_max * max(rows, cols)

with ``rank_tol`` defaulting to :data:`DEFAULT_RANK_TOL`.  Subspaces are
always stored with orthonormal bases (obtained from SVDs), which keeps
containment and intersection tests well conditioned.

Everything here is a pure function of its inputs; the returned values are
treated as immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NotPositiveDefiniteError

DEFAULT_RANK_TOL = 1e-10
DEFAULT_SUBSPACE_TOL = 1e-9


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite 2-D float array."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Validate and return a finite 1-D float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise InputError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _svd(M: np.ndarray):
    """SVD that tolerates empty matrices."""
    m, n = M.shape
    if m == 0 or n == 0:
        return np.eye(m), np.zeros(0), np.eye(n)
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    return U, s, Vt


def _rank_threshold(s: np.ndarray, shape, rank_tol: float,
                    scale: float = 0.0) -> float:
    smax = s[0] if s.size else 0.0
    return rank_tol * max(smax, scale) * max(shape[0], shape[1], 1)


def numerical_rank(M, rank_tol: float = DEFAULT_RANK_TOL,
                   scale: float = 0.0) -> int:
    M = as_matrix(M)
    _, s, _ = _svd(M)
    return int(np.sum(s > _rank_threshold(s, M.shape, rank_tol, scale)))


def pseudoinverse(M, rank_tol: float = DEFAULT_RANK_TOL,
                  scale: float = 0.0) -> np.ndarray:
    """Moore-Penrose pseudoinverse with an explicit rank cut-off.

    Singular values below the relative threshold are treated as exactly
    zero, so rank-deficient inputs produce clean pseudoinverses (a zero
    matrix maps to a zero matrix).  ``scale`` optionally floors the
    threshold by the magnitude of the surrounding computation, so that
    matrices which are zero up to roundoff of that computation are treated
    as zero instead of being inverted into noise.
    """
    M = as_matrix(M)
    m, n = M.shape
    if m == 0 or n == 0:
        return np.zeros((n, m))
    U, s, Vt = _svd(M)
    thresh = _rank_threshold(s, M.shape, rank_tol, scale)
    r = int(np.sum(s > thresh))
    if r == 0:
        return np.zeros((n, m))
    return (Vt[:r].T / s[:r]) @ U[:, :r].T


@dataclass(frozen=True)
class Subspace:
    """A linear subspace stored as an orthonormal basis.

    ``basis`` has shape (ambient_dim, dim) with orthonormal columns; a
    zero-dimensional subspace has a basis with zero columns.
    """

    basis: np.ndarray
    tol: float = DEFAULT_SUBSPACE_TOL

    def __post_init__(self):
        basis = as_matrix(self.basis, "subspace basis")
        object.__setattr__(self, "basis", basis)
        if self.tol < 0:
            raise InputError("subspace tolerance must be nonnegative")
        if basis.shape[1] > basis.shape[0]:
            raise InputError(
                f"subspace dimension {basis.shape[1]} exceeds ambient "
                f"dimension {basis.shape[0]}"
            )
        if basis.shape[1]:
            gram = basis.T @ basis
            defect = np.linalg.norm(gram - np.eye(basis.shape[1]))
            if defect > max(self.tol, 1e-12) * 100:
                raise InputError(
                    f"subspace basis is not orthonormal (defect {defect:.3e})"
                )

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def full(cls, n: int, tol: float = DEFAULT_SUBSPACE_TOL) -> "Subspace":
        return cls(np.eye(n), tol)

    @classmethod
    def zero(cls, n: int, tol: float = DEFAULT_SUBSPACE_TOL) -> "Subspace":
        return cls(np.zeros((n, 0)), tol)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def perp_projector(self) -> np.ndarray:
        return np.eye(self.ambient_dim) - self.projector()

    def contains_vector(self, x, tol: float | None = None) -> bool:
        x = as_vector(x, "vector")
        if x.size != self.ambient_dim:
            raise InputError(
                f"vector length {x.size} does not match ambient dimension "
                f"{self.ambient_dim}"
            )
        tol = self.tol if tol is None else tol
        resid = x - self.basis @ (self.basis.T @ x)
        return float(np.linalg.norm(resid)) <= tol * (1.0 + float(np.linalg.norm(x)))


def kernel_basis(M, rank_tol: float = DEFAULT_RANK_TOL,
                 tol: float = DEFAULT_SUBSPACE_TOL,
                 scale: float = 0.0) -> Subspace:
    """Orthonormal basis of the null space {x : Mx = 0}.

    ``scale`` floors the rank threshold (see :func:`pseudoinverse`): rows
    that vanish up to roundoff of a computation with magnitude ``scale``
    do not shrink the kernel.
    """
    M = as_matrix(M)
    m, n = M.shape
    if m == 0 or not np.any(M):
        return Subspace.full(n, tol)
    _, s, Vt = _svd(M)
    r = int(np.sum(s > _rank_threshold(s, M.shape, rank_tol, scale)))
    return Subspace(Vt[r:].T.copy(), tol)


def image_basis(M, rank_tol: float = DEFAULT_RANK_TOL,
                tol: float = DEFAULT_SUBSPACE_TOL,
                scale: float = 0.0) -> Subspace:
    """Orthonormal basis of the column space of M."""
    M = as_matrix(M)
    m, n = M.shape
    if n == 0 or not np.any(M):
        return Subspace.zero(m, tol)
    U, s, _ = _svd(M)
    r = int(np.sum(s > _rank_threshold(s, M.shape, rank_tol, scale)))
    return Subspace(U[:, :r].copy(), tol)


def _check_ambient(V: Subspace, W: Subspace):
    if V.ambient_dim != W.ambient_dim:
        raise InputError(
            f"ambient dimensions differ: {V.ambient_dim} vs {W.ambient_dim}"
        )


def subspace_sum(V: Subspace, W: Subspace,
                 rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    _check_ambient(V, W)
    return image_basis(np.hstack([V.basis, W.basis]), rank_tol,
                       max(V.tol, W.tol))


def subspace_intersection(V: Subspace, W: Subspace,
                          rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Intersection via the kernel of stacked orthogonal-complement
    projectors, which stays well conditioned for nearly aligned inputs."""
    _check_ambient(V, W)
    stacked = np.vstack([V.perp_projector(), W.perp_projector()])
    return kernel_basis(stacked, rank_tol, max(V.tol, W.tol))


def preimage(M, V: Subspace, rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """The subspace {x : Mx in V}, computed as ker((I - P_V) M).

    The kernel threshold is floored by the scale of M itself, so columns
    mapped into V up to roundoff are counted as members of the preimage.
    """
    M = as_matrix(M)
    if M.shape[0] != V.ambient_dim:
        raise InputError(
            f"map has {M.shape[0]} rows but subspace lives in dimension "
            f"{V.ambient_dim}"
        )
    scale = float(np.linalg.norm(M, 2)) if M.size else 0.0
    return kernel_basis(V.perp_projector() @ M, rank_tol, V.tol, scale=scale)


def contains(V: Subspace, W: Subspace) -> bool:
    """True iff W is contained in V (within tolerance)."""
    _check_ambient(V, W)
    if W.dim == 0:
        return True
    resid = W.basis - V.basis @ (V.basis.T @ W.basis)
    return float(np.linalg.norm(resid)) <= max(V.tol, W.tol) * (1.0 + np.sqrt(W.dim))


def require_symmetric(M, name: str = "matrix", tol: float = 1e-9) -> np.ndarray:
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise InputError(f"{name} must be square, got shape {M.shape}")
    scale = 1.0 + float(np.linalg.norm(M))
    if float(np.linalg.norm(M - M.T)) > tol * scale:
        raise InputError(f"{name} must be symmetric")
    return symmetrize(M)


def require_spd(M, name: str = "matrix", tol: float = 1e-12) -> np.ndarray:
    """Validate a symmetric positive definite matrix (0x0 passes)."""
    M = require_symmetric(M, name)
    if M.shape[0] == 0:
        return M
    w = np.linalg.eigvalsh(M)
    if w[0] <= tol * max(1.0, w[-1]):
        raise NotPositiveDefiniteError(f"{name} must be symmetric positive definite")
    return M


def require_psd(M, name: str = "matrix", tol: float = 1e-9) -> np.ndarray:
    M = require_symmetric(M, name)
    if M.shape[0] == 0:
        return M
    w = np.linalg.eigvalsh(M)
    if w[0] < -tol * max(1.0, abs(w[-1])):
        raise NotPositiveDefiniteError(f"{name} must be positive semidefinite")
    return M


def inv_sqrt_spd(M, what: str = "matrix", tol: float = 1e-12) -> np.ndarray:
    """Inverse square root of a symmetric positive definite matrix.

    Computed from the symmetric eigendecomposition.  Raises
    :class:`NotPositiveDefiniteError` when the input is not symmetric or
    has an eigenvalue at or below the tolerance, naming ``what`` in the
    message so callers can point at the offending block.
    """
    M = as_matrix(M, what)
    if M.shape[0] != M.shape[1]:
        raise InputError(f"{what} must be square, got shape {M.shape}")
    if M.shape[0] == 0:
        return np.zeros((0, 0))
    scale = 1.0 + float(np.linalg.norm(M))
    if float(np.linalg.norm(M - M.T)) > 1e-10 * scale:
        raise NotPositiveDefiniteError(f"{what} is not symmetric")
    w, V = np.linalg.eigh(symmetrize(M))
    if w[0] <= tol * max(1.0, w[-1]):
        raise NotPositiveDefiniteError(
            f"{what} is singular or not positive definite "
            f"(smallest eigenvalue {w[0]:.3e})"
        )
    return (V / np.sqrt(w)) @ V.T


def inv_spd(M, what: str = "matrix") -> np.ndarray:
    """Inverse of a symmetric positive definite matrix, symmetrized."""
    R = inv_sqrt_spd(M, what)
    return symmetrize(R @ R)
