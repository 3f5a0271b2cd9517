"""Sampled signals, fixed-step integration and quadrature.

Signals are stored densely: a time grid plus one column of values per time
point.  The integrator is classical fixed-step RK4 with linear
interpolation of the input at half steps, giving global order 4 on the
linear systems used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InputError
from .linalg import as_matrix, as_vector

GRID_RTOL = 1e-9


@dataclass(frozen=True)
class SampledSignal:
    """A vector-valued signal sampled on a strictly increasing time grid.

    ``values`` has shape (dim, len(grid)); dim may be zero for the empty
    signal of a system without inputs.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 1:
            raise InputError("grid must be a nonempty 1-D array")
        if not np.all(np.isfinite(grid)):
            raise InputError("grid contains non-finite entries")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise InputError("grid must be strictly increasing")
        values = as_matrix(self.values, "signal values")
        if values.shape[1] != grid.size:
            raise InputError(
                f"signal has {values.shape[1]} samples but grid has {grid.size}"
            )
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def t1(self) -> float:
        return float(self.grid[-1])

    @property
    def step(self) -> float:
        """Uniform grid step; raises for non-uniform grids."""
        if self.grid.size < 2:
            return 0.0
        steps = np.diff(self.grid)
        h = float(steps[0])
        if np.any(np.abs(steps - h) > GRID_RTOL * max(h, 1.0)):
            raise InputError("non-uniform grid where a uniform one is required")
        return h

    @classmethod
    def zeros(cls, dim: int, grid) -> "SampledSignal":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.zeros((dim, grid.size)))

    @classmethod
    def from_function(cls, fn, grid, dim: int | None = None) -> "SampledSignal":
        grid = np.asarray(grid, dtype=float)
        cols = [np.atleast_1d(np.asarray(fn(t), dtype=float)) for t in grid]
        vals = np.column_stack(cols) if cols else np.zeros((dim or 0, 0))
        return cls(grid, vals)

    def truncated(self, t1: float) -> "SampledSignal":
        """Restriction to [0, t1]; t1 must be a grid point."""
        idx = int(np.searchsorted(self.grid, t1 - GRID_RTOL * max(1.0, abs(t1))))
        if idx >= self.grid.size or abs(self.grid[idx] - t1) > GRID_RTOL * max(1.0, abs(t1)):
            raise InputError(f"t1 = {t1} is not a grid point of the signal")
        return SampledSignal(self.grid[: idx + 1].copy(), self.values[:, : idx + 1].copy())


def uniform_grid(t1: float, step: float) -> np.ndarray:
    """Uniform grid on [0, t1] with the step rounded to divide t1 exactly."""
    if t1 < 0 or not np.isfinite(t1):
        raise InputError("horizon must be a nonnegative finite number")
    if step <= 0:
        raise InputError("step must be positive")
    n = max(1, int(round(t1 / step))) if t1 > 0 else 1
    return np.linspace(0.0, t1, n + 1) if t1 > 0 else np.array([0.0])


def integrate_lti(A, B, x0, u: SampledSignal) -> SampledSignal:
    """Fixed-step RK4 integration of  xdot = A x + B u  along u's grid.

    The input is linearly interpolated at half steps; global error is
    O(h^4).  Requires a uniform grid.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    x0 = as_vector(x0, "x0")
    n = A.shape[0]
    if A.shape != (n, n):
        raise InputError("A must be square")
    if B.shape[0] != n:
        raise InputError(f"B must have {n} rows")
    if u.dim != B.shape[1]:
        raise InputError(
            f"input signal dimension {u.dim} does not match B columns {B.shape[1]}"
        )
    if x0.size != n:
        raise InputError(f"x0 must have length {n}")
    h = u.step
    N = u.grid.size - 1
    out = np.empty((n, N + 1))
    x = x0.astype(float).copy()
    out[:, 0] = x
    U = u.values
    for i in range(N):
        u0 = U[:, i]
        u1 = U[:, i + 1]
        um = 0.5 * (u0 + u1)
        k1 = A @ x + B @ u0
        k2 = A @ (x + 0.5 * h * k1) + B @ um
        k3 = A @ (x + 0.5 * h * k2) + B @ um
        k4 = A @ (x + h * k3) + B @ u1
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[:, i + 1] = x
    return SampledSignal(u.grid.copy(), out)


def trapezoid(grid, vals) -> float:
    """Composite trapezoid rule for scalar samples on a (possibly
    non-uniform) grid."""
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if grid.size != vals.size:
        raise InputError("grid and values must have equal length")
    if grid.size < 2:
        return 0.0
    return float(np.trapezoid(vals, grid))


def simpson(grid, vals) -> float:
    """Composite Simpson rule on a uniform grid (O(h^4)).

    An odd interval count is handled with a 3/8 rule on the last three
    intervals, preserving the order.
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if grid.size != vals.size:
        raise InputError("grid and values must have equal length")
    N = grid.size - 1
    if N < 1:
        return 0.0
    h = SampledSignal(grid, vals.reshape(1, -1)).step
    if N == 1:
        return float(0.5 * h * (vals[0] + vals[1]))
    if N == 2:
        return float(h / 3.0 * (vals[0] + 4.0 * vals[1] + vals[2]))
    total = 0.0
    stop = N if N % 2 == 0 else N - 3
    for i in range(0, stop, 2):
        total += h / 3.0 * (vals[i] + 4.0 * vals[i + 1] + vals[i + 2])
    if N % 2 == 1:
        j = N - 3
        total += 3.0 * h / 8.0 * (
            vals[j] + 3.0 * vals[j + 1] + 3.0 * vals[j + 2] + vals[j + 3]
        )
    return float(total)


def quadratic_form_series(M, sig: SampledSignal) -> np.ndarray:
    """Pointwise samples of t -> sig(t)^T M sig(t)."""
    M = as_matrix(M, "weight")
    if M.shape[0] != sig.dim:
        raise InputError("weight size does not match signal dimension")
    return np.einsum("it,ij,jt->t", sig.values, M, sig.values)


def cost_discretization(A, B, C, D, S, h: float):
    """Exact one-step discretization of state, input and running cost.

    For  vdot = A v + B g  with piecewise-constant g and running cost
    integrand (C v + D g)^T S (C v + D g), returns (Phi, Gamma, Qd, Nd, Rd)
    such that  v_{i+1} = Phi v_i + Gamma g_i  and the cost of one step is
    [v; g]^T [[Qd, Nd], [Nd^T, Rd]] [v; g].  Uses the matrix-exponential
    (Van Loan) construction, so the only discretization error left in a
    transcription built on it is the piecewise-constant input restriction.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    n = A.shape[0]
    k = B.shape[1]
    nz = n + k
    Aaug = np.zeros((nz, nz))
    Aaug[:n, :n] = A
    Aaug[:n, n:] = B
    Cm = np.hstack([as_matrix(C, "C"), as_matrix(D, "D")])
    Qc = Cm.T @ as_matrix(S, "S") @ Cm
    M = np.zeros((2 * nz, 2 * nz))
    M[:nz, :nz] = -Aaug.T
    M[:nz, nz:] = Qc
    M[nz:, nz:] = Aaug
    EM = expm(M * h) if nz else np.zeros((0, 0))
    F22 = EM[nz:, nz:]
    G12 = EM[:nz, nz:]
    W = F22.T @ G12
    W = 0.5 * (W + W.T)
    Phi = F22[:n, :n]
    Gamma = F22[:n, n:]
    return Phi, Gamma, W[:n, :n], W[:n, n:], W[n:, n:]
