"""Dense complex linear-algebra kernel.

Operators are square complex numpy arrays. Vectorization is column-stacking:
``vec(X)[i + d*j] = X[i, j]``, so the matrix unit ``E_k = |i><j|`` with
``k = i + d*j`` maps to the k-th standard basis vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, DegeneracyError, DimensionError

__all__ = [
    "as_operator",
    "dag",
    "commutator",
    "is_hermitian",
    "is_positive_semidefinite",
    "is_trace_one",
    "is_density_matrix",
    "kron",
    "kron_all",
    "partial_trace",
    "SpectralDecomposition",
    "hermitian_spectral",
    "matrix_function_psd",
    "logm_psd",
    "sqrtm_psd",
    "vec",
    "unvec",
    "Superoperator",
    "vectorize_map",
    "nullspace_unique",
    "trace_distance",
]

DEFAULT_TOL = 1e-10

# floor is effectively exact: log(1e-300) is finite but astronomically negative
PSD_FUNCTION_FLOOR = 1e-300


def as_operator(x) -> np.ndarray:
    """Coerce to a square complex matrix."""
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(a.T)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(a: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    a = as_operator(a)
    scale = max(np.linalg.norm(a), 1.0)
    return bool(np.linalg.norm(a - dag(a)) <= tol * scale)


def is_positive_semidefinite(a: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    a = as_operator(a)
    if not is_hermitian(a, tol):
        return False
    w = np.linalg.eigvalsh((a + dag(a)) / 2)
    scale = max(abs(w[-1]), 1.0)
    return bool(w[0] >= -tol * scale)


def is_trace_one(a: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return bool(abs(np.trace(as_operator(a)) - 1.0) <= tol)


def is_density_matrix(a: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return is_hermitian(a, tol) and is_positive_semidefinite(a, tol) and is_trace_one(a, tol)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product in the canonical basis ordering (left factor is the slow index)."""
    return np.kron(as_operator(a), as_operator(b))


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    out = None
    for f in factors:
        out = as_operator(f) if out is None else np.kron(out, as_operator(f))
    if out is None:
        raise ContractError("kron_all needs at least one factor")
    return out


def partial_trace(x: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out the tensor factors not listed in ``keep``.

    ``dims`` lists the factor dimensions in kron order; ``keep`` is a set of
    factor indices retained (in their original order). Tracing everything
    returns a 1x1 matrix holding the full trace.
    """
    x = as_operator(x)
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims):
        raise DimensionError("factor dimensions must be positive")
    n = int(np.prod(dims))
    if n != x.shape[0]:
        raise DimensionError(f"dims {dims} do not multiply to operator dim {x.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} factors")

    k = len(dims)
    t = x.reshape(dims + dims)
    # contract row/column axes of every traced factor
    traced = [i for i in range(k) if i not in keep]
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + (t.ndim // 2))
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Clustered eigendecomposition of a Hermitian operator.

    ``eigenvalues`` are ascending cluster representatives (means), one per
    projector; ``projectors`` are orthogonal projections summing to identity.
    """

    eigenvalues: tuple
    projectors: tuple

    def reconstruct(self) -> np.ndarray:
        return sum(e * p for e, p in zip(self.eigenvalues, self.projectors))

    def apply_function(self, f: Callable[[float], float]) -> np.ndarray:
        return sum(f(e) * p for e, p in zip(self.eigenvalues, self.projectors))


def _cluster_indices(w: np.ndarray, cluster_tol: float) -> list[list[int]]:
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[groups[-1][-1]] <= cluster_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def hermitian_spectral(
    x: np.ndarray, cluster_tol: float | None = None, herm_tol: float = DEFAULT_TOL
) -> SpectralDecomposition:
    """Eigendecomposition with eigenvalues merged when closer than ``cluster_tol``.

    Defaults ``cluster_tol`` to 1e-9 times the spectral radius; clustering keeps
    divided differences of spectral functions well conditioned downstream.
    """
    x = as_operator(x)
    if not is_hermitian(x, herm_tol):
        raise ContractError("hermitian_spectral requires a Hermitian operator")
    xs = (x + dag(x)) / 2
    w, v = np.linalg.eigh(xs)
    if cluster_tol is None:
        cluster_tol = 1e-9 * max(abs(w[0]), abs(w[-1]), 1e-300)
    eigenvalues = []
    projectors = []
    for group in _cluster_indices(w, cluster_tol):
        cols = v[:, group]
        eigenvalues.append(float(np.mean(w[group])))
        projectors.append(cols @ dag(cols))
    return SpectralDecomposition(tuple(eigenvalues), tuple(projectors))


def matrix_function_psd(
    x: np.ndarray,
    f: Callable[[float], float],
    floor: float = PSD_FUNCTION_FLOOR,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Apply a real scalar function to a Hermitian PSD operator spectrally.

    Eigenvalues are clipped from below at ``floor`` before applying ``f``;
    eigenvalues below ``-tol`` (relative to the largest) raise.
    """
    x = as_operator(x)
    if not is_hermitian(x, tol):
        raise ContractError("matrix_function_psd requires a Hermitian operator")
    w, v = np.linalg.eigh((x + dag(x)) / 2)
    scale = max(abs(w[-1]), 1.0)
    if w[0] < -tol * scale:
        raise ContractError(f"operator is not PSD: min eigenvalue {w[0]:.3e}")
    fw = np.array([f(max(float(e), floor)) for e in w])
    return (v * fw) @ dag(v)


def logm_psd(x: np.ndarray, floor: float = PSD_FUNCTION_FLOOR) -> np.ndarray:
    return matrix_function_psd(x, np.log, floor=floor)


def sqrtm_psd(x: np.ndarray) -> np.ndarray:
    return matrix_function_psd(x, lambda t: np.sqrt(max(t, 0.0)))


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return as_operator(x).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != dim * dim:
        raise DimensionError(f"vector of length {v.size} is not dim^2 = {dim * dim}")
    return v.reshape(dim, dim, order="F")


@dataclass(frozen=True)
class Superoperator:
    """Matrix representation of a linear map on operators, acting on vec(X)."""

    dim: int
    matrix: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(x), self.dim)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def vectorize_map(
    action: Callable[[np.ndarray], np.ndarray],
    dim: int,
    check_linearity: bool = True,
    rng_seed: int = 7,
) -> Superoperator:
    """Build the matrix of a linear operator map column by column.

    Column ``k = i + dim*j`` is ``vec(action(|i><j|))``. Linearity is spot
    checked on random inputs unless disabled.
    """
    dim = int(dim)
    m = np.zeros((dim * dim, dim * dim), dtype=complex)
    basis = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        for i in range(dim):
            basis[i, j] = 1.0
            m[:, i + dim * j] = vec(action(basis))
            basis[i, j] = 0.0
    s = Superoperator(dim, m)
    if check_linearity:
        rng = np.random.default_rng(rng_seed)
        for _ in range(2):
            x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            y = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            a, b = rng.normal(size=2)
            lhs = action(a * x + b * y)
            rhs = a * action(x) + b * action(y)
            scale = max(np.linalg.norm(rhs), 1.0)
            if np.linalg.norm(lhs - rhs) > 1e-9 * scale:
                raise ContractError("vectorize_map requires a linear action")
            if np.linalg.norm(s.apply(x) - action(x)) > 1e-9 * scale:
                raise ContractError("vectorized matrix disagrees with the action")
    return s


def nullspace_unique(s: Superoperator, gap_tol: float | None = None) -> np.ndarray:
    """Extract the unique trace-one kernel element of a superoperator.

    The kernel vector comes from the SVD; the two smallest singular values must
    be separated by ``gap_tol`` (default 1e-8 times the largest singular value).
    The result is Hermitized, normalized to trace one, and PSD-projected by
    clipping eigenvalues below -1e-12.
    """
    m = s.matrix
    u, sv, vh = np.linalg.svd(m)
    smax = sv[0] if sv[0] > 0 else 1.0
    if gap_tol is None:
        gap_tol = 1e-8 * smax
    if len(sv) >= 2 and (sv[-2] - sv[-1]) < gap_tol:
        raise DegeneracyError(
            f"kernel not one-dimensional: smallest singular values "
            f"{sv[-1]:.3e}, {sv[-2]:.3e} under gap_tol {gap_tol:.3e}"
        )
    x = unvec(vh[-1].conj(), s.dim)
    tr = np.trace(x)
    if abs(tr) < 1e-12:
        raise DegeneracyError("kernel element has (numerically) zero trace")
    x = x / tr
    x = (x + dag(x)) / 2
    w, v = np.linalg.eigh(x)
    w = np.where(w < -1e-12, 0.0, w)
    x = (v * w) @ dag(v)
    return x / np.trace(x)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of a - b."""
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise DimensionError("trace_distance requires operators of equal dimension")
    return float(0.5 * np.linalg.svd(a - b, compute_uv=False).sum())
