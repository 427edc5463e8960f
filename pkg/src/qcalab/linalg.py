"""
Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Subspaces are
carried as orthonormal column bases together with the relative tolerance that
produced them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ProblemTooLarge

DEFAULT_TOL = 1e-9
MAX_AMBIENT_DIM = 1 << 16


@dataclass(frozen=True)
class Subspace:
    """Orthonormal basis (as columns) of a subspace of C^ambient_dim."""

    ambient_dim: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise ValueError(
                f"basis must have shape ({self.ambient_dim}, k), got {basis.shape}"
            )
        if basis.shape[1] > self.ambient_dim:
            raise ValueError("basis has more vectors than the ambient dimension")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def vectors(self):
        return [self.basis[:, i] for i in range(self.dim)]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def contains(self, v, tol=None) -> bool:
        """True if ``v`` lies in the subspace up to a relative residual of ``tol``."""
        tol = self.tol if tol is None else tol
        v = np.asarray(v, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            return True
        residual = v - self.basis @ (self.basis.conj().T @ v)
        return np.linalg.norm(residual) <= tol * norm


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    return a


def kron(a, b, max_dim: int = MAX_AMBIENT_DIM) -> np.ndarray:
    """Kronecker product with entry[(i1*rb + i2), (j1*cb + j2)] = a[i1, j1] * b[i2, j2]."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > max_dim or cols > max_dim:
        raise ProblemTooLarge(
            f"kron result {rows}x{cols} exceeds the ambient cap {max_dim}"
        )
    return np.kron(a, b)


def kron_all(mats, max_dim: int = MAX_AMBIENT_DIM) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m, max_dim=max_dim)
    return out


def adjoint(m) -> np.ndarray:
    return as_matrix(m).conj().T


def _empty_subspace(n, tol):
    return Subspace(n, np.zeros((n, 0), dtype=complex), tol)


def rank_and_nullspace(m, tol: float = DEFAULT_TOL, scale=None):
    """
    Numerical rank and right nullspace of ``m``.

    Singular values at or below ``tol`` times the largest one are treated as
    zero. Pass ``scale`` when the matrix has a known natural magnitude, so a
    matrix that is zero up to rounding is not judged against its own noise.
    Returns ``(rank, nullspace)`` where ``nullspace`` is a :class:`Subspace`
    of C^cols and ``rank + nullspace.dim == cols``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    cols = m.shape[1]
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if scale is not None:
        smax = max(smax, scale)
    rank = int(np.count_nonzero(s > tol * smax)) if smax > 0 else 0
    null = vh[rank:].conj().T
    return rank, Subspace(cols, null, tol)


def rank(m, tol: float = DEFAULT_TOL) -> int:
    m = as_matrix(m)
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def span(vectors, tol: float = DEFAULT_TOL, ambient_dim=None) -> Subspace:
    """Orthonormal basis for the span of the given vectors (columns of a 2-d array, or a list)."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        mat = vectors.astype(complex, copy=False)
    else:
        vecs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
        if not vecs:
            if ambient_dim is None:
                raise ValueError("ambient_dim required for an empty list")
            return _empty_subspace(ambient_dim, tol)
        mat = np.stack(vecs, axis=1)
    n = mat.shape[0]
    if mat.shape[1] == 0:
        return _empty_subspace(n, tol)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return _empty_subspace(n, tol)
    r = int(np.count_nonzero(s > tol * s[0]))
    return Subspace(n, u[:, :r], tol)


def subspace_intersection(u: Subspace, v: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Intersection of two subspaces via the nullspace of ``[U | -V]``."""
    if u.ambient_dim != v.ambient_dim:
        raise ValueError(
            f"ambient dimension mismatch: {u.ambient_dim} != {v.ambient_dim}"
        )
    n = u.ambient_dim
    if u.dim == 0 or v.dim == 0:
        return _empty_subspace(n, tol)
    stacked = np.hstack([u.basis, -v.basis])
    _, null = rank_and_nullspace(stacked, tol)
    if null.dim == 0:
        return _empty_subspace(n, tol)
    coeffs = null.basis[: u.dim, :]
    return span(u.basis @ coeffs, tol)


def partial_trace(m, dims, keep) -> np.ndarray:
    """Trace out every tensor factor whose position is not in ``keep``; kept factors stay in order."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    t = as_matrix(m).reshape(dims + dims)
    for p in reversed(range(n)):
        if p in keep:
            continue
        k = t.ndim // 2
        t = np.trace(t, axis1=p, axis2=k + p)
    side = int(np.prod([dims[p] for p in keep], dtype=int))
    return t.reshape(side, side)


def realign(m, dim_a: int, dim_b: int) -> np.ndarray:
    """
    Realignment R with R[(i1, j1), (i2, j2)] = m[i1*dim_b + i2, j1*dim_b + j2].

    ``m = sum_k B_k (x) C_k`` maps to ``R = sum_k vec(B_k) vec(C_k)^T``.
    """
    m = as_matrix(m)
    side = dim_a * dim_b
    if m.shape != (side, side):
        raise ValueError(f"expected a {side}x{side} matrix, got {m.shape}")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    return t.transpose(0, 2, 1, 3).reshape(dim_a * dim_a, dim_b * dim_b)


def operator_schmidt_rank(m, dim_a: int, dim_b: int, tol: float = DEFAULT_TOL) -> int:
    """Rank of the realignment; equals 1 iff ``m`` is a product ``B (x) C``."""
    return rank(realign(m, dim_a, dim_b), tol)


def is_unitary(m, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    err = m.conj().T @ m - np.eye(m.shape[0])
    return bool(np.max(np.abs(err)) <= tol)


def nearest_unitary(m) -> np.ndarray:
    """Unitary polar factor of ``m``."""
    u, _, vh = np.linalg.svd(as_matrix(m))
    return u @ vh


def random_unitary(dim: int, rng=None) -> np.ndarray:
    """Unitary from the QR decomposition of a complex Gaussian matrix, phases fixed."""
    rng = np.random.default_rng(rng)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def max_abs(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0
