"""Dense complex linear algebra and seeded randomness.

Matrices and vectors are plain ``numpy`` arrays (``complex128`` unless a
routine documents otherwise). Every function here is pure; the only stateful
object is :class:`RandomStream`.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.sparse.csgraph import connected_components

from qigsim.errors import (
    ContractViolationError,
    ConvergenceError,
    InvalidDimensionError,
    InvalidShapeError,
)

# General eigensolves are used up to this size; power iteration above it.
DENSE_EIG_LIMIT = 64


class RandomStream:
    """Seeded source of uniforms and Box-Muller Gaussians.

    The bit generator is Philox-4x64 (counter based) keyed by
    ``seed | (stream_id << 64)``, so every ``(seed, stream_id)`` pair names an
    independent, reproducible sequence. Gaussians are produced by the
    Box-Muller transform of pairs of uniforms in ``(0, 1]``.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if not 0 <= stream_id < 2**64:
            raise ValueError(f"stream_id must fit in 64 bits, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        self._gen = np.random.Generator(np.random.Philox(key=seed | (stream_id << 64)))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def split(self, stream_id: int) -> "RandomStream":
        """A fresh stream with the same seed and a different id."""
        return RandomStream(self.seed, stream_id)

    def uniform(self, size=None) -> np.ndarray:
        return self._gen.random(size)

    def normal(self, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        count = int(np.prod(shape, dtype=np.int64))
        pairs = (count + 1) // 2
        u1 = 1.0 - self._gen.random(pairs)  # (0, 1], keeps log finite
        u2 = self._gen.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:count].reshape(shape)

    def complex_normal(self, size) -> np.ndarray:
        """Standard complex Gaussians, ``E|z|^2 = 1``."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        z = self.normal(shape + (2,))
        return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def _check_dim(dim):
    if int(dim) < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
    return int(dim)


def as_square(M, name="matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise InvalidShapeError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    return M


def is_hermitian(M, tol=1e-10) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol)


def is_unitary(M, tol=1e-10) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    residual = M.conj().T @ M - np.eye(M.shape[0])
    return bool(np.max(np.abs(residual), initial=0.0) <= tol)


def is_nonnegative_real(M, tol=0.0) -> bool:
    M = np.asarray(M)
    if np.iscomplexobj(M):
        if np.max(np.abs(M.imag), initial=0.0) > tol:
            return False
        M = M.real
    return bool(np.min(M, initial=0.0) >= -tol)


def gaussian_state(dim: int, stream: RandomStream) -> np.ndarray:
    """Unit vector with i.i.d. standard complex Gaussian entries before normalization."""
    dim = _check_dim(dim)
    v = stream.complex_normal(dim)
    return v / np.linalg.norm(v)


def haar_unitary(dim: int, stream: RandomStream) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a Ginibre matrix.

    The phases of ``diag(R)`` are folded back into ``Q`` so the result is
    exactly Haar and not biased by the QR sign convention.
    """
    dim = _check_dim(dim)
    Z = stream.complex_normal((dim, dim))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def eig_hermitian(M, tol=1e-10):
    """Eigenvalues (descending) and orthonormal eigenvector columns of a Hermitian matrix."""
    M = as_square(M)
    diff = np.abs(M - M.conj().T)
    if diff.size and diff.max() > tol:
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        raise ContractViolationError(
            f"matrix is not Hermitian: entries ({i},{j}) and ({j},{i}) differ by {diff[i, j]:.3e}"
        )
    w, V = np.linalg.eigh(M)
    return w[::-1].copy(), V[:, ::-1].copy()


def _power_spectral_radius(M, max_iters=10000, tol=1e-12):
    if is_nonnegative_real(M):
        value, _, _ = dominant_eigenpair(np.real(M), max_iters=max_iters, tol=tol)
        return abs(value)
    from scipy.sparse.linalg import eigs

    return float(np.abs(eigs(M, k=1, which="LM", return_eigenvectors=False))[0])


def spectral_radius(M) -> float:
    M = as_square(M)
    if M.shape[0] <= DENSE_EIG_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvals(M))))
    return _power_spectral_radius(M)


def two_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M), 2))


class OperatorNorms(NamedTuple):
    spectral_radius: float
    two_norm: float


def operator_norms(M) -> OperatorNorms:
    """Spectral radius (largest eigenvalue modulus) and largest singular value."""
    M = as_square(M)
    return OperatorNorms(spectral_radius(M), two_norm(M))


def _check_nonnegative_real(M):
    M = as_square(M)
    if np.iscomplexobj(M):
        bad = np.abs(M.imag) > 0
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise ContractViolationError(f"entry ({i},{j}) is complex: {M[i, j]}")
        M = M.real
    if (M < 0).any():
        i, j = np.argwhere(M < 0)[0]
        raise ContractViolationError(f"entry ({i},{j}) is negative: {M[i, j]}")
    return M.astype(float)


def is_irreducible(M) -> bool:
    """True iff the digraph with an edge i->j wherever ``M[i, j] > 0`` is strongly connected."""
    M = _check_nonnegative_real(M)
    if M.shape[0] == 1:
        # a single vertex is strongly connected
        return True
    ncomp, _ = connected_components(M > 0, directed=True, connection="strong")
    return ncomp == 1


class DominantEigenpair(NamedTuple):
    value: float
    vector: np.ndarray
    degenerate: bool


def dominant_eigenpair(M, max_iters=10000, tol=1e-12) -> DominantEigenpair:
    """Perron root and vector of a nonnegative matrix by power iteration.

    Iterates on ``M + I`` from the all-ones vector: the shift has the same
    eigenvectors and makes periodic irreducible matrices primitive, so the
    iteration converges where plain power iteration would cycle.

    ``degenerate`` is set when another eigenvalue shares the dominant modulus,
    in which case the returned vector is one member of the eigenspace.
    """
    M = _check_nonnegative_real(M)
    n = M.shape[0]
    shifted = M + np.eye(n)
    v = np.ones(n) / np.sqrt(n)
    residual = np.inf
    for _ in range(max_iters):
        w = shifted @ v
        v = w / np.linalg.norm(w)
        Mv = M @ v
        value = float(v @ Mv)
        residual = float(np.max(np.abs(Mv - value * v)))
        if residual <= tol * max(abs(value), np.finfo(float).tiny):
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iters} iterations", residual)

    if value == 0.0 and residual == 0.0:
        v = np.abs(v)
    if n <= DENSE_EIG_LIMIT:
        moduli = np.abs(np.linalg.eigvals(M))
        scale = max(abs(value), 1.0)
        degenerate = int(np.sum(moduli >= abs(value) - 1e-9 * scale)) > 1
    else:
        degenerate = False
    return DominantEigenpair(value, v, degenerate)
