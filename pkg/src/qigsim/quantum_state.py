"""Coherent superposition states, density matrices and their scalar metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qigsim.errors import ContractViolationError, InvalidShapeError
from qigsim.numkernel import as_square

# Eigenvalues of a density matrix in [-EIG_CLIP, 0) are floating-point drift.
EIG_CLIP = 1e-10
# Eigenvalues below this contribute nothing to the entropy (0 ln 0 = 0).
ENTROPY_FLOOR = 1e-12


@dataclass(frozen=True)
class SuperpositionState:
    """``psi(t) = sum_k sqrt(weights[k]) exp(-i energies[k] t) basis[:, k]``."""

    weights: np.ndarray
    energies: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).ravel()
        energies = np.asarray(self.energies, dtype=float).ravel()
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim == 1:
            basis = basis[:, None]
        if not (weights.size == energies.size == basis.shape[1]) or weights.size == 0:
            raise InvalidShapeError(
                f"need one weight, energy and basis column per component; got "
                f"{weights.size}, {energies.size}, {basis.shape[1]}"
            )
        if np.any(weights <= 0):
            raise ContractViolationError("superposition weights must be strictly positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ContractViolationError(f"weights sum to {weights.sum():.15g}, not 1")
        gram = basis.conj().T @ basis
        if np.max(np.abs(gram - np.eye(weights.size))) > 1e-10:
            raise ContractViolationError("basis columns are not orthonormal")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self):
        return self.basis.shape[0]

    def __call__(self, t):
        return evaluate_state(self, t)


def evaluate_state(state: SuperpositionState, t: float) -> np.ndarray:
    amplitudes = np.sqrt(state.weights) * np.exp(-1j * state.energies * t)
    return state.basis @ amplitudes


def density_matrix(state: SuperpositionState, t: float) -> np.ndarray:
    psi = evaluate_state(state, t)
    return np.outer(psi, psi.conj())


def validate_density_matrix(rho, tol=1e-10) -> np.ndarray:
    """Return ``rho`` as an array, raising if it is not Hermitian, unit-trace and PSD."""
    rho = as_square(rho, "density matrix")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ContractViolationError(f"density matrix is not Hermitian (residual {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ContractViolationError(f"density matrix trace is {tr.real:.12g}, not 1")
    return rho


def density_eigenvalues(rho) -> np.ndarray:
    """Clipped eigenvalues of a validated density matrix."""
    rho = validate_density_matrix(rho)
    w = np.linalg.eigvalsh(rho)
    if w.min() < -EIG_CLIP:
        raise ContractViolationError(f"density matrix has negative eigenvalue {w.min():.3e}")
    return np.clip(w, 0.0, None)


def purity(rho) -> float:
    w = density_eigenvalues(rho)
    return float(np.sum(w * w))


def entanglement_entropy(rho) -> float:
    w = density_eigenvalues(rho)
    w = w[w >= ENTROPY_FLOOR]
    return max(float(-np.sum(w * np.log(w))), 0.0) + 0.0


def coherence(rho) -> float:
    """L1 norm of the off-diagonal entries."""
    rho = as_square(rho)
    off = ~np.eye(rho.shape[0], dtype=bool)
    return float(np.sum(np.abs(rho[off])))


def torus_coordinates(lambda0, lambda1, E0, E1, t):
    """Embed a two-component superposition's phase pair on a torus.

    Major radius is 1, minor radius ``2 sqrt(lambda0 lambda1)``; the angles are
    ``E0 t`` (tube) and ``E1 t`` (around the axis). Vectorized over ``t``.
    """
    if lambda0 < 0 or lambda1 < 0 or abs(lambda0 + lambda1 - 1.0) > 1e-12:
        raise ContractViolationError(
            f"torus weights must be nonnegative and sum to 1, got ({lambda0}, {lambda1})"
        )
    R = 1.0
    r = 2.0 * np.sqrt(lambda0 * lambda1)
    theta = E0 * np.asarray(t, dtype=float)
    phi = E1 * np.asarray(t, dtype=float)
    X = (R + r * np.cos(theta)) * np.cos(phi)
    Y = (R + r * np.cos(theta)) * np.sin(phi)
    Z = r * np.sin(theta)
    return X, Y, Z
