"""Expectation values, the rank-1 parametric measurement, and the
quantum-versus-classical scoring comparison."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from qigsim.errors import ContractViolationError, InvalidShapeError


def qtv(psi, H) -> complex:
    """``<psi|H|psi>`` for a normalized state; complex when ``H`` is not Hermitian."""
    psi = np.asarray(psi, dtype=complex).ravel()
    H = np.asarray(H)
    if H.ndim != 2 or H.shape != (psi.size, psi.size):
        raise InvalidShapeError(f"state of dim {psi.size} cannot be measured on H of shape {H.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ContractViolationError(f"state is not normalized (norm {norm:.12g})")
    return complex(np.vdot(psi, H @ psi))


def qtv_spectral(weights, eigenvalues) -> float:
    """Weighted sum of eigenvalue moduli, ``sum_k |E_k| weights[k]``."""
    weights = np.asarray(weights, dtype=float).ravel()
    eigenvalues = np.asarray(eigenvalues).ravel()
    if weights.size != eigenvalues.size or weights.size == 0:
        raise InvalidShapeError(
            f"{weights.size} weights for {eigenvalues.size} eigenvalues"
        )
    return float(np.sum(np.abs(eigenvalues) * weights))


def projected_weights(psi, eigenvectors) -> np.ndarray:
    """``|<v_k|psi>|^2`` for each eigenvector column ``v_k``."""
    return np.abs(np.asarray(eigenvectors).conj().T @ np.asarray(psi)) ** 2


def rank1_operator(alpha: float) -> np.ndarray:
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c * c, c * s], [c * s, s * s]])


def _check_lambda1(lambda1):
    if not 0.0 <= lambda1 <= 1.0:
        raise ContractViolationError(f"lambda1 must lie in [0, 1], got {lambda1}")


class Alignment(NamedTuple):
    t_star: float
    qtv_max: float


def best_alignment(alpha, lambda1, E0, E1) -> Alignment:
    """Peak score of a two-component torus state against ``rank1_operator(alpha)``.

    The phases realign every ``2 pi / (E1 - E0)``; the first positive such time
    is reported (``0`` when the energies coincide). The score there is
    ``(cos(alpha) sqrt(1 - lambda1) + sin(alpha) sqrt(lambda1))^2``.
    """
    _check_lambda1(lambda1)
    t_star = 0.0 if E0 == E1 else abs(2.0 * np.pi / (E1 - E0))
    amp = np.cos(alpha) * np.sqrt(1.0 - lambda1) + np.sin(alpha) * np.sqrt(lambda1)
    return Alignment(t_star, float(amp * amp))


def classical_expectation(lambda1, H) -> float:
    """``Tr(rho H)`` for the incoherent mixture ``diag(1 - lambda1, lambda1)``."""
    _check_lambda1(lambda1)
    H = np.asarray(H)
    if H.shape != (2, 2):
        raise InvalidShapeError(f"classical comparison needs a 2x2 measurement, got {H.shape}")
    return float(np.real((1.0 - lambda1) * H[0, 0] + lambda1 * H[1, 1]))
