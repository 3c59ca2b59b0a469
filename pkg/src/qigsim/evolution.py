"""Masked rank-1 Hamiltonian evolution.

One step mixes the current matrix with the entrywise modulus of a reduced
density matrix, restricted to the support of a binary mask::

    H(t+1) = (1 - lambda_decay) H(t) + eta * (|rho_B(t)| o K)

``rho_B`` is the partial trace over an ancilla of a bipartite pure state, so
it is ``n x n`` for any ancilla size ``d`` and equals ``psi psi^dagger`` when
``d == 1``. Taking the modulus keeps ``H`` real and nonnegative.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from qigsim import kernels
from qigsim.errors import (
    ContractViolationError,
    InvalidConfigurationError,
    InvalidDimensionError,
    InvalidMaskError,
    InvalidShapeError,
)
from qigsim.numkernel import RandomStream, gaussian_state, haar_unitary, is_unitary
from qigsim.quantum_state import validate_density_matrix

DEFAULT_SNAPSHOT_STRIDE = 25

# stream ids drawn from a run's seed
STREAM_STATES = 0
STREAM_ANCILLA = 1
STREAM_UNITARY = 2


def as_mask(K) -> np.ndarray:
    K = np.asarray(K)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] < 1:
        raise InvalidShapeError(f"mask must be a non-empty square matrix, got shape {K.shape}")
    if not np.isin(K, (0, 1)).all():
        raise InvalidMaskError("mask entries must be 0 or 1")
    return K.astype(np.float64)


@dataclass(frozen=True)
class MaskedHamiltonian:
    """Nonnegative real ``H`` whose support lies inside the binary mask ``K``."""

    H: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H)
        K = as_mask(self.K)
        if np.iscomplexobj(H):
            if np.any(H.imag != 0):
                raise ContractViolationError("Hamiltonian entries must be real")
            H = H.real
        H = np.asarray(H, dtype=np.float64)
        if H.shape != K.shape:
            raise InvalidShapeError(f"H shape {H.shape} does not match mask shape {K.shape}")
        if (H < 0).any():
            raise ContractViolationError("Hamiltonian entries must be nonnegative")
        if (H[K == 0] != 0).any():
            raise ContractViolationError("Hamiltonian is nonzero outside the mask")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "K", K)

    @property
    def n(self):
        return self.H.shape[0]

    @property
    def trace(self):
        return float(np.trace(self.H))


class StateSource(str, Enum):
    RANDOM_BIPARTITE = "random_bipartite"
    BLUE_SUPERPOSITION = "blue_superposition"


@dataclass(frozen=True)
class EvolutionConfig:
    eta: float = 0.7
    lambda_decay: float = 0.7
    steps: int = 500
    n: int = 10
    d: int = 1
    seed: int = 0
    state_source: StateSource = StateSource.BLUE_SUPERPOSITION
    snapshot_stride: int = DEFAULT_SNAPSHOT_STRIDE

    def __post_init__(self):
        object.__setattr__(self, "state_source", StateSource(self.state_source))
        if not self.eta > 0:
            raise InvalidConfigurationError(f"eta must be > 0, got {self.eta}")
        if not 0.0 <= self.lambda_decay <= 1.0:
            raise InvalidConfigurationError(f"lambda_decay must lie in [0, 1], got {self.lambda_decay}")
        if self.steps < 0:
            raise InvalidConfigurationError(f"steps must be >= 0, got {self.steps}")
        if self.n < 1 or self.d < 1:
            raise InvalidConfigurationError(f"n and d must be >= 1, got n={self.n}, d={self.d}")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.snapshot_stride < 0:
            raise InvalidConfigurationError("snapshot_stride must be >= 0")


@dataclass(frozen=True)
class TraceRecord:
    t: int
    two_norm: float
    spectral_radius: float
    qtv_real: float
    qtv_abs: float
    purity: float
    qee: float
    coherence: float
    trace_H: float

    FIELDS = ("t", "two_norm", "spectral_radius", "qtv_real", "qtv_abs",
              "purity", "qee", "coherence", "trace_H")


@dataclass
class EvolutionResult:
    """Records for ``H(0)..H(T)`` plus retained matrices.

    ``records[t]`` scores ``H(t)``: its norms and trace, ``<psi|H(t)|psi>`` for
    the state that produced the update into it (the step-0 state for ``t = 0``),
    and the metrics of that update term.
    """

    records: list
    snapshots: dict
    best_step: int
    best: MaskedHamiltonian
    final: MaskedHamiltonian
    backend: str = field(default=kernels.BACKEND)

    @property
    def trajectory(self):
        """Retained ``(step, MaskedHamiltonian)`` pairs in step order."""
        return sorted(self.snapshots.items())

    @property
    def two_norms(self):
        return np.array([r.two_norm for r in self.records])

    @property
    def peak_two_norm(self):
        return self.records[self.best_step].two_norm

    @property
    def final_two_norm(self):
        return self.records[-1].two_norm


def init_hamiltonian(K) -> MaskedHamiltonian:
    K = as_mask(K)
    tr = np.trace(K)
    if tr == 0:
        raise InvalidMaskError("mask has an all-zero diagonal; cannot normalize to unit trace")
    return MaskedHamiltonian(K / tr, K)


def bipartite_state(n: int, d: int, stream: RandomStream) -> np.ndarray:
    """Random pure state on ``C^n (x) C^d``, flattened as ``i * d + j``."""
    if n < 1 or d < 1:
        raise InvalidDimensionError(f"subsystem dimensions must be >= 1, got n={n}, d={d}")
    return gaussian_state(n * d, stream)


def partial_trace_A(psi_BA, n: int, d: int) -> np.ndarray:
    """Reduced state of the first factor: ``rho[i, k] = sum_j c[i, j] conj(c[k, j])``."""
    psi_BA = np.asarray(psi_BA, dtype=complex).ravel()
    if psi_BA.size != n * d:
        raise InvalidShapeError(f"state of dim {psi_BA.size} is not {n} x {d}")
    C = psi_BA.reshape(n, d)
    return C @ C.conj().T


def entangle(psi_B, phi_A, U) -> np.ndarray:
    psi_B = np.asarray(psi_B, dtype=complex).ravel()
    phi_A = np.asarray(phi_A, dtype=complex).ravel()
    U = np.asarray(U)
    dim = psi_B.size * phi_A.size
    if U.shape != (dim, dim):
        raise InvalidShapeError(f"unitary of shape {U.shape} cannot act on dim {dim}")
    if not is_unitary(U, 1e-10):
        raise ContractViolationError("entangling operator is not unitary")
    for name, v in (("psi_B", psi_B), ("phi_A", phi_A)):
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ContractViolationError(f"{name} is not normalized")
    return U @ np.kron(psi_B, phi_A)


def step(current: MaskedHamiltonian, update_term, eta: float, lambda_decay: float) -> MaskedHamiltonian:
    rho = validate_density_matrix(update_term)
    if rho.shape != current.H.shape:
        raise InvalidShapeError(f"update of shape {rho.shape} for H of shape {current.H.shape}")
    H = (1.0 - lambda_decay) * current.H + eta * (np.abs(rho) * current.K)
    return MaskedHamiltonian(H, current.K)


def interpolate(H_B, H_C, s: float) -> np.ndarray:
    """Linear schedule ``(1 - s) H_B + s H_C``."""
    H_B = np.asarray(H_B)
    H_C = np.asarray(H_C)
    if H_B.shape != H_C.shape:
        raise InvalidShapeError(f"shapes differ: {H_B.shape} vs {H_C.shape}")
    if not 0.0 <= s <= 1.0:
        raise ContractViolationError(f"interpolation parameter must lie in [0, 1], got {s}")
    return (1.0 - s) * H_B + s * H_C


# -- state providers ---------------------------------------------------------
# A provider maps a step index to (psi, update_term): the n-dimensional state
# scored by qtv and the n x n density matrix fed into the update.


def _scored_states(psi_BA, rho, d):
    """The system state a step is scored with: ``psi_BA`` itself when the
    ancilla is trivial, else the leading eigenvector of the reduced state."""
    if d == 1:
        return psi_BA[..., :, 0] if psi_BA.ndim == rho.ndim else psi_BA
    _, V = np.linalg.eigh(rho)
    return V[..., :, -1]


class RandomBipartiteProvider:
    """Fresh Gaussian bipartite state every step."""

    def __init__(self, n, d, stream: RandomStream):
        self.n, self.d, self.stream = n, d, stream

    def __call__(self, t):
        psi_BA = bipartite_state(self.n, self.d, self.stream)
        rho = partial_trace_A(psi_BA, self.n, self.d)
        return _scored_states(psi_BA, rho, self.d), rho


class EntangledProvider:
    """Deterministic wave function routed through a fixed entangling unitary.

    ``wavefunction(t)`` gives the system state; it is tensored with an ancilla
    ``phi_A`` and rotated by ``U_BA``, both drawn once from ``stream``. The
    update term is the reduced state on the system. ``dt`` converts step index
    to time. ``wavefunction`` must accept an array of times and return one
    state per row for :meth:`batch`.
    """

    def __init__(self, wavefunction: Callable[[float], np.ndarray], n, d, stream: RandomStream,
                 dt=1.0, entangling=True):
        self.wavefunction = wavefunction
        self.n, self.d, self.dt = n, d, dt
        self.phi_A = gaussian_state(d, stream.split(STREAM_ANCILLA))
        if entangling:
            self.U = haar_unitary(n * d, stream.split(STREAM_UNITARY))
        else:
            self.U = np.eye(n * d)

    def __call__(self, t):
        psi = self.wavefunction(t * self.dt)
        psi_BA = entangle(psi, self.phi_A, self.U)
        rho = partial_trace_A(psi_BA, self.n, self.d)
        return _scored_states(psi_BA, rho, self.d), rho

    def batch(self, count):
        psi = np.asarray(self.wavefunction(np.arange(count) * self.dt))
        joint = (psi[:, :, None] * self.phi_A[None, None, :]).reshape(count, -1)
        C = (joint @ self.U.T).reshape(count, self.n, self.d)
        rho = C @ C.conj().transpose(0, 2, 1)
        return _scored_states(C, rho, self.d), rho


def _update_metrics(rhos):
    """Purity, entropy and coherence for a stack of density matrices."""
    w = np.linalg.eigvalsh(rhos)
    if w.size and w.min() < -1e-10:
        raise ContractViolationError(f"update term has negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    pur = np.sum(w * w, axis=1)
    safe = np.where(w >= 1e-12, w, 1.0)
    # clamp rounding below zero for pure states
    qee = np.maximum(0.0 - np.sum(np.where(w >= 1e-12, w * np.log(safe), 0.0), axis=1), 0.0) + 0.0
    off = ~np.eye(rhos.shape[1], dtype=bool)
    coh = np.abs(rhos[:, off]).sum(axis=1)
    return pur, qee, coh


def collect_states(provider, steps, n):
    """Query ``provider`` for steps ``0..max(steps, 1) - 1``; validate shapes."""
    count = max(steps, 1)
    if hasattr(provider, "batch"):
        psis, rhos = provider.batch(count)
        if psis.shape != (count, n) or rhos.shape != (count, n, n):
            raise InvalidShapeError(f"provider batch shapes {psis.shape}, {rhos.shape} do not match n={n}")
        traces = np.trace(rhos, axis1=1, axis2=2)
        herm = np.max(np.abs(rhos - rhos.conj().transpose(0, 2, 1)))
        if np.max(np.abs(traces - 1.0)) > 1e-10 or herm > 1e-10:
            raise ContractViolationError("provider produced an invalid density matrix")
        return psis, rhos
    psis = np.empty((count, n), dtype=complex)
    rhos = np.empty((count, n, n), dtype=complex)
    for t in range(count):
        psi, rho = provider(t)
        psi = np.asarray(psi).ravel()
        rho = np.asarray(rho)
        if psi.shape != (n,) or rho.shape != (n, n):
            raise InvalidShapeError(
                f"provider returned psi {psi.shape} and update {rho.shape} at step {t}; expected n={n}"
            )
        validate_density_matrix(rho)
        psis[t] = psi
        rhos[t] = rho
    return psis, rhos


def default_provider(config: EvolutionConfig, wavefunction=None):
    stream = RandomStream(config.seed)
    if config.state_source is StateSource.RANDOM_BIPARTITE:
        return RandomBipartiteProvider(config.n, config.d, stream.split(STREAM_STATES))
    if wavefunction is None:
        raise InvalidConfigurationError("blue_superposition source needs a wave function")
    return EntangledProvider(wavefunction, config.n, config.d, stream)


def evolve(config: EvolutionConfig, K, state_provider=None, *, full=True, backend=None) -> EvolutionResult:
    """Iterate the masked update ``config.steps`` times from ``init_hamiltonian(K)``.

    ``state_provider`` defaults to a fresh random bipartite state per step.
    ``full=False`` skips spectral radius, qtv and the update-term metrics
    (those record fields are NaN) for callers that only need the two-norm.
    """
    K = as_mask(K)
    if K.shape[0] != config.n:
        raise InvalidShapeError(f"mask is {K.shape[0]} x {K.shape[0]} but config.n = {config.n}")
    H0 = init_hamiltonian(K)
    if state_provider is None:
        state_provider = RandomBipartiteProvider(
            config.n, config.d, RandomStream(config.seed).split(STREAM_STATES)
        )
    psis, rhos = collect_states(state_provider, config.steps, config.n)
    T = config.steps
    abs_updates = np.abs(rhos[:T])
    # H(t) is scored with the state that produced it; H(0) with the first one
    scored = np.concatenate([psis[:1], psis[:T]]) if T else psis[:1]

    impl = kernels.get_backend(backend) if backend else kernels
    two, rad, q, tr, snaps, best, best_H, final_H = impl.masked_evolve(
        H0.H, K, abs_updates, scored, config.eta, config.lambda_decay,
        config.snapshot_stride, full,
    )

    if full:
        pur, qee, coh = _update_metrics(rhos)
        idx = np.concatenate([[0], np.arange(T)]) if T else np.array([0])
        pur, qee, coh = pur[idx], qee[idx], coh[idx]
    else:
        pur = qee = coh = np.full(T + 1, np.nan)
        rad = np.full(T + 1, np.nan)
        q = np.full(T + 1, np.nan + 0j)

    records = [
        TraceRecord(t, float(two[t]), float(rad[t]), float(q[t].real), float(abs(q[t])),
                    float(pur[t]), float(qee[t]), float(coh[t]), float(tr[t]))
        for t in range(T + 1)
    ]
    snapshots = {t: MaskedHamiltonian(h, K) for t, h in snaps.items()}
    return EvolutionResult(
        records=records,
        snapshots=snapshots,
        best_step=int(best),
        best=MaskedHamiltonian(best_H, K),
        final=MaskedHamiltonian(final_H, K),
        backend=impl.BACKEND,
    )


def page_mean_entropy(n: int, d: int) -> float:
    """Page's average subsystem entropy for a random pure state on ``n x d``."""
    m, N = min(n, d), max(n, d)
    return float(sum(1.0 / k for k in range(N + 1, m * N + 1)) - (m - 1) / (2.0 * N))


def page_monte_carlo(n: int, d: int, samples: int, stream: RandomStream):
    """Mean and standard error of the reduced-state entropy over random bipartite states."""
    if min(n, d, samples) < 1:
        raise InvalidDimensionError("n, d and samples must be >= 1")
    C = stream.complex_normal((samples, n, d))
    C /= np.linalg.norm(C, axis=(1, 2), keepdims=True)
    rhos = C @ C.conj().transpose(0, 2, 1)
    _, qee, _ = _update_metrics(rhos)
    stderr = float(qee.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return float(qee.mean()), stderr
