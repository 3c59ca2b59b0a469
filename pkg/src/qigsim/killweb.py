"""Kill-web scenario: a 10-capability feasibility mask evolved by a
four-category superposition state."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qigsim.errors import ContractViolationError, InvalidConfigurationError, InvalidShapeError
from qigsim.evolution import (
    EntangledProvider,
    EvolutionConfig,
    EvolutionResult,
    StateSource,
    default_provider,
    evolve,
)
from qigsim.numkernel import RandomStream, is_irreducible

CATEGORIES = ("C2", "Sensor", "Platform", "Weapon")

DEFAULT_WEIGHTS = (0.25, 0.25, 0.25, 0.25)
DEFAULT_ENERGIES = (0.0, 1.0, 2.0, 3.0)

_MASK = np.array(
    [
        [1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
        [1, 0, 1, 0, 0, 0, 0, 0, 0, 0],
        [0, 1, 1, 1, 0, 0, 0, 0, 0, 0],
        [0, 1, 1, 0, 1, 0, 0, 0, 0, 0],
        [0, 1, 1, 0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 1, 1, 1, 1, 0, 0, 0],
        [0, 0, 0, 1, 1, 1, 0, 1, 0, 0],
        [0, 0, 0, 1, 1, 1, 0, 0, 1, 0],
        [0, 0, 0, 1, 1, 1, 0, 0, 0, 1],
    ],
    dtype=np.float64,
)

# Final H as published for the T = 500 run, two decimals.
_REFERENCE_FINAL_H = np.array(
    [
        [0.05, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0.06, 0.08, 0, 0, 0, 0, 0, 0, 0, 0],
        [0.03, 0, 0.02, 0, 0, 0, 0, 0, 0, 0],
        [0, 0.19, 0.10, 0.45, 0, 0, 0, 0, 0, 0],
        [0, 0.06, 0.03, 0, 0.08, 0, 0, 0, 0, 0],
        [0, 0.05, 0.02, 0, 0, 0.03, 0, 0, 0, 0],
        [0, 0, 0, 0.13, 0.05, 0.04, 0.04, 0, 0, 0],
        [0, 0, 0, 0.19, 0.07, 0.05, 0, 0.08, 0, 0],
        [0, 0, 0, 0.17, 0.06, 0.04, 0, 0, 0.07, 0],
        [0, 0, 0, 0.19, 0.06, 0.04, 0, 0, 0, 0.08],
    ]
)


def killweb_mask() -> np.ndarray:
    return _MASK.copy()


def reference_final_H() -> np.ndarray:
    return _REFERENCE_FINAL_H.copy()


@dataclass(frozen=True)
class CategoryLayout:
    """Contiguous index blocks, one per capability category."""

    sizes: tuple = (1, 2, 3, 4)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ContractViolationError(f"category sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n(self):
        return sum(self.sizes)

    @property
    def ranges(self):
        edges = np.cumsum((0,) + self.sizes)
        return [range(a, b) for a, b in zip(edges[:-1], edges[1:])]


def category_basis(layout: CategoryLayout = CategoryLayout()) -> np.ndarray:
    """Columns are uniform superpositions over each category's indices."""
    B = np.zeros((layout.n, len(layout.sizes)), dtype=complex)
    for k, r in enumerate(layout.ranges):
        B[list(r), k] = 1.0 / np.sqrt(len(r))
    return B


def check_allocation(weights, count):
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != count:
        raise InvalidShapeError(f"expected {count} weights, got {w.size}")
    if (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
        raise ContractViolationError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")
    return w


def blue_state(weights, energies, t, layout: CategoryLayout = CategoryLayout()) -> np.ndarray:
    k = len(layout.sizes)
    w = check_allocation(weights, k)
    E = np.asarray(energies, dtype=float).ravel()
    if E.size != k:
        raise InvalidShapeError(f"expected {k} energies, got {E.size}")
    return category_basis(layout) @ (np.sqrt(w) * np.exp(-1j * E * t))


@dataclass
class ScenarioResult:
    evolution: EvolutionResult
    weights: np.ndarray
    energies: np.ndarray
    seed: int
    irreducible_mask: bool = False

    @property
    def records(self):
        return self.evolution.records

    @property
    def best_H(self):
        return self.evolution.best

    @property
    def best_step(self):
        return self.evolution.best_step

    @property
    def final_H(self):
        return self.evolution.final

    @property
    def peak_two_norm(self):
        return self.evolution.peak_two_norm

    @property
    def final_two_norm(self):
        return self.evolution.final_two_norm


def killweb_config(**overrides) -> EvolutionConfig:
    params = dict(eta=0.7, lambda_decay=0.7, steps=500, n=10, d=1, seed=0,
                  state_source=StateSource.BLUE_SUPERPOSITION)
    params.update(overrides)
    return EvolutionConfig(**params)


def run_killweb(config: EvolutionConfig | None = None, weights=DEFAULT_WEIGHTS,
                energies=DEFAULT_ENERGIES, *, full=True, backend=None) -> ScenarioResult:
    """Evolve the kill-web mask under the blue superposition state.

    Each step the blue state at ``t = step`` is tensored with a seeded ancilla
    and rotated by a seeded Haar unitary on the joint space (drawn once per
    run); the reduced state on the capabilities drives the update.
    """
    config = config or killweb_config()
    if config.n != 10:
        raise InvalidConfigurationError(f"kill-web scenario has n = 10, got n = {config.n}")
    w = check_allocation(weights, 4)
    E = np.asarray(energies, dtype=float).ravel()
    if E.size != 4:
        raise InvalidShapeError(f"expected 4 energies, got {E.size}")
    basis = category_basis()
    amps = np.sqrt(w)

    def wavefunction(t):
        # t may be an array of times, one state per row
        return (amps * np.exp(-1j * E * np.asarray(t)[..., None])) @ basis.T

    if config.state_source is StateSource.BLUE_SUPERPOSITION:
        provider = EntangledProvider(wavefunction, config.n, config.d, RandomStream(config.seed))
    else:
        provider = default_provider(config)
    K = killweb_mask()
    result = evolve(config, K, provider, full=full, backend=backend)
    return ScenarioResult(result, w, E, config.seed, is_irreducible(K))


def killweb_scenario(config: EvolutionConfig | None = None):
    """``(weights, energies) -> peak two-norm`` of a fixed-seed kill-web run."""
    config = config or killweb_config()

    def scenario(weights, energies):
        return run_killweb(config, weights, energies, full=False).peak_two_norm

    return scenario


def optimize_killweb(config: EvolutionConfig | None = None, search=None):
    from qigsim.qig import SearchConfig, optimize_superposition

    config = config or killweb_config()
    search = search or SearchConfig(seed=config.seed)
    return optimize_superposition(killweb_scenario(config), search, components=4)
