"""Allocations on the probability simplex, unilateral deviations and a
seeded coordinate search over superposition parameters.

A deviation by agent ``l`` sets its own weight and rescales every other weight
proportionally, so the allocation stays on the simplex and the remaining
agents keep their relative shares.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from qigsim.errors import ContractViolationError, InvalidConfigurationError, InvalidIndexError
from qigsim.numkernel import RandomStream


@dataclass(frozen=True)
class Allocation:
    values: tuple
    # set when a deviation had to spread mass uniformly because every other
    # agent held zero weight
    redistributed: bool = False

    def __post_init__(self):
        values = tuple(float(v) for v in np.ravel(self.values))
        if not values:
            raise ContractViolationError("allocation needs at least one agent")
        if min(values) < 0 or abs(sum(values) - 1.0) > 1e-12:
            raise ContractViolationError(f"allocation is not on the simplex: {values}")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_array(self):
        return np.array(self.values)

    @classmethod
    def uniform(cls, k):
        return cls((1.0 / k,) * k)


def _check_index(alloc, l):
    if not 0 <= l < len(alloc):
        raise InvalidIndexError(f"agent index {l} out of range for {len(alloc)} agents")


def agent_value(alloc: Allocation, l: int) -> float:
    _check_index(alloc, l)
    return alloc.values[l]


def complement_value(alloc: Allocation, l: int) -> float:
    """Total weight held by everyone except agent ``l``."""
    _check_index(alloc, l)
    return float(sum(v for i, v in enumerate(alloc.values) if i != l))


def deviate(alloc: Allocation, l: int, value: float) -> Allocation:
    """Allocation with agent ``l`` at ``value`` and the rest rescaled proportionally."""
    _check_index(alloc, l)
    if not 0.0 <= value <= 1.0:
        raise ContractViolationError(f"deviation value must lie in [0, 1], got {value}")
    w = alloc.as_array()
    others = np.delete(w, l)
    rest = 1.0 - value
    redistributed = False
    if others.size == 0:
        if value != 1.0:
            raise ContractViolationError("a single agent must hold all the weight")
        new_others = others
    elif others.sum() > 0:
        new_others = others / others.sum() * rest
    else:
        new_others = np.full(others.size, rest / others.size)
        redistributed = rest > 0
    return Allocation(tuple(np.insert(new_others, l, value)), redistributed)


def deviation_grid(alloc: Allocation, l: int, grid_points: int):
    if grid_points < 2:
        raise InvalidConfigurationError(f"grid_points must be >= 2, got {grid_points}")
    if len(alloc) == 1:
        return []
    return [deviate(alloc, l, x) for x in np.linspace(0.0, 1.0, grid_points)]


def best_response(l: int, alloc: Allocation, objective: Callable[[Allocation], float],
                  grid_points: int = 101) -> Allocation:
    """Best grid deviation of agent ``l``; ``alloc`` itself wins ties."""
    _check_index(alloc, l)
    best, best_val = alloc, objective(alloc)
    for cand in deviation_grid(alloc, l, grid_points):
        val = objective(cand)
        if val > best_val:
            best, best_val = cand, val
    return best


def nash_check(alloc: Allocation, objectives: Sequence[Callable[[Allocation], float]],
               epsilon: float = 1e-3, grid_points: int = 101) -> bool:
    """True iff no agent gains more than ``epsilon`` by a unilateral grid deviation."""
    if len(objectives) != len(alloc):
        raise ContractViolationError(f"{len(objectives)} objectives for {len(alloc)} agents")
    for l, obj in enumerate(objectives):
        current = obj(alloc)
        br = best_response(l, alloc, obj, grid_points)
        if obj(br) - current > epsilon:
            return False
    return True


@dataclass(frozen=True)
class SearchConfig:
    grid_points: int = 11
    restarts: int = 3
    max_rounds: int = 10
    tolerance: float = 1e-9
    seed: int = 0
    energy_bounds: tuple = (0.0, 10.0)
    # None searches energies; a sequence pins them
    fixed_energies: tuple | None = None

    def __post_init__(self):
        if self.grid_points < 2:
            raise InvalidConfigurationError("grid_points must be >= 2")
        if self.restarts < 1 or self.max_rounds < 1:
            raise InvalidConfigurationError("restarts and max_rounds must be >= 1")
        if not self.tolerance > 0:
            raise InvalidConfigurationError("tolerance must be > 0")
        lo, hi = self.energy_bounds
        if not lo <= hi:
            raise InvalidConfigurationError(f"bad energy bounds {self.energy_bounds}")


@dataclass
class SearchResult:
    best_weights: Allocation
    best_energies: np.ndarray
    peak_two_norm: float
    converged: bool
    evaluations: int
    # incumbent value after every distinct evaluation
    history: list = field(default_factory=list)


def _lattice_start(components, grid_points, stream):
    """Weights ``grid[c_i]`` for a composition ``c`` of ``grid_points - 1`` units."""
    units = grid_points - 1
    if stream is None:
        base, extra = divmod(units, components)
        counts = [base + (i < extra) for i in range(components)]
    else:
        cuts = np.sort(np.minimum((stream.uniform(components - 1) * (units + 1)).astype(int), units))
        counts = np.diff(np.concatenate([[0], cuts, [units]])).tolist()
    grid = np.linspace(0.0, 1.0, grid_points)
    head = [float(grid[c]) for c in counts[:-1]]
    return Allocation(tuple(head) + (max(0.0, 1.0 - sum(head)),))


def optimize_superposition(scenario: Callable[[np.ndarray, np.ndarray], float],
                           search: SearchConfig, components: int = 4) -> SearchResult:
    """Random-restart coordinate ascent of ``scenario(weights, energies)``.

    Each round sweeps every weight axis except the last (the last absorbs the
    simplex slack) over an evenly spaced grid of deviations, then every energy
    except the first (pinned to 0, only differences matter) over a grid on
    ``energy_bounds``. A restart stops when a round gains no more than
    ``tolerance``. Starting weights lie on the sweep grid (the most even
    split for restart 0, seeded random splits after), so with a single free
    weight axis every weight ever evaluated is a grid point. Energies start at
    a seeded random point unless fixed.
    """
    g = search.grid_points
    lo, hi = search.energy_bounds
    energy_grid = np.linspace(lo, hi, g)
    cache = {}
    history = []
    incumbent = [None, -np.inf, None]  # weights, value, energies

    def evaluate(alloc, energies):
        key = (alloc.values, tuple(energies))
        if key not in cache:
            val = float(scenario(alloc.as_array(), np.array(energies)))
            cache[key] = val
            if val > incumbent[1]:
                incumbent[:] = [alloc, val, np.array(energies)]
            history.append(incumbent[1])
        return cache[key]

    converged_all = True
    for r in range(search.restarts):
        stream = RandomStream(search.seed, r)
        alloc = _lattice_start(components, g, None if r == 0 else stream)
        if search.fixed_energies is not None:
            energies = [float(e) for e in search.fixed_energies]
            if len(energies) != components:
                raise InvalidConfigurationError(f"need {components} fixed energies")
        else:
            energies = [0.0] + list(lo + (hi - lo) * stream.uniform(components - 1))
        value = evaluate(alloc, energies)

        converged = False
        for _ in range(search.max_rounds):
            start = value
            for l in range(components - 1):
                for cand in deviation_grid(alloc, l, g):
                    v = evaluate(cand, energies)
                    if v > value:
                        alloc, value = cand, v
            if search.fixed_energies is None:
                for j in range(1, components):
                    for e in energy_grid:
                        trial = list(energies)
                        trial[j] = float(e)
                        v = evaluate(alloc, trial)
                        if v > value:
                            energies, value = trial, v
            if value - start <= search.tolerance:
                converged = True
                break
        converged_all &= converged

    best_alloc, best_val, best_E = incumbent
    return SearchResult(best_alloc, best_E, best_val, converged_all, len(cache), history)
