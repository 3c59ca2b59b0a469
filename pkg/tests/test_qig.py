import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qigsim.errors import ContractViolationError, InvalidConfigurationError, InvalidIndexError
from qigsim.killweb import killweb_config, killweb_scenario
from qigsim.measurement import qtv, rank1_operator
from qigsim.qig import (
    Allocation,
    SearchConfig,
    agent_value,
    best_response,
    complement_value,
    deviate,
    nash_check,
    optimize_superposition,
)

ALPHA = np.pi / 6  # sin^2 = 0.25, a point of the 101-grid


def alignment_objective(alpha=ALPHA):
    H = rank1_operator(alpha)

    def objective(alloc):
        # equal energies, so the phase is irrelevant
        psi = np.sqrt(alloc.as_array())
        return qtv(psi, H).real

    return objective


def random_alloc(rng, k):
    w = rng.random(k)
    return Allocation(tuple(w / w.sum()))


class TestAllocation:
    def test_simplex(self):
        with pytest.raises(ContractViolationError):
            Allocation((0.5, 0.6))
        with pytest.raises(ContractViolationError):
            Allocation((1.5, -0.5))

    def test_values(self):
        a = Allocation((0.3, 0.7))
        assert agent_value(a, 0) == 0.3
        assert all(agent_value(Allocation.uniform(4), l) == 0.25 for l in range(4))

    def test_complement(self, rng):
        for _ in range(200):
            a = random_alloc(rng, int(rng.integers(1, 8)))
            for l in range(len(a)):
                assert agent_value(a, l) + complement_value(a, l) == pytest.approx(1.0, abs=1e-12)

    def test_index(self):
        with pytest.raises(InvalidIndexError):
            agent_value(Allocation((1.0,)), 1)


class TestDeviate:
    def test_proportional(self):
        a = deviate(Allocation((0.2, 0.3, 0.5)), 0, 0.6)
        assert np.allclose(a.values, (0.6, 0.15, 0.25))
        assert not a.redistributed

    def test_two_agent_complement(self):
        assert np.allclose(deviate(Allocation((0.2, 0.8)), 1, 0.35).values, (0.65, 0.35))

    def test_degenerate_redistribution(self):
        a = deviate(Allocation((1.0, 0.0, 0.0)), 0, 0.4)
        assert np.allclose(a.values, (0.4, 0.3, 0.3))
        assert a.redistributed

    def test_bad_value(self):
        with pytest.raises(ContractViolationError):
            deviate(Allocation.uniform(3), 0, 1.2)

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=6), st.integers(0, 5), st.floats(0, 1))
    def test_closure(self, raw, l, value):
        total = sum(raw)
        if total <= 0:
            return
        a = Allocation(tuple(np.array(raw) / total))
        l = l % len(a)
        if len(a) == 1:
            value = 1.0
        b = deviate(a, l, value)
        assert min(b.values) >= 0 and abs(sum(b.values) - 1) <= 1e-12
        assert b.values[l] == value


class TestBestResponse:
    def test_alignment_optimum(self):
        br = best_response(1, Allocation((0.5, 0.5)), alignment_objective())
        assert br.values[1] == pytest.approx(np.sin(ALPHA) ** 2, abs=1e-12)

    def test_fixed_point(self):
        a = Allocation((0.75, 0.25))
        assert best_response(0, a, alignment_objective()) is a

    def test_concave_grid_cell(self, rng):
        for target in rng.random(20):
            def objective(alloc, target=target):
                return -(alloc.values[0] - target) ** 2

            br = best_response(0, Allocation((0.5, 0.5)), objective, grid_points=51)
            assert abs(br.values[0] - target) <= 1 / 50

    def test_monotone(self, rng):
        for _ in range(100):
            k = int(rng.integers(2, 5))
            coef = rng.normal(size=k)
            objective = lambda a, c=coef: float(np.dot(c, np.sqrt(a.as_array())))
            a = random_alloc(rng, k)
            l = int(rng.integers(k))
            assert objective(best_response(l, a, objective, 21)) >= objective(a) - 1e-12


class TestNash:
    def test_optimum(self):
        a = Allocation((0.75, 0.25))
        f = alignment_objective()
        assert nash_check(a, [f, f], epsilon=1e-3)

    def test_perturbed(self):
        a = Allocation((0.65, 0.35))
        f = alignment_objective()
        assert not nash_check(a, [f, f], epsilon=1e-3)

    def test_single_agent(self):
        assert nash_check(Allocation((1.0,)), [lambda a: 0.0])

    def test_objective_count(self):
        with pytest.raises(ContractViolationError):
            nash_check(Allocation.uniform(2), [lambda a: 0.0])

    def test_consistency_random_games(self, rng):
        eps = 1e-3
        for _ in range(100):
            k = int(rng.integers(1, 5))
            coefs = rng.normal(size=(k, k))
            objectives = [lambda a, c=c: float(np.dot(c, np.sqrt(a.as_array()))) for c in coefs]
            a = random_alloc(rng, k)
            if k == 1:
                a = Allocation((1.0,))
            if nash_check(a, objectives, eps, 21):
                for l, f in enumerate(objectives):
                    assert f(best_response(l, a, f, 21)) - f(a) <= eps


def bumpy(weights, energies):
    x = weights[0]
    return float(np.sin(7 * x) * np.exp(-x) + 0.1 * np.cos(3 * x) + 0.01 * energies[1])


def smooth4(weights, energies):
    c = np.array([0.3, 1.0, 0.6, 0.2])
    return float(np.dot(c, np.sqrt(weights)) - 0.01 * np.sum((np.asarray(energies) - 2.5) ** 2))


class TestOptimize:
    def test_exhaustive_single_axis(self):
        search = SearchConfig(grid_points=41, restarts=3, fixed_energies=(0.0, 1.0))
        res = optimize_superposition(bumpy, search, components=2)
        grid = np.linspace(0, 1, 41)
        values = [bumpy(np.array([x, 1 - x]), np.array([0.0, 1.0])) for x in grid]
        assert res.peak_two_norm == max(values)
        assert res.best_weights.values[0] == grid[int(np.argmax(values))]

    def test_incumbent_consistency(self):
        res = optimize_superposition(smooth4, SearchConfig(seed=5), components=4)
        assert res.peak_two_norm == smooth4(res.best_weights.as_array(), res.best_energies)
        assert res.best_energies[0] == 0

    def test_history_nondecreasing(self):
        for seed in range(20):
            res = optimize_superposition(smooth4, SearchConfig(seed=seed, grid_points=6, restarts=2), components=4)
            h = np.array(res.history)
            assert np.all(np.diff(h) >= 0)
            assert h[-1] == res.peak_two_norm
            assert len(h) == res.evaluations

    def test_deterministic(self):
        a = optimize_superposition(smooth4, SearchConfig(seed=2, grid_points=5), components=4)
        b = optimize_superposition(smooth4, SearchConfig(seed=2, grid_points=5), components=4)
        assert a.history == b.history and a.best_weights == b.best_weights

    def test_not_converged(self):
        res = optimize_superposition(smooth4, SearchConfig(max_rounds=1, restarts=1), components=4)
        assert not res.converged

    def test_simplex_of_result(self):
        res = optimize_superposition(smooth4, SearchConfig(seed=9, grid_points=7), components=4)
        assert abs(sum(res.best_weights.values) - 1) <= 1e-12

    @pytest.mark.parametrize("kw", [dict(grid_points=1), dict(tolerance=0), dict(restarts=0),
                                    dict(energy_bounds=(2, 1))])
    def test_bad_config(self, kw):
        with pytest.raises(InvalidConfigurationError):
            SearchConfig(**kw)

    def test_killweb_short(self):
        scenario = killweb_scenario(killweb_config(steps=60, seed=4))
        res = optimize_superposition(scenario, SearchConfig(grid_points=4, restarts=1, max_rounds=2, seed=4))
        assert res.peak_two_norm == pytest.approx(scenario(res.best_weights.as_array(), res.best_energies))
        assert np.all(np.diff(res.history) >= 0)
