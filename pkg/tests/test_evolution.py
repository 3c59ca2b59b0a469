import numpy as np
import pytest

from qigsim.errors import (
    ContractViolationError,
    InvalidConfigurationError,
    InvalidDimensionError,
    InvalidMaskError,
    InvalidShapeError,
)
from qigsim.evolution import (
    EntangledProvider,
    EvolutionConfig,
    MaskedHamiltonian,
    StateSource,
    bipartite_state,
    entangle,
    evolve,
    init_hamiltonian,
    interpolate,
    page_mean_entropy,
    page_monte_carlo,
    partial_trace_A,
    step,
)
from qigsim.killweb import killweb_mask
from qigsim.numkernel import RandomStream, haar_unitary
from qigsim.quantum_state import entanglement_entropy, purity

from conftest import random_density, random_unit


def brute_partial_trace(psi, n, d):
    rho = np.outer(psi, psi.conj())
    out = np.zeros((n, n), dtype=complex)
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1
        P = np.kron(np.eye(n), e[None, :])  # <j|_A as an n x nd map
        out += P @ rho @ P.T
    return out


def random_mask(rng, n):
    K = (rng.random((n, n)) < 0.4).astype(float)
    np.fill_diagonal(K, 1)
    return K


def cfg(**kw):
    base = dict(steps=40, n=5, d=2, seed=3, state_source=StateSource.RANDOM_BIPARTITE, snapshot_stride=5)
    base.update(kw)
    return EvolutionConfig(**base)


class TestInit:
    def test_identity(self):
        assert np.allclose(init_hamiltonian(np.eye(3)).H, np.eye(3) / 3)

    def test_ones(self):
        assert np.allclose(init_hamiltonian(np.ones((4, 4))).H, 0.25)

    def test_killweb(self):
        K = killweb_mask()
        H = init_hamiltonian(K).H
        assert K.sum() == 30
        assert np.allclose(H[K == 1], 0.1) and np.all(H[K == 0] == 0)
        assert np.trace(H) == pytest.approx(1.0, abs=1e-15)

    def test_zero_diagonal(self):
        with pytest.raises(InvalidMaskError):
            init_hamiltonian(np.ones((2, 2)) - np.eye(2))

    def test_non_binary(self):
        with pytest.raises(InvalidMaskError):
            init_hamiltonian(np.full((2, 2), 0.5))


class TestMaskedHamiltonian:
    def test_rejects_off_mask(self):
        with pytest.raises(ContractViolationError):
            MaskedHamiltonian(np.ones((2, 2)), np.eye(2))

    def test_rejects_negative(self):
        with pytest.raises(ContractViolationError):
            MaskedHamiltonian(-np.eye(2), np.eye(2))


class TestBipartite:
    def test_normalized(self, stream):
        for n in range(1, 5):
            for d in range(1, 5):
                psi = bipartite_state(n, d, stream)
                assert psi.shape == (n * d,)
                assert abs(np.linalg.norm(psi) - 1) <= 1e-12

    def test_deterministic(self):
        assert np.array_equal(bipartite_state(2, 2, RandomStream(7)), bipartite_state(2, 2, RandomStream(7)))

    def test_zero_dim(self, stream):
        with pytest.raises(InvalidDimensionError):
            bipartite_state(0, 2, stream)


class TestPartialTrace:
    def test_product(self, rng):
        phi, chi = random_unit(rng, 3), random_unit(rng, 2)
        rho = partial_trace_A(np.kron(phi, chi), 3, 2)
        assert np.allclose(rho, np.outer(phi, phi.conj()))
        assert purity(rho) == pytest.approx(1.0, abs=1e-10)

    def test_bell(self):
        bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert np.allclose(partial_trace_A(bell, 2, 2), np.eye(2) / 2)

    def test_mismatch(self):
        with pytest.raises(InvalidShapeError):
            partial_trace_A(np.ones(5) / np.sqrt(5), 2, 2)

    def test_brute_force(self, stream):
        for n in range(1, 5):
            for d in range(1, 5):
                for _ in range(100):
                    psi = bipartite_state(n, d, stream)
                    assert np.max(np.abs(partial_trace_A(psi, n, d) - brute_partial_trace(psi, n, d))) <= 1e-12

    def test_page_two_by_two(self):
        mean, err = page_monte_carlo(2, 2, 10_000, RandomStream(11))
        assert abs(mean - 1 / 3) <= 0.01
        assert err < 0.01

    def test_page_three_by_three(self):
        mean, _ = page_monte_carlo(3, 3, 10_000, RandomStream(12))
        assert abs(mean - page_mean_entropy(3, 3)) <= 0.01

    def test_page_formula(self):
        assert page_mean_entropy(2, 2) == pytest.approx(1 / 3)
        assert page_mean_entropy(3, 3) == pytest.approx(sum(1 / k for k in range(4, 10)) - 1 / 3)
        assert page_mean_entropy(2, 1) == 0

    def test_page_pure(self):
        mean, _ = page_monte_carlo(2, 1, 100, RandomStream(1))
        assert abs(mean) <= 1e-9


class TestEntangle:
    def test_identity_separable(self, rng):
        out = entangle(random_unit(rng, 3), random_unit(rng, 2), np.eye(6))
        assert purity(partial_trace_A(out, 3, 2)) == pytest.approx(1.0, abs=1e-10)

    def test_trivial_ancilla(self, stream, rng):
        U = haar_unitary(4, stream)
        psi = random_unit(rng, 4)
        out = entangle(psi, [1.0], U)
        assert np.allclose(out, U @ psi)
        assert purity(partial_trace_A(out, 4, 1)) == pytest.approx(1.0, abs=1e-10)

    def test_cnot_bell(self):
        cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
        out = entangle(np.array([1, 1]) / np.sqrt(2), [1, 0], cnot)
        assert np.allclose(out, np.array([1, 0, 0, 1]) / np.sqrt(2))
        assert purity(partial_trace_A(out, 2, 2)) == pytest.approx(0.5, abs=1e-12)

    def test_non_unitary(self):
        with pytest.raises(ContractViolationError):
            entangle([1, 0], [1, 0], 2 * np.eye(4))

    def test_normalized_output(self, stream, rng):
        for _ in range(50):
            out = entangle(random_unit(rng, 3), random_unit(rng, 3), haar_unitary(9, stream))
            assert abs(np.linalg.norm(out) - 1) <= 1e-10


class TestStep:
    def test_eta_zero(self, rng):
        K = random_mask(rng, 4)
        H0 = init_hamiltonian(K)
        # eta = 0 is excluded from configs but allowed in a bare step
        H1 = step(H0, random_density(rng, 4), 0.0, 0.5)
        assert np.allclose(H1.H, 0.5 * H0.H)

    def test_mask_and_trace(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 7))
            K = random_mask(rng, n)
            H = init_hamiltonian(K)
            for _ in range(5):
                H = step(H, random_density(rng, n), 0.7, 0.7)
                assert np.all(H.H[K == 0] == 0)
                assert np.all(H.H >= 0)
                assert np.trace(H.H) == pytest.approx(1.0, abs=1e-12)

    def test_trace_law_general(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 7))
            K = random_mask(rng, n)
            K[rng.integers(n), :] = 0  # allow zero diagonal entries past init
            K[0, 0] = 1
            eta, lam = rng.random() + 0.01, rng.random()
            H = init_hamiltonian(K)
            rho = random_density(rng, n)
            new = step(H, rho, eta, lam)
            expected = (1 - lam) * np.trace(H.H) + eta * np.sum(np.diag(K) * np.diag(rho).real)
            assert np.trace(new.H) == pytest.approx(expected, abs=1e-12)

    def test_shape_mismatch(self, rng):
        with pytest.raises(InvalidShapeError):
            step(init_hamiltonian(np.eye(3)), random_density(rng, 2), 0.7, 0.7)


class TestInterpolate:
    def test_ends(self, rng):
        A, B = rng.random((3, 3)), rng.random((3, 3))
        assert np.array_equal(interpolate(A, B, 0), A)
        assert np.array_equal(interpolate(A, B, 1), B)

    def test_mid(self):
        assert np.allclose(interpolate(np.diag([1, 0]), np.diag([0, 1]), 0.5), np.eye(2) / 2)

    def test_bad_s(self):
        with pytest.raises(ContractViolationError):
            interpolate(np.eye(2), np.eye(2), 1.5)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(eta=0), dict(lambda_decay=1.5), dict(n=0), dict(d=0),
                                    dict(steps=-1), dict(seed=-1), dict(seed=2**64)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfigurationError):
            EvolutionConfig(**kw)

    def test_source_string(self):
        assert EvolutionConfig(state_source="random_bipartite").state_source is StateSource.RANDOM_BIPARTITE


class TestEvolve:
    def test_zero_steps(self, rng):
        K = random_mask(rng, 5)
        res = evolve(cfg(steps=0), K)
        assert len(res.records) == 1
        assert np.array_equal(res.final.H, init_hamiltonian(K).H)

    def test_deterministic(self, rng):
        K = random_mask(rng, 5)
        a, b = evolve(cfg(), K), evolve(cfg(), K)
        assert a.records == b.records
        assert np.array_equal(a.final.H, b.final.H)

    def test_seed_changes_run(self, rng):
        K = random_mask(rng, 5)
        assert evolve(cfg(seed=1), K).records != evolve(cfg(seed=2), K).records

    def test_structural_laws(self, rng):
        for seed in range(20):
            K = random_mask(rng, 5)
            res = evolve(cfg(seed=seed), K)
            for r in res.records:
                assert r.trace_H == pytest.approx(1.0, abs=1e-12)
                assert r.two_norm <= 1 + 1e-9
            for _, H in res.trajectory:
                assert np.all(H.H[K == 0] == 0) and np.all(H.H >= 0)

    def test_records_match_direct_loop(self, rng):
        # replay the update with step() and compare norms
        K = random_mask(rng, 4)
        c = cfg(n=4, d=3, steps=15)
        res = evolve(c, K)
        stream = RandomStream(c.seed).split(0)
        H = init_hamiltonian(K)
        for t in range(c.steps):
            rho = partial_trace_A(bipartite_state(4, 3, stream), 4, 3)
            H = step(H, rho, c.eta, c.lambda_decay)
            assert res.records[t + 1].two_norm == pytest.approx(np.linalg.norm(H.H, 2), abs=1e-12)
            assert res.records[t + 1].purity == pytest.approx(purity(rho), abs=1e-12)
            assert res.records[t + 1].qee == pytest.approx(entanglement_entropy(rho), abs=1e-9)
        assert np.allclose(res.final.H, H.H, atol=1e-14)

    def test_snapshots(self, rng):
        res = evolve(cfg(steps=40, snapshot_stride=5), random_mask(rng, 5))
        assert sorted(res.snapshots) == list(range(0, 41, 5))
        assert res.best_step == int(np.argmax(res.two_norms))
        assert np.array_equal(res.best.H, res.snapshots.get(res.best_step, res.best).H)

    def test_halving(self, rng):
        # eta is tiny but positive; the decay dominates
        K = random_mask(rng, 4)
        res = evolve(cfg(n=4, eta=1e-300, lambda_decay=0.5, steps=10), K)
        tr = [r.trace_H for r in res.records]
        for a, b in zip(tr, tr[1:]):
            assert b == pytest.approx(a / 2, rel=1e-12)

    def test_qtv_bound(self, rng):
        res = evolve(cfg(steps=100), random_mask(rng, 5))
        for r in res.records:
            assert r.qtv_abs <= r.two_norm + 1e-9

    def test_symmetric_mask_hermitian_bound(self, rng):
        K = np.ones((4, 4))
        res = evolve(cfg(n=4, steps=60), K)
        for r in res.records:
            assert r.qtv_abs <= r.spectral_radius + 1e-9

    def test_mask_size_mismatch(self, rng):
        with pytest.raises(InvalidShapeError):
            evolve(cfg(n=4), random_mask(rng, 5))

    def test_bad_provider(self, rng):
        def provider(t):
            return np.ones(3) / np.sqrt(3), np.eye(3) / 3

        with pytest.raises(InvalidShapeError):
            evolve(cfg(n=5), random_mask(rng, 5), provider)

    def test_callable_provider(self, rng):
        def provider(t):
            v = np.zeros(5)
            v[t % 5] = 1
            return v, np.outer(v, v)

        res = evolve(cfg(steps=10), np.eye(5), provider)
        assert res.records[1].purity == 1
        assert all(r.trace_H == pytest.approx(1.0) for r in res.records)

    def test_lite_mode(self, rng):
        K = random_mask(rng, 5)
        full, lite = evolve(cfg(), K), evolve(cfg(), K, full=False)
        assert np.array_equal(full.two_norms, lite.two_norms)
        assert np.isnan(lite.records[3].qee)

    def test_entangled_provider_batch(self, rng):
        def wf(t):
            t = np.asarray(t)
            return np.stack([np.cos(t), np.sin(t) * 1j], axis=-1) * np.ones(1)

        prov = EntangledProvider(wf, 2, 3, RandomStream(4))
        psis, rhos = prov.batch(6)
        for t in range(6):
            psi, rho = prov(t)
            assert np.allclose(rho, rhos[t], atol=1e-14)
            assert abs(abs(np.vdot(psi, psis[t])) - 1) < 1e-10
