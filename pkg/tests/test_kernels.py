import numpy as np
import pytest

from qigsim import _pykernels, kernels
from qigsim.evolution import EvolutionConfig, StateSource, evolve
from qigsim.killweb import killweb_config, run_killweb

needs_cython = pytest.mark.skipif("cython" not in kernels.available_backends(),
                                  reason="compiled extension not built")


def random_inputs(rng, n, T):
    K = (rng.random((n, n)) < 0.5).astype(float)
    np.fill_diagonal(K, 1)
    psis = rng.normal(size=(T + 1, n)) + 1j * rng.normal(size=(T + 1, n))
    psis /= np.linalg.norm(psis, axis=1, keepdims=True)
    ups = np.abs(np.einsum("ti,tj->tij", psis[:T], psis[:T].conj()))
    return K / np.trace(K), K, ups, psis


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_python_always_available():
    assert "python" in kernels.available_backends()
    assert kernels.get_backend("python").BACKEND == "python"


@needs_cython
@pytest.mark.parametrize("n,T,full", [(1, 5, True), (4, 0, True), (6, 50, True), (10, 120, False), (70, 8, True)])
def test_backends_agree(rng, n, T, full):
    H0, K, ups, psis = random_inputs(rng, n, T)
    c = kernels.get_backend("cython").masked_evolve(H0, K, ups, psis, 0.6, 0.4, 7, full)
    p = _pykernels.masked_evolve(H0, K, ups, psis, 0.6, 0.4, 7, full)
    for a, b in zip(c[:4], p[:4]):
        assert np.allclose(a, b, rtol=1e-12, atol=1e-13)
    assert sorted(c[4]) == sorted(p[4])
    for t in c[4]:
        assert np.array_equal(c[4][t], p[4][t])
    assert c[5] == p[5]
    assert np.array_equal(c[6], p[6]) and np.array_equal(c[7], p[7])


@needs_cython
def test_evolve_backends_agree():
    cfg = EvolutionConfig(n=6, d=2, steps=60, seed=5, state_source=StateSource.RANDOM_BIPARTITE)
    K = np.tril(np.ones((6, 6)))
    a = evolve(cfg, K, backend="cython")
    b = evolve(cfg, K, backend="python")
    assert a.backend == "cython" and b.backend == "python"
    assert np.allclose(a.two_norms, b.two_norms, rtol=1e-12)
    assert np.array_equal(a.final.H, b.final.H)


@needs_cython
def test_killweb_backends_agree():
    a = run_killweb(killweb_config(seed=8), backend="cython")
    b = run_killweb(killweb_config(seed=8), backend="python")
    assert a.best_step == b.best_step
    assert a.peak_two_norm == pytest.approx(b.peak_two_norm, rel=1e-12)
    for ra, rb in zip(a.records, b.records):
        assert ra.spectral_radius == pytest.approx(rb.spectral_radius, rel=1e-10, abs=1e-13)
        assert ra.qtv_real == pytest.approx(rb.qtv_real, abs=1e-13)
