"""Masked Hamiltonian evolution driven by torus superposition states."""
from qigsim.kernels import BACKEND, available_backends
from qigsim.evolution import EvolutionConfig, StateSource, evolve
from qigsim.killweb import run_killweb, killweb_config
from qigsim.quantum_state import SuperpositionState, purity, entanglement_entropy, coherence

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "available_backends", "EvolutionConfig", "StateSource", "evolve",
    "run_killweb", "killweb_config", "SuperpositionState", "purity",
    "entanglement_entropy", "coherence", "__version__",
]
