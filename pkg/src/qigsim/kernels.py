"""Kernel dispatch: the compiled extension when it imports, numpy otherwise."""
from qigsim import _pykernels

try:
    from qigsim import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"

masked_evolve = (_ckernels or _pykernels).masked_evolve


def available_backends():
    return ["cython", "python"] if _ckernels is not None else ["python"]


def get_backend(name):
    if name == "python":
        return _pykernels
    if name == "cython" and _ckernels is not None:
        return _ckernels
    raise ValueError(f"kernel backend {name!r} is not available")
