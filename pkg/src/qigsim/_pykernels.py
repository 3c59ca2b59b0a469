"""Pure numpy implementation of the evolution kernel.

Used when the compiled ``_ckernels`` extension is unavailable, and as the
reference the compiled path is tested against.
"""
import numpy as np

from qigsim.numkernel import DENSE_EIG_LIMIT, spectral_radius

BACKEND = "python"


def masked_evolve(H0, K, abs_updates, psis, eta, lam, stride, full=True):
    """Run ``H <- (1 - lam) H + eta (abs_updates[t] * K)`` and measure every iterate.

    Row ``t`` of each output describes ``H(t)`` for ``t = 0..T``; ``psis[t]`` is
    the state scored against ``H(t)``. With ``full=False`` only the two-norm
    and trace are computed (spectral radius and qtv come back as zeros).

    Returns ``(two_norm, spectral_radius, qtv, trace, snapshots, best_step,
    best_H, final_H)`` where ``snapshots`` maps every ``stride``-th step to
    its matrix.
    """
    H0 = np.ascontiguousarray(H0, dtype=np.float64)
    K = np.ascontiguousarray(K, dtype=np.float64)
    abs_updates = np.asarray(abs_updates, dtype=np.float64)
    T = abs_updates.shape[0]
    n = H0.shape[0]

    stack = np.empty((T + 1, n, n))
    stack[0] = H0
    decay = 1.0 - lam
    for t in range(T):
        stack[t + 1] = decay * stack[t] + eta * (abs_updates[t] * K)

    two = np.linalg.svd(stack, compute_uv=False)[:, 0]
    trace = np.trace(stack, axis1=1, axis2=2).copy()
    if full:
        if n <= DENSE_EIG_LIMIT:
            rad = np.max(np.abs(np.linalg.eigvals(stack)), axis=1)
        else:
            rad = np.array([spectral_radius(h) for h in stack])
        psis = np.asarray(psis, dtype=np.complex128)
        qtv = np.einsum("ti,tij,tj->t", psis.conj(), stack, psis)
    else:
        rad = np.zeros(T + 1)
        qtv = np.zeros(T + 1, dtype=np.complex128)

    best = int(np.argmax(two))
    snapshots = {}
    if stride > 0:
        for t in range(0, T + 1, stride):
            snapshots[t] = stack[t].copy()
    return two, rad, qtv, trace, snapshots, best, stack[best].copy(), stack[T].copy()
