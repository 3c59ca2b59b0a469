# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled evolution kernel.

Same contract as ``qigsim._pykernels.masked_evolve``. The iterate is updated
in place and measured per step with LAPACK (``dgesvd`` for the largest
singular value, ``dgeev`` for the spectral radius) through scipy's Cython
bindings, so the loop never returns to the interpreter.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.string cimport memcpy
from scipy.linalg.cython_lapack cimport dgesvd, dgeev

cnp.import_array()

from qigsim.numkernel import DENSE_EIG_LIMIT

BACKEND = "cython"


cdef class _Workspace:
    cdef int n, lwork_svd, lwork_eig
    cdef double[::1] a, s, wr, wi, work_svd, work_eig
    cdef double dummy[1]

    def __init__(self, int n):
        cdef int info = 0, m = n, lwork = -1, one = 1
        cdef char job = b'N'
        cdef double query
        self.n = n
        self.a = np.empty(n * n)
        self.s = np.empty(n)
        self.wr = np.empty(n)
        self.wi = np.empty(n)
        dgesvd(&job, &job, &m, &m, &self.a[0], &m, &self.s[0], self.dummy, &one,
               self.dummy, &one, &query, &lwork, &info)
        self.lwork_svd = max(<int>query, 5 * n)
        self.work_svd = np.empty(self.lwork_svd)
        lwork = -1
        dgeev(&job, &job, &m, &self.a[0], &m, &self.wr[0], &self.wi[0], self.dummy, &one,
              self.dummy, &one, &query, &lwork, &info)
        self.lwork_eig = max(<int>query, 3 * n)
        self.work_eig = np.empty(self.lwork_eig)

    cdef double two_norm(self, double[:, ::1] H) except -1:
        cdef int info = 0, m = self.n, one = 1, lwork = self.lwork_svd
        cdef char job = b'N'
        memcpy(&self.a[0], &H[0, 0], m * m * sizeof(double))
        dgesvd(&job, &job, &m, &m, &self.a[0], &m, &self.s[0], self.dummy, &one,
               self.dummy, &one, &self.work_svd[0], &lwork, &info)
        if info != 0:
            raise ArithmeticError(f"dgesvd failed with info={info}")
        return self.s[0]

    cdef double spectral_radius(self, double[:, ::1] H) except -1:
        # row-major H is read as its transpose, which has the same spectrum
        cdef int info = 0, m = self.n, one = 1, lwork = self.lwork_eig, k
        cdef char job = b'N'
        cdef double best = 0.0, mod
        memcpy(&self.a[0], &H[0, 0], m * m * sizeof(double))
        dgeev(&job, &job, &m, &self.a[0], &m, &self.wr[0], &self.wi[0], self.dummy, &one,
              self.dummy, &one, &self.work_eig[0], &lwork, &info)
        if info != 0:
            raise ArithmeticError(f"dgeev failed with info={info}")
        for k in range(m):
            mod = sqrt(self.wr[k] * self.wr[k] + self.wi[k] * self.wi[k])
            if mod > best:
                best = mod
        return best


def masked_evolve(H0, K, abs_updates, psis, double eta, double lam, Py_ssize_t stride,
                  bint full=True):
    cdef double[:, ::1] H = np.array(H0, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] Km = np.ascontiguousarray(K, dtype=np.float64)
    cdef double[:, :, ::1] U = np.ascontiguousarray(abs_updates, dtype=np.float64)
    cdef Py_ssize_t T = U.shape[0], n = H.shape[0]
    cdef double[::1] two = np.empty(T + 1)
    cdef double[::1] rad = np.zeros(T + 1)
    cdef double[::1] trace = np.empty(T + 1)
    cdef cnp.ndarray qtv_arr = np.zeros(T + 1, dtype=np.complex128)
    cdef double[::1] qre = np.zeros(T + 1), qim = np.zeros(T + 1)
    cdef double[:, ::1] pre, pim
    cdef double decay = 1.0 - lam, best_val = -1.0, tr, re, im, hij, xr, xi
    cdef Py_ssize_t t, i, j, best = 0
    cdef _Workspace ws = _Workspace(n)
    cdef dict snapshots = {}
    cdef cnp.ndarray best_H = np.empty((n, n))
    cdef double[:, ::1] best_view = best_H

    if full:
        p = np.asarray(psis, dtype=np.complex128)
        pre = np.ascontiguousarray(p.real)
        pim = np.ascontiguousarray(p.imag)
    if n > DENSE_EIG_LIMIT and full:
        from qigsim.numkernel import spectral_radius as py_radius

    for t in range(T + 1):
        if t > 0:
            for i in range(n):
                for j in range(n):
                    H[i, j] = decay * H[i, j] + eta * (U[t - 1, i, j] * Km[i, j])
        two[t] = ws.two_norm(H)
        tr = 0.0
        for i in range(n):
            tr += H[i, i]
        trace[t] = tr
        if full:
            if n <= DENSE_EIG_LIMIT:
                rad[t] = ws.spectral_radius(H)
            else:
                rad[t] = py_radius(np.asarray(H))
            # <psi|H|psi> with real H
            re = 0.0
            im = 0.0
            for i in range(n):
                xr = 0.0
                xi = 0.0
                for j in range(n):
                    hij = H[i, j]
                    xr += hij * pre[t, j]
                    xi += hij * pim[t, j]
                re += pre[t, i] * xr + pim[t, i] * xi
                im += pre[t, i] * xi - pim[t, i] * xr
            qre[t] = re
            qim[t] = im
        if two[t] > best_val:
            best_val = two[t]
            best = t
            memcpy(&best_view[0, 0], &H[0, 0], n * n * sizeof(double))
        if stride > 0 and t % stride == 0:
            snapshots[t] = np.array(H, copy=True)

    qtv_arr.real = np.asarray(qre)
    qtv_arr.imag = np.asarray(qim)
    return (np.asarray(two), np.asarray(rad), qtv_arr, np.asarray(trace), snapshots,
            int(best), best_H, np.array(H, copy=True))
