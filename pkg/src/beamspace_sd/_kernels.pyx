# cython: language_level=3
"""Compiled estimator inner loops (direct BLAS/LAPACK calls).

Same contracts as :mod:`beamspace_sd._kernels_py`: 0-based indices,
first-maximum peak picking, final least squares against the original
measurement. The layout trick throughout: a C-ordered (Q, N) combiner
buffer read column-major is exactly W^T as an N x Q Fortran matrix, so
matched-filter scores are one zgemv and restricted solves gather columns
into a Fortran scratch block for zgels. zgels destroys its input, hence
the re-gather before each residual update. Rank failures are detected on
the QR diagonal (ratio below RDIAG_LIMIT) rather than through singular
values; both routes reject the same nominally degenerate systems.
"""

import numpy as np

from .numerics import SingularSystemError

from libc.math cimport INFINITY
from scipy.linalg.cython_blas cimport zgemv
from scipy.linalg.cython_lapack cimport zgels

BACKEND = "cython"

cdef double RDIAG_LIMIT = 1e-12

cdef char *TRANS_N = b"N"


cdef void _conj_into(double complex[::1] src, double complex[::1] dst) noexcept:
    cdef Py_ssize_t i
    for i in range(src.shape[0]):
        dst[i] = src[i].conjugate()


cdef void _scores(double complex[:, ::1] w, double complex[::1] rconj,
                  double complex[::1] y):
    """y = W^T conj(r); |y| are the matched-filter scores."""
    cdef int q = <int>w.shape[0], n = <int>w.shape[1], inc = 1
    cdef double complex one = 1.0, zero = 0.0
    zgemv(TRANS_N, &n, &q, &one, &w[0, 0], &n, &rconj[0], &inc, &zero,
          &y[0], &inc)


cdef Py_ssize_t _peak(double complex[::1] y, unsigned char *skip) noexcept:
    """Index of the largest |y_i| (first on ties), ignoring skipped entries."""
    cdef Py_ssize_t i, best = 0
    cdef double m, best_m = -1.0
    for i in range(y.shape[0]):
        if skip != NULL and skip[i]:
            continue
        m = y[i].real * y[i].real + y[i].imag * y[i].imag
        if m > best_m:
            best_m = m
            best = i
    return best


cdef void _gather(double complex[:, ::1] w, long long[::1] idx,
                  double complex[::1] a) noexcept:
    """Copy the idx columns of W into a as a Q x len(idx) Fortran block."""
    cdef Py_ssize_t i, j, q = w.shape[0]
    for j in range(idx.shape[0]):
        for i in range(q):
            a[j * q + i] = w[i, idx[j]]


cdef int _ls_in_place(double complex[::1] a, double complex[::1] b,
                      int q, int s, double complex[::1] work):
    """min ||A f - b|| via zgels: A is q x s Fortran in a (destroyed), the
    solution lands in b[:s]. Returns nonzero when A looks rank deficient."""
    cdef int info = 0, nrhs = 1, lwork = <int>work.shape[0]
    zgels(TRANS_N, &q, &s, &nrhs, &a[0], &q, &b[0], &q, &work[0], &lwork,
          &info)
    if info != 0:
        return 1
    cdef Py_ssize_t j
    cdef double d, dmin = INFINITY, dmax = 0.0
    for j in range(s):
        d = abs(a[j * q + j])
        if d < dmin:
            dmin = d
        if d > dmax:
            dmax = d
    if dmax == 0.0 or dmin / dmax < RDIAG_LIMIT:
        return 1
    return 0


cdef void _subtract_matvec(double complex[::1] a, double complex[::1] f,
                           int q, int s, double complex[::1] r):
    """r -= A f with A a q x s Fortran block in a, f in f[:s]."""
    cdef int inc = 1
    cdef double complex minus_one = -1.0, one = 1.0
    zgemv(TRANS_N, &q, &s, &minus_one, &a[0], &q, &f[0], &inc, &one,
          &r[0], &inc)


cdef int _query_lwork(int q, int s_max):
    cdef double complex probe = 0.0, dummy_a = 0.0, dummy_b = 0.0
    cdef int info = 0, nrhs = 1, lwork = -1
    zgels(TRANS_N, &q, &s_max, &nrhs, &dummy_a, &q, &dummy_b, &q, &probe,
          &lwork, &info)
    return max(<int>probe.real, 1)


def support_window(peak, width, n):
    """0-based circular index window, identical to the pure backend."""
    lo = peak - width // 2 if width % 2 == 0 else peak - (width - 1) // 2
    return (lo + np.arange(width, dtype=np.int64)) % n


def correlate(w, r):
    """Matched-filter scores |w_n^H r| for every column of w."""
    w_arr = np.ascontiguousarray(w, dtype=np.complex128)
    r_arr = np.ascontiguousarray(r, dtype=np.complex128)
    y = np.empty(w_arr.shape[1], dtype=np.complex128)
    rconj = np.empty(w_arr.shape[0], dtype=np.complex128)
    _conj_into(r_arr, rconj)
    _scores(w_arr, rconj, y)
    return np.abs(y)


def sd_core(double complex[:, ::1] w, double complex[::1] z,
            int n_components, int support_size):
    """Support-detection core; see the pure backend for the algorithm."""
    cdef int q = <int>w.shape[0], n = <int>w.shape[1]
    cdef int v = support_size, lp1 = n_components
    cdef int s_max = lp1 * v
    cdef int lwork = _query_lwork(q, s_max)

    peaks_np = np.empty(lp1, dtype=np.int64)
    windows_np = np.empty((lp1, v), dtype=np.int64)
    r_np = np.asarray(z).copy()
    cdef double complex[::1] r = r_np
    cdef double complex[::1] rconj = np.empty(q, dtype=np.complex128)
    cdef double complex[::1] y = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] a = np.empty(q * s_max, dtype=np.complex128)
    cdef double complex[::1] b = np.empty(q, dtype=np.complex128)
    cdef double complex[::1] work = np.empty(lwork, dtype=np.complex128)
    cdef long long[:, ::1] windows = windows_np
    cdef long long[::1] peaks = peaks_np
    cdef long long[::1] union_view
    cdef Py_ssize_t i, j, p
    cdef long long lo

    for i in range(lp1):
        _conj_into(r, rconj)
        _scores(w, rconj, y)
        p = _peak(y, NULL)
        peaks[i] = p
        lo = p - v // 2 if v % 2 == 0 else p - (v - 1) // 2
        for j in range(v):
            windows[i, j] = ((lo + j) % n + n) % n
        _gather(w, windows[i], a)
        b[:q] = r
        if _ls_in_place(a, b, q, v, work):
            raise SingularSystemError(
                f"rank-deficient restricted LS system ({q}x{v})",
                support=windows_np[i] + 1)
        _gather(w, windows[i], a)
        _subtract_matvec(a, b, q, v, r)

    union_np = np.unique(windows_np)
    union_view = union_np
    cdef int su = <int>union_np.shape[0]
    _gather(w, union_view, a)
    b[:q] = z
    if _ls_in_place(a, b, q, su, work):
        raise SingularSystemError(
            f"rank-deficient restricted LS system ({q}x{su})",
            support=union_np + 1)
    x_np = np.zeros(n, dtype=np.complex128)
    x_np[union_np] = np.asarray(b)[:su]
    return x_np, union_np, peaks_np


def omp_core(double complex[:, ::1] w, double complex[::1] z, int sparsity):
    """Matching-pursuit core; see the pure backend for the algorithm."""
    cdef int q = <int>w.shape[0], n = <int>w.shape[1]
    cdef int lwork = _query_lwork(q, sparsity)

    selected_np = np.empty(sparsity, dtype=np.int64)
    skip_np = np.zeros(n, dtype=np.uint8)
    r_np = np.asarray(z).copy()
    cdef double complex[::1] r = r_np
    cdef double complex[::1] rconj = np.empty(q, dtype=np.complex128)
    cdef double complex[::1] y = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] a = np.empty(q * sparsity, dtype=np.complex128)
    cdef double complex[::1] b = np.empty(q, dtype=np.complex128)
    cdef double complex[::1] work = np.empty(lwork, dtype=np.complex128)
    cdef long long[::1] selected = selected_np
    cdef unsigned char[::1] skip = skip_np
    cdef Py_ssize_t t, p
    cdef int s

    for t in range(sparsity):
        _conj_into(r, rconj)
        _scores(w, rconj, y)
        p = _peak(y, &skip[0])
        selected[t] = p
        skip[p] = 1
        s = <int>t + 1
        _gather(w, selected[:s], a)
        b[:q] = z
        if _ls_in_place(a, b, q, s, work):
            raise SingularSystemError(
                f"rank-deficient restricted LS system ({q}x{s})",
                support=selected_np[:s] + 1)
        _gather(w, selected[:s], a)
        r[:q] = z
        _subtract_matvec(a, b, q, s, r)

    x_np = np.zeros(n, dtype=np.complex128)
    x_np[selected_np] = np.asarray(b)[:sparsity]
    return x_np, selected_np
