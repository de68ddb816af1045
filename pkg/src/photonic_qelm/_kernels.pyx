# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Same contracts as :mod:`photonic_qelm._kernels_py`; the least-squares solves go
straight to LAPACK ``dgelsd`` (the routine numpy's ``lstsq`` also uses) with the
GIL released, so repetition-level threads run in parallel.
"""
from libc.stdlib cimport malloc, free
from libc.math cimport sqrt
from scipy.linalg.cython_lapack cimport dgelsd

import numpy as np


cdef int _gelsd(int m, int n, int nrhs, double* a, double* b, int ldb,
                double rcond, double* s, int* rank) noexcept nogil:
    """Min-norm least squares on column-major buffers; solution lands in b[:n]."""
    cdef int lda = m if m > 1 else 1
    cdef int lwork = -1
    cdef int info = 0
    cdef double wkopt = 0.0
    cdef int iwkopt = 0
    cdef double* work
    cdef int* iwork
    dgelsd(&m, &n, &nrhs, a, &lda, b, &ldb, s, &rcond, rank,
           &wkopt, &lwork, &iwkopt, &info)
    if info != 0:
        return info
    lwork = <int>wkopt + 1
    work = <double*>malloc(lwork * sizeof(double))
    iwork = <int*>malloc((iwkopt if iwkopt > 1 else 1) * sizeof(int))
    if work == NULL or iwork == NULL:
        free(work)
        free(iwork)
        return -1000
    dgelsd(&m, &n, &nrhs, a, &lda, b, &ldb, s, &rcond, rank,
           work, &lwork, iwork, &info)
    free(work)
    free(iwork)
    return info


cdef int _fill_system(const double[:, ::1] F, const double[:, ::1] T,
                      const Py_ssize_t[::1] rows, double ridge,
                      double* a, double* b, int m, int ldb) noexcept nogil:
    cdef Py_ssize_t nr = rows.shape[0]
    cdef Py_ssize_t d = F.shape[1]
    cdef Py_ssize_t k = T.shape[1]
    cdef Py_ssize_t i, j
    cdef double lam = sqrt(ridge) if ridge > 0 else 0.0
    for j in range(d):
        for i in range(m):
            a[j * m + i] = 0.0
    for j in range(k):
        for i in range(ldb):
            b[j * ldb + i] = 0.0
    for i in range(nr):
        for j in range(d):
            a[j * m + i] = F[rows[i], j]
        for j in range(k):
            b[j * ldb + i] = T[rows[i], j]
    if ridge > 0:
        for j in range(d):
            a[j * m + nr + j] = lam
    return 0


def lstsq_minnorm(const double[:, ::1] F, const double[:, ::1] T,
                  double rcond=1e-10, double ridge=0.0):
    """Return ``(X, singular_values, rank)`` with ``X`` (d x m) minimising ||F X - T||."""
    cdef Py_ssize_t n = F.shape[0]
    cdef Py_ssize_t d = F.shape[1]
    cdef Py_ssize_t k = T.shape[1]
    if T.shape[0] != n:
        raise ValueError("feature and target row counts differ")
    cdef int m = <int>(n + (d if ridge > 0 else 0))
    cdef int ldb = m if m > d else <int>d
    if ldb < 1:
        ldb = 1
    cdef Py_ssize_t nsv = m if m < d else d
    rows_arr = np.arange(n, dtype=np.intp)
    cdef const Py_ssize_t[::1] rows = rows_arr
    out_s = np.zeros(nsv, dtype=np.float64)
    cdef double[::1] s = out_s
    cdef double* a = <double*>malloc((m * d if m * d > 0 else 1) * sizeof(double))
    cdef double* b = <double*>malloc((ldb * k if ldb * k > 0 else 1) * sizeof(double))
    cdef int rank = 0
    cdef int info = 0
    cdef Py_ssize_t i, j
    if a == NULL or b == NULL:
        free(a)
        free(b)
        raise MemoryError()
    X = np.empty((d, k), dtype=np.float64)
    cdef double[:, ::1] Xv = X
    with nogil:
        _fill_system(F, T, rows, ridge, a, b, m, ldb)
        info = _gelsd(m, <int>d, <int>k, a, b, ldb, rcond, &s[0] if nsv > 0 else NULL, &rank)
        if info == 0:
            for i in range(d):
                for j in range(k):
                    Xv[i, j] = b[j * ldb + i]
    free(a)
    free(b)
    if info != 0:
        raise ArithmeticError(f"dgelsd failed with info={info}")
    return X, out_s, int(rank)


def fit_predict_mse(const double[:, ::1] F, const double[:, ::1] T,
                    const Py_ssize_t[::1] train, const Py_ssize_t[::1] test,
                    double rcond=1e-10, double ridge=0.0):
    """Fit on ``train`` rows, predict ``test`` rows, return per-column test MSE."""
    cdef Py_ssize_t d = F.shape[1]
    cdef Py_ssize_t k = T.shape[1]
    cdef Py_ssize_t ntr = train.shape[0]
    cdef Py_ssize_t nte = test.shape[0]
    if ntr < 1 or nte < 1:
        raise ValueError("train and test index sets must be non-empty")
    cdef int m = <int>(ntr + (d if ridge > 0 else 0))
    cdef int ldb = m if m > d else <int>d
    cdef Py_ssize_t nsv = m if m < d else d
    cdef double* a = <double*>malloc(m * d * sizeof(double))
    cdef double* b = <double*>malloc(ldb * k * sizeof(double))
    cdef double* s = <double*>malloc(nsv * sizeof(double))
    cdef int rank = 0
    cdef int info = 0
    cdef Py_ssize_t t, i, j
    cdef double pred, err
    if a == NULL or b == NULL or s == NULL:
        free(a)
        free(b)
        free(s)
        raise MemoryError()
    out = np.zeros(k, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        _fill_system(F, T, train, ridge, a, b, m, ldb)
        info = _gelsd(m, <int>d, <int>k, a, b, ldb, rcond, s, &rank)
        if info == 0:
            for t in range(nte):
                for j in range(k):
                    pred = 0.0
                    for i in range(d):
                        pred = pred + F[test[t], i] * b[j * ldb + i]
                    err = pred - T[test[t], j]
                    o[j] = o[j] + err * err
            for j in range(k):
                o[j] = o[j] / nte
    free(a)
    free(b)
    free(s)
    if info != 0:
        raise ArithmeticError(f"dgelsd failed with info={info}")
    return out


def outcome_probabilities(const double complex[:, ::1] A, const double complex[:, ::1] psi):
    """|A psi_i|^2 for each row ``psi_i``; returns an (n, outcomes) array."""
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t nb = A.shape[0]
    cdef Py_ssize_t q = A.shape[1]
    if psi.shape[1] != q:
        raise ValueError("state dimension does not match the reservoir map")
    out = np.empty((n, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, bb, j
    cdef double complex amp
    with nogil:
        for i in range(n):
            for bb in range(nb):
                amp = 0
                for j in range(q):
                    amp = amp + A[bb, j] * psi[i, j]
                o[i, bb] = amp.real * amp.real + amp.imag * amp.imag
    return out
