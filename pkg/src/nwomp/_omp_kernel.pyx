# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled norm-weighted OMP inner loop.

Column selection, least-squares re-solve on the grown support, and explicit
residual recomputation, all in one tight loop over complex128 buffers. The
least-squares step uses modified Gram-Schmidt with one reorthogonalization
pass followed by back substitution, which keeps the solve an orthogonal
factorization rather than a normal-equations inversion.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def omp_run(const cnp.complex128_t[:, ::1] a, const double[::1] d,
            const cnp.complex128_t[::1] y,
            Py_ssize_t k, double rank_rtol, double residual_tol):
    """Same contract as nwomp._omp_numpy.omp_run."""
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]

    sel_arr = np.empty(k, dtype=np.intp)
    rnorm_arr = np.empty(k, dtype=np.float64)
    coef_arr = np.empty(k, dtype=np.complex128)
    q_arr = np.empty((k, m), dtype=np.complex128)      # orthonormal basis, row-major per column
    rfac_arr = np.zeros((k, k), dtype=np.complex128)   # upper-triangular factor
    qty_arr = np.empty(k, dtype=np.complex128)
    work_arr = np.empty(m, dtype=np.complex128)
    resid_arr = np.empty(m, dtype=np.complex128)

    cdef Py_ssize_t[::1] sel = sel_arr
    cdef double[::1] rnorms = rnorm_arr
    cdef cnp.complex128_t[::1] coef = coef_arr
    cdef cnp.complex128_t[:, ::1] qmat = q_arr
    cdef cnp.complex128_t[:, ::1] rfac = rfac_arr
    cdef cnp.complex128_t[::1] qty = qty_arr
    cdef cnp.complex128_t[::1] work = work_arr
    cdef cnp.complex128_t[::1] resid = resid_arr

    cdef Py_ssize_t it, i, j, p, best
    cdef double best_val, val, diag_max, diag_min, rkk, rn
    cdef double complex acc, h, z
    cdef Py_ssize_t n_iter = 0
    cdef Py_ssize_t fail_iter = -1

    for i in range(m):
        resid[i] = y[i]
    diag_max = 0.0
    diag_min = -1.0

    for it in range(k):
        # Step 1: norm-weighted correlation argmax, lowest index wins ties.
        best = 0
        best_val = -1.0
        for j in range(n):
            acc = 0
            for i in range(m):
                acc = acc + a[i, j].conjugate() * resid[i]
            val = abs(acc) / d[j]
            if val > best_val:
                best_val = val
                best = j
        sel[it] = best

        # Orthogonalize the new column against the current basis (MGS with a
        # second pass), extending the triangular factor.
        for i in range(m):
            work[i] = a[i, best]
        for p in range(2):
            for j in range(it):
                h = 0
                for i in range(m):
                    h = h + qmat[j, i].conjugate() * work[i]
                rfac[j, it] = rfac[j, it] + h
                for i in range(m):
                    work[i] = work[i] - h * qmat[j, i]
        rkk = 0.0
        for i in range(m):
            rkk = rkk + work[i].real * work[i].real + work[i].imag * work[i].imag
        rkk = sqrt(rkk)
        if rkk > diag_max:
            diag_max = rkk
        if diag_min < 0.0 or rkk < diag_min:
            diag_min = rkk
        if diag_min < rank_rtol * diag_max:
            fail_iter = it
            break
        rfac[it, it] = rkk
        for i in range(m):
            qmat[it, i] = work[i] / rkk
        h = 0
        for i in range(m):
            h = h + qmat[it, i].conjugate() * y[i]
        qty[it] = h

        # Back substitution: coefficients on the full support so far.
        for j in range(it, -1, -1):
            z = qty[j]
            for p in range(j + 1, it + 1):
                z = z - rfac[j, p] * coef[p]
            coef[j] = z / rfac[j, j]

        # Step 4: residual recomputed explicitly from the estimate.
        for i in range(m):
            acc = y[i]
            for j in range(it + 1):
                acc = acc - a[i, sel[j]] * coef[j]
            resid[i] = acc
        rn = 0.0
        for i in range(m):
            rn = rn + resid[i].real * resid[i].real + resid[i].imag * resid[i].imag
        rn = sqrt(rn)
        rnorms[it] = rn
        n_iter = it + 1
        if residual_tol > 0.0 and rn <= residual_tol:
            break

    return (sel_arr[:n_iter], coef_arr[:n_iter].copy(), rnorm_arr[:n_iter],
            n_iter, fail_iter)
