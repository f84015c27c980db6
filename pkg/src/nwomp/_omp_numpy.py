"""Pure-numpy implementation of the norm-weighted OMP inner loop.

Same contract as the compiled kernel in ``_omp_kernel.pyx``; used as the
import-time fallback and for backend cross-checks.
"""

import numpy as np


def omp_run(a, d, y, k, rank_rtol, residual_tol):
    """Run up to k iterations of norm-weighted OMP.

    Each iteration selects argmax_j |a_j^* r| / d_j (lowest index on ties),
    re-solves the least-squares problem on the full selected support through a
    QR factorization, and recomputes the residual explicitly.

    Returns ``(selected, coefficients, residual_norms, n_iter, fail_iter)``
    where ``fail_iter`` is -1 on success or the 0-based iteration at which the
    selected columns lost full column rank (results then cover the preceding
    iterations only).
    """
    m, n = a.shape
    selected = np.empty(k, dtype=np.intp)
    residual_norms = np.empty(k, dtype=np.float64)
    coef = np.empty(0, dtype=np.complex128)
    r = y.astype(np.complex128, copy=True)
    n_iter = 0
    for it in range(k):
        corr = np.abs(a.conj().T @ r) / d
        selected[it] = int(np.argmax(corr))
        a_sel = a[:, selected[: it + 1]]
        q, rr = np.linalg.qr(a_sel)
        diag = np.abs(np.diag(rr))
        if diag.min() < rank_rtol * diag.max():
            return selected[:it], coef, residual_norms[:it], it, it
        z = np.linalg.solve(rr, q.conj().T @ y)
        r = y - a_sel @ z
        coef = z
        residual_norms[it] = np.linalg.norm(r)
        n_iter = it + 1
        if residual_tol > 0.0 and residual_norms[it] <= residual_tol:
            break
    return selected[:n_iter], coef, residual_norms[:n_iter], n_iter, -1
