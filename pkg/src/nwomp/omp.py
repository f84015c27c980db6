"""Norm-weighted orthogonal matching pursuit.

For a sensing matrix whose columns have unequal norms d_j, each iteration
selects the column maximizing |a_j^* r| / d_j, appends it to the support, and
re-solves the least-squares problem on the full support before recomputing
the residual. Exactly k iterations are run by default; an optional residual
threshold can stop earlier.

Two interchangeable kernels implement the inner loop: a compiled extension
(``nwomp._omp_kernel``, built from Cython) and a pure-numpy fallback. The
compiled one is picked at import time when available; set the environment
variable ``NWOMP_BACKEND=python`` or ``NWOMP_BACKEND=cython`` to force one.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import _omp_numpy
from ._text import as_complex_vector, fmt_float, write_text
from .matrices import CsMatrix

# Smallest-to-largest triangular factor diagonal ratio below which the
# selected columns are declared rank deficient.
RANK_RTOL = 1e-10

try:
    from . import _omp_kernel
except ImportError:  # pragma: no cover - depends on how the package was built
    _omp_kernel = None

_BACKENDS = {"python": _omp_numpy.omp_run}
if _omp_kernel is not None:
    _BACKENDS["cython"] = _omp_kernel.omp_run

_env = os.environ.get("NWOMP_BACKEND", "").strip().lower()
if _env and _env not in _BACKENDS:
    raise ImportError(
        "NWOMP_BACKEND=%r is not available; choices: %s" % (_env, sorted(_BACKENDS))
    )
DEFAULT_BACKEND = _env or ("cython" if "cython" in _BACKENDS else "python")


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


class RankDeficiencyError(ArithmeticError):
    """The selected columns lost full column rank beyond RANK_RTOL."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class OmpTrace:
    """Full history of one OMP run.

    ``selected_indices[i]`` is the column chosen at iteration i+1,
    ``residual_norms[i]`` the residual l2 norm after that iteration, and
    ``estimate`` the final length-N vector, supported exactly on the selected
    indices.
    """

    selected_indices: np.ndarray
    residual_norms: np.ndarray
    estimate: np.ndarray

    @property
    def support(self) -> frozenset:
        return frozenset(int(i) for i in self.selected_indices)


def omp_recover(matrix: CsMatrix, y, k: int, residual_tol: float | None = None,
                backend: str | None = None) -> OmpTrace:
    """Recover a k-sparse estimate from observations y.

    Runs exactly k selection / least-squares / residual iterations unless
    ``residual_tol`` is given, in which case iteration stops once the residual
    norm drops to the threshold.

    Raises RankDeficiencyError if the selected columns become numerically
    rank deficient, and ValueError on dimension mismatches.
    """
    y = as_complex_vector(y, "observations")
    m, n = matrix.shape
    if y.size != m:
        raise ValueError("observations have length %d, matrix has %d rows" % (y.size, m))
    if not (1 <= k <= m):
        raise ValueError("need 1 <= k <= M, got k=%d M=%d" % (k, m))
    name = backend or DEFAULT_BACKEND
    if name not in _BACKENDS:
        raise ValueError("unknown backend %r; choices: %s" % (name, sorted(_BACKENDS)))
    run = _BACKENDS[name]
    tol = -1.0 if residual_tol is None else float(residual_tol)
    selected, coef, rnorms, n_iter, fail_iter = run(
        matrix.entries, matrix.column_norms, np.ascontiguousarray(y), k, RANK_RTOL, tol
    )
    if fail_iter >= 0:
        raise RankDeficiencyError(
            "selected columns rank deficient at iteration %d" % (fail_iter + 1),
            iteration=fail_iter + 1,
        )
    estimate = np.zeros(n, dtype=np.complex128)
    estimate[selected] = coef
    return OmpTrace(
        selected_indices=np.asarray(selected, dtype=np.intp),
        residual_norms=np.asarray(rnorms, dtype=np.float64),
        estimate=estimate,
    )


def least_squares_on_support(matrix: CsMatrix, support, y) -> np.ndarray:
    """Coefficients minimizing ||A_support z - y||_2, via a QR factorization.

    Returned coefficients align with the given support order. Raises
    RankDeficiencyError when the chosen columns are numerically dependent.
    """
    support = np.asarray(support, dtype=np.intp)
    y = as_complex_vector(y, "observations")
    m, n = matrix.shape
    if support.ndim != 1 or support.size == 0:
        raise ValueError("support must be a nonempty index vector")
    if np.unique(support).size != support.size:
        raise ValueError("support indices must be distinct")
    if support.min() < 0 or support.max() >= n:
        raise ValueError("support indices out of range")
    if support.size > m:
        raise ValueError("support size %d exceeds M=%d" % (support.size, m))
    if y.size != m:
        raise ValueError("observations have length %d, matrix has %d rows" % (y.size, m))
    a_sel = matrix.entries[:, support]
    q, r = np.linalg.qr(a_sel)
    diag = np.abs(np.diag(r))
    if diag.min() < RANK_RTOL * diag.max():
        raise RankDeficiencyError("support columns are numerically rank deficient")
    return np.linalg.solve(r, q.conj().T @ y)


def save_trace_csv(trace: OmpTrace, path) -> None:
    """CSV with one row per iteration: ``iteration,selected_index,residual_norm``."""
    lines = ["iteration,selected_index,residual_norm"]
    for i, (idx, rn) in enumerate(zip(trace.selected_indices, trace.residual_norms), start=1):
        lines.append("%d,%d,%s" % (i, idx, fmt_float(rn)))
    write_text(path, "\n".join(lines) + "\n")
