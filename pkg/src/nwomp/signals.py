"""Ground-truth sparse signals and noisy linear measurements.

Noise convention used throughout the package: a complex noise entry with
scale sigma has total variance sigma**2, i.e. real and imaginary parts are
independent N(0, sigma**2 / 2). Fixing this once here avoids factor-of-two
drift in every downstream bound.

Seeding: all sampling is driven by numpy's seeded Generator (PCG64), which is
deterministic across platforms. Child streams are derived from a master seed
by tuple concatenation, ``child_seed(master, *path)``; feeding the resulting
tuple to ``numpy.random.default_rng`` gives independent, reproducible streams.
"""

from dataclasses import dataclass

import numpy as np

from ._text import FormatError, data_lines, comment_fields, fmt_float, write_text
from .matrices import CsMatrix


def child_seed(master, *path) -> tuple:
    """Derive an independent child seed from a master seed and an index path.

    ``master`` is an int or tuple of ints; the child is the flattened tuple
    ``(*master, *path)``, which numpy's SeedSequence treats as fresh entropy.
    """
    base = tuple(master) if isinstance(master, (tuple, list)) else (int(master),)
    return base + tuple(int(p) for p in path)


@dataclass(frozen=True)
class SparseSignal:
    """A k-sparse length-N complex vector: support indices plus coefficients.

    Indices are 0-based and sorted; every stored coefficient is nonzero.
    """

    length: int
    support: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.intp)
        coeff = np.asarray(self.coefficients, dtype=np.complex128)
        if support.ndim != 1 or coeff.shape != support.shape:
            raise ValueError("support and coefficients must be aligned 1-d arrays")
        if support.size == 0:
            raise ValueError("support must be nonempty")
        if np.unique(support).size != support.size:
            raise ValueError("support indices must be distinct")
        if support.min() < 0 or support.max() >= self.length:
            raise ValueError("support indices out of range for length %d" % self.length)
        if np.any(np.abs(coeff) == 0.0):
            raise ValueError("coefficients on the support must be nonzero")
        order = np.argsort(support)
        support = support[order]
        coeff = coeff[order]
        support.setflags(write=False)
        coeff.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "coefficients", coeff)

    @property
    def k(self) -> int:
        return self.support.size

    @property
    def x_min(self) -> float:
        return float(np.abs(self.coefficients).min())

    @property
    def x_max(self) -> float:
        return float(np.abs(self.coefficients).max())

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.length, dtype=np.complex128)
        dense[self.support] = self.coefficients
        return dense


@dataclass(frozen=True)
class MeasurementSet:
    """Observation vector together with the noise scale and seed that produced it."""

    observations: np.ndarray
    noise_sigma: float
    seed: object = None

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=np.complex128)
        if obs.ndim != 1:
            raise ValueError("observations must be a vector")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)


def sample_sparse_signal(n: int, k: int, seed) -> SparseSignal:
    """Uniform random support, i.i.d. standard complex Gaussian coefficients,
    then the whole vector scaled to unit l2 norm."""
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= N, got k=%d N=%d" % (k, n))
    rng = np.random.default_rng(seed)
    support = rng.choice(n, size=k, replace=False)
    coeff = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2.0)
    coeff /= np.linalg.norm(coeff)
    return SparseSignal(n, support, coeff)


def sample_sparse_signal_with_floor(n: int, k: int, x_min_target: float, seed) -> SparseSignal:
    """Uniform random support; each coefficient modulus is x_min_target * (1 + u)
    with u ~ U[0, 1) and a uniform phase, so min_j |x_j| >= x_min_target."""
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= N, got k=%d N=%d" % (k, n))
    if x_min_target <= 0:
        raise ValueError("x_min_target must be > 0")
    rng = np.random.default_rng(seed)
    support = rng.choice(n, size=k, replace=False)
    moduli = x_min_target * (1.0 + rng.random(k))
    phases = 2.0 * np.pi * rng.random(k)
    return SparseSignal(n, support, moduli * np.exp(1j * phases))


def measure(matrix: CsMatrix, signal: SparseSignal, sigma: float, seed) -> MeasurementSet:
    """Observe y = A x + v with i.i.d. complex Gaussian noise of total variance sigma**2."""
    if signal.length != matrix.n_cols:
        raise ValueError(
            "signal length %d does not match matrix with %d columns"
            % (signal.length, matrix.n_cols)
        )
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    y = matrix.entries @ signal.to_dense()
    if sigma > 0:
        rng = np.random.default_rng(seed)
        m = matrix.n_rows
        y = y + (rng.standard_normal(m) + 1j * rng.standard_normal(m)) * (sigma / np.sqrt(2.0))
    return MeasurementSet(y, float(sigma), seed)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def save_signal_csv(signal: SparseSignal, path) -> None:
    """CSV with one row per support entry: ``index,re,im`` (0-based indices)."""
    lines = ["# length = %d" % signal.length, "index,re,im"]
    for idx, z in zip(signal.support, signal.coefficients):
        lines.append("%d,%s,%s" % (idx, fmt_float(z.real), fmt_float(z.imag)))
    write_text(path, "\n".join(lines) + "\n")


def load_signal_csv(path) -> SparseSignal:
    meta = comment_fields(path)
    if "length" not in meta:
        raise FormatError("signal CSV is missing the '# length = N' header")
    support = []
    coeff = []
    for line in data_lines(path):
        if line.lower().startswith("index,"):
            continue
        tokens = line.split(",")
        if len(tokens) != 3:
            raise FormatError("signal CSV rows need 3 fields, got %r" % line)
        support.append(int(tokens[0]))
        coeff.append(complex(float(tokens[1]), float(tokens[2])))
    if not support:
        raise FormatError("empty signal CSV %s" % path)
    return SparseSignal(int(meta["length"]), np.array(support), np.array(coeff))


def save_measurements_csv(ms: MeasurementSet, path) -> None:
    """CSV with one row per observation: ``row,re,im`` plus sigma/seed comments."""
    lines = [
        "# sigma = %s" % fmt_float(ms.noise_sigma),
        "# seed = %r" % (ms.seed,),
        "row,re,im",
    ]
    for i, z in enumerate(ms.observations):
        lines.append("%d,%s,%s" % (i, fmt_float(z.real), fmt_float(z.imag)))
    write_text(path, "\n".join(lines) + "\n")


def load_measurements_csv(path) -> MeasurementSet:
    meta = comment_fields(path)
    rows = []
    for line in data_lines(path):
        if line.lower().startswith("row,"):
            continue
        tokens = line.split(",")
        if len(tokens) != 3:
            raise FormatError("measurement CSV rows need 3 fields, got %r" % line)
        rows.append((int(tokens[0]), complex(float(tokens[1]), float(tokens[2]))))
    if not rows:
        raise FormatError("empty measurement CSV %s" % path)
    obs = np.zeros(max(r for r, _ in rows) + 1, dtype=np.complex128)
    for r, z in rows:
        obs[r] = z
    return MeasurementSet(obs, float(meta.get("sigma", "0")), meta.get("seed"))
