"""Closed-form recovery guarantees for norm-weighted OMP.

All bounds are driven by five scalars of the sensing matrix and problem:
coherence mu, extreme column norms d_min / d_max, sparsity k, and the noise
threshold rho = sigma * sqrt(2 * (1 + alpha) * ln N). Several bounds are only
meaningful while d_min - (k-1) * mu * d_max stays positive; past that sign
change they are reported as vacuous (``None``) rather than as negative or
infinite numbers.

A note on the noise-event probability bound: at the working point
(sigma=1, rho=2.63, N=32) the closed form evaluates to about 0.3684, which is
far below the empirical frequency of the event (about 0.97 for the matrices
built here). The bound is valid but loose; see
``event_probability_lower_bound``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._text import FormatError, data_lines, fmt_float, write_text
from .matrices import CsMatrix

# Working ratio rho/sigma used by the simulation harness; close to the
# alpha -> 0 limit sqrt(2 * ln 32) = 2.6328 at N = 32.
DEFAULT_RHO_OVER_SIGMA = 2.63


def rho(sigma: float, n: int, alpha: float) -> float:
    """Noise threshold sigma * sqrt(2 * (1 + alpha) * ln N) (natural log).

    ``alpha`` must be positive; 0 is admitted as the limiting value. At
    sigma=1, N=32, alpha=0 this gives 2.6328, matching the working ratio 2.63.
    """
    if n < 2:
        raise ValueError("need N >= 2 for a meaningful threshold")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    return sigma * math.sqrt(2.0 * (1.0 + alpha) * math.log(n))


def alpha_for_rho_ratio(ratio: float, n: int) -> float:
    """Slack alpha implied by a target rho/sigma ratio: ratio**2/(2 ln N) - 1.

    May come out (slightly) negative when the target ratio sits below
    sqrt(2 ln N); the ratio 2.63 at N = 32 is such a point. Callers working
    from a ratio should therefore set rho = ratio * sigma directly instead of
    routing through :func:`rho`.
    """
    if n < 2:
        raise ValueError("need N >= 2")
    if ratio <= 0:
        raise ValueError("ratio must be > 0")
    return ratio**2 / (2.0 * math.log(n)) - 1.0


def event_probability_lower_bound(sigma: float, rho_value: float, n: int) -> float:
    """Lower bound on the probability that every |a_j^* v| / d_j stays below rho.

    Evaluates (1 - sqrt(2/pi) * sqrt(sigma/rho) * exp(-rho^2 / (2 sigma^2)))
    raised to the 2N-th power, with the inner term clamped at 0 (for small
    rho/sigma the bound is trivially 0). Loose in practice: 0.36840 at
    (sigma=1, rho=2.63, N=32) against an empirical frequency near 0.97.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0; the noiseless event is certain")
    if rho_value <= 0:
        raise ValueError("rho must be > 0 when sigma > 0")
    if n < 1:
        raise ValueError("need N >= 1")
    inner = 1.0 - math.sqrt(2.0 / math.pi) * math.sqrt(sigma / rho_value) * math.exp(
        -(rho_value**2) / (2.0 * sigma**2)
    )
    return max(inner, 0.0) ** (2 * n)


def empirical_event_check(matrix: CsMatrix, noise, rho_value: float) -> bool:
    """True iff max_j |a_j^* v| / d_j < rho for this realized noise vector."""
    v = np.asarray(noise, dtype=np.complex128)
    if v.shape != (matrix.n_rows,):
        raise ValueError("noise vector length must equal M")
    stat = np.abs(matrix.entries.conj().T @ v) / matrix.column_norms
    return bool(stat.max() < rho_value)


def support_recovery_condition(
    mu: float, d_min: float, d_max: float, k: int, rho_value: float, x_min: float
) -> tuple[bool, float]:
    """Sufficient condition for exact support recovery under the noise event.

    Returns ``(holds, margin)`` with
    margin = d_min * x_min - (2k - 1) * mu * d_max * x_min - 2 * rho;
    the condition holds iff the margin is >= 0.
    """
    if x_min <= 0:
        raise ValueError("x_min must be > 0")
    margin = d_min * x_min - (2 * k - 1) * mu * d_max * x_min - 2.0 * rho_value
    return margin >= 0.0, margin


def min_coefficient_threshold(
    mu: float, d_min: float, d_max: float, k: int, rho_value: float
) -> float | None:
    """Smallest coefficient magnitude that guarantees support recovery.

    (2 rho / d_min) / (1 - mu (2k - 1) d_max / d_min); vacuous (None) once the
    denominator is <= 0.
    """
    denom = 1.0 - mu * (2 * k - 1) * (d_max / d_min)
    if denom <= 0.0:
        return None
    return (2.0 * rho_value / d_min) / denom


def noiseless_max_sparsity(mu: float, d_min: float, d_max: float) -> float:
    """Largest sparsity with guaranteed noiseless support recovery:
    (1/2) * (1 + d_min / (mu * d_max)). Returns +inf when mu = 0."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if mu == 0.0:
        return math.inf
    return 0.5 * (1.0 + d_min / (mu * d_max))


def gram_inverse_eigen_bound(mu: float, d_min: float, d_max: float, k: int) -> float | None:
    """Upper bound on the largest eigenvalue of (A_S^* A_S)^{-1} over size-k supports.

    1 / (d_min * (d_min - (k - 1) * mu * d_max)); vacuous (None) once the
    inner factor is <= 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    inner = d_min - (k - 1) * mu * d_max
    if inner <= 0.0:
        return None
    return 1.0 / (d_min * inner)


def mse_upper_bound(
    mu: float, d_min: float, d_max: float, k: int, rho_value: float
) -> float | None:
    """Bound on the squared estimation error given support recovery and the noise event.

    (d_max / d_min)^2 * k * rho^2 / (d_min - (k - 1) * mu * d_max)^2; vacuous
    (None) once d_min - (k - 1) * mu * d_max is <= 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if rho_value < 0:
        raise ValueError("rho must be >= 0")
    inner = d_min - (k - 1) * mu * d_max
    if inner <= 0.0:
        return None
    return (d_max / d_min) ** 2 * k * rho_value**2 / inner**2


@dataclass(frozen=True)
class GuaranteeInputs:
    """Scalar inputs to the guarantee calculators.

    Provide at most one of ``alpha`` / ``rho_over_sigma``; with neither, alpha
    defaults to the limiting value 0. ``rho_over_sigma`` sets rho = ratio *
    sigma directly (the route to use for ratios below sqrt(2 ln N)).
    """

    mu: float
    d_min: float
    d_max: float
    k: int
    sigma: float
    n: int
    alpha: float | None = None
    rho_over_sigma: float | None = None
    x_min: float | None = None
    x_max: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.mu <= 1.0):
            raise ValueError("mu must lie in [0, 1]")
        if not (0.0 < self.d_min <= self.d_max):
            raise ValueError("need 0 < d_min <= d_max")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.n < 2:
            raise ValueError("need N >= 2")
        if self.alpha is not None and self.rho_over_sigma is not None:
            raise ValueError("give either alpha or rho_over_sigma, not both")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.rho_over_sigma is not None and self.rho_over_sigma <= 0:
            raise ValueError("rho_over_sigma must be > 0")
        if self.x_min is not None and self.x_min <= 0:
            raise ValueError("x_min must be > 0")
        if self.x_max is not None:
            if self.x_max <= 0:
                raise ValueError("x_max must be > 0")
            if self.x_min is not None and self.x_min > self.x_max:
                raise ValueError("need x_min <= x_max")

    @classmethod
    def from_matrix(cls, matrix: CsMatrix, mu: float | None = None, **scalars):
        """Fill mu, d_min, d_max and N from a sensing matrix."""
        from .matrices import mutual_coherence

        if mu is None:
            mu = mutual_coherence(matrix)
        return cls(
            mu=mu, d_min=matrix.d_min, d_max=matrix.d_max, n=matrix.n_cols, **scalars
        )

    @property
    def rho_value(self) -> float:
        if self.rho_over_sigma is not None:
            return self.rho_over_sigma * self.sigma
        return rho(self.sigma, self.n, self.alpha if self.alpha is not None else 0.0)


@dataclass(frozen=True)
class GuaranteeReport:
    """All bound evaluations for one (matrix, k, sigma, ...) operating point.

    ``None`` in a bound field means the bound is vacuous (its denominator
    sign condition failed); ``None`` in the support-condition fields means
    x_min was not supplied so the condition was not evaluated.
    """

    rho: float
    event_prob_lower_bound: float
    support_condition_holds: bool | None
    support_margin: float | None
    x_min_threshold: float | None
    noiseless_k_max: float
    eigen_bound: float | None
    mse_bound: float | None

    _FIELDS = (
        "rho",
        "event_prob_lower_bound",
        "support_condition_holds",
        "support_margin",
        "x_min_threshold",
        "noiseless_k_max",
        "eigen_bound",
        "mse_bound",
    )

    def _render(self, name):
        value = getattr(self, name)
        if name == "support_condition_holds":
            return "unevaluated" if value is None else ("true" if value else "false")
        if name == "support_margin":
            return "unevaluated" if value is None else fmt_float(value)
        if value is None:
            return "vacuous"
        if isinstance(value, float) and math.isinf(value):
            return "inf"
        return fmt_float(value)

    def to_keyvalue_text(self) -> str:
        return "\n".join("%s = %s" % (name, self._render(name)) for name in self._FIELDS) + "\n"

    def to_csv_text(self) -> str:
        lines = ["field,value"]
        lines.extend("%s,%s" % (name, self._render(name)) for name in self._FIELDS)
        return "\n".join(lines) + "\n"

    def save(self, path, csv=False) -> None:
        write_text(path, self.to_csv_text() if csv else self.to_keyvalue_text())


def _parse_report_value(name, token):
    if token == "vacuous":
        return None
    if token == "unevaluated":
        return None
    if name == "support_condition_holds":
        return token == "true"
    if token == "inf":
        return math.inf
    return float(token)


def load_report(path) -> GuaranteeReport:
    """Read back a key-value or CSV report file."""
    fields = {}
    for line in data_lines(path):
        if line == "field,value":
            continue
        if "=" in line:
            key, _, val = line.partition("=")
        elif "," in line:
            key, _, val = line.partition(",")
        else:
            raise FormatError("unparseable report line %r" % line)
        key, val = key.strip(), val.strip()
        if key not in GuaranteeReport._FIELDS:
            raise FormatError("unknown report field %r" % key)
        fields[key] = _parse_report_value(key, val)
    missing = set(GuaranteeReport._FIELDS) - set(fields)
    if missing:
        raise FormatError("report is missing fields: %s" % sorted(missing))
    return GuaranteeReport(**fields)


def evaluate_report(inputs: GuaranteeInputs) -> GuaranteeReport:
    """Compute every guarantee from one set of scalar inputs."""
    rho_value = inputs.rho_value
    if inputs.sigma == 0.0:
        # Noiseless: the event holds surely whenever the threshold is positive.
        event_prob = 1.0 if rho_value > 0 else 0.0
    else:
        event_prob = event_probability_lower_bound(inputs.sigma, rho_value, inputs.n)
    if inputs.x_min is not None:
        holds, margin = support_recovery_condition(
            inputs.mu, inputs.d_min, inputs.d_max, inputs.k, rho_value, inputs.x_min
        )
    else:
        holds, margin = None, None
    return GuaranteeReport(
        rho=rho_value,
        event_prob_lower_bound=event_prob,
        support_condition_holds=holds,
        support_margin=margin,
        x_min_threshold=min_coefficient_threshold(
            inputs.mu, inputs.d_min, inputs.d_max, inputs.k, rho_value
        ),
        noiseless_k_max=noiseless_max_sparsity(inputs.mu, inputs.d_min, inputs.d_max),
        eigen_bound=gram_inverse_eigen_bound(
            inputs.mu, inputs.d_min, inputs.d_max, inputs.k
        ),
        mse_bound=mse_upper_bound(
            inputs.mu, inputs.d_min, inputs.d_max, inputs.k, rho_value
        ),
    )


def full_report(matrix: CsMatrix, k: int, sigma: float, alpha: float | None = None,
                rho_over_sigma: float | None = None, x_min: float | None = None,
                x_max: float | None = None) -> GuaranteeReport:
    """Evaluate every guarantee for a sensing matrix at one operating point."""
    inputs = GuaranteeInputs.from_matrix(
        matrix, k=k, sigma=sigma, alpha=alpha, rho_over_sigma=rho_over_sigma,
        x_min=x_min, x_max=x_max,
    )
    return evaluate_report(inputs)
