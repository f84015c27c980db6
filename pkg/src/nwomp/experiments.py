"""Monte Carlo harness: NMSE vs noise and support-recovery rate vs x_min/sigma.

One sensing matrix per experiment is built from the configured codeword
family; trials then draw fresh sparse signals and noise, run the recovery,
and aggregate either the normalized mean squared error (ratio of summed
squared errors to summed squared signal norms) or the fraction of exact
support recoveries, with a confidence half-width per operating point.

Axis convention: operating points are referenced to the unit-modulus
measurement front end. A raw phased-array row has unit-modulus weights, and
storing the matrix Frobenius-normalized rescales the observation vector by
1/sqrt(M); the per-measurement noise scale fed to the measurement model is
therefore sigma / sqrt(M) for an axis value sigma (and the x_min/sigma axis
of the support experiment is read at the same front-end scale). Scale-free
quantities (NMSE, rates, dB gaps) are unaffected by this bookkeeping.

Seeding: the codeword draw/search, the shift draw, and each (point, trial)
pair get independent child streams of the master seed; see the stream tags
below and ``signals.child_seed``.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from ._text import FormatError, data_lines, fmt_float, write_text
from .guarantees import (
    DEFAULT_RHO_OVER_SIGMA,
    empirical_event_check,
    mse_upper_bound,
    support_recovery_condition,
)
from .matrices import (
    CsMatrix,
    build_cs_matrix,
    load_code_text,
    mutual_coherence,
    random_low_res_code,
    search_code_by_norm_ratio,
    zadoff_chu,
)
from .omp import RankDeficiencyError, omp_recover
from .signals import (
    SparseSignal,
    child_seed,
    measure,
    sample_sparse_signal,
    sample_sparse_signal_with_floor,
)

# Child-seed stream tags.
STREAM_CODE = 0
STREAM_SHIFTS = 1
STREAM_TRIALS = 2

FAMILIES = ("zc", "random2bit", "ratio", "file")
EXPERIMENTS = ("nmse", "support")

_WILSON_Z = 1.96  # two-sided 95%


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    sweep: tuple[float, ...]
    n: int = 32
    m: int = 20
    k: int = 2
    family: str = "zc"
    bits: int = 2
    target_ratio: float | None = None
    code_file: str | None = None
    search_attempts: int = 4000
    trials: int = 10000
    master_seed: int = 1234
    sigma: float = 1.0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError("experiment must be one of %s" % (EXPERIMENTS,))
        if self.family not in FAMILIES:
            raise ValueError("family must be one of %s" % (FAMILIES,))
        if not self.sweep:
            raise ValueError("sweep must be nonempty")
        if not (1 <= self.k <= self.m < self.n):
            raise ValueError("need 1 <= k <= M < N")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.family == "ratio" and self.target_ratio is None:
            raise ValueError("family 'ratio' needs target_ratio")
        if self.family == "file" and not self.code_file:
            raise ValueError("family 'file' needs code_file")
        if self.experiment == "support":
            if self.sigma <= 0:
                raise ValueError("support experiment needs sigma > 0")
            if any(t <= 0 for t in self.sweep):
                raise ValueError("support sweep points (x_min/sigma) must be > 0")
        else:
            if any(s < 0 for s in self.sweep):
                raise ValueError("nmse sweep points (sigma) must be >= 0")
        object.__setattr__(self, "sweep", tuple(float(s) for s in self.sweep))

    def to_mapping(self) -> dict:
        out = {
            "experiment": self.experiment,
            "sweep": ",".join(fmt_float(s) for s in self.sweep),
            "N": str(self.n),
            "M": str(self.m),
            "k": str(self.k),
            "family": self.family,
            "bits": str(self.bits),
            "search_attempts": str(self.search_attempts),
            "trials": str(self.trials),
            "seed": str(self.master_seed),
            "sigma": fmt_float(self.sigma),
        }
        if self.target_ratio is not None:
            out["target_ratio"] = fmt_float(self.target_ratio)
        if self.code_file is not None:
            out["code_file"] = str(self.code_file)
        return out

    def canonical_text(self) -> str:
        mapping = self.to_mapping()
        return "\n".join("%s = %s" % (k, mapping[k]) for k in sorted(mapping)) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("ascii")).hexdigest()

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        known = {
            "experiment", "sweep", "N", "M", "k", "family", "bits", "target_ratio",
            "code_file", "search_attempts", "trials", "seed", "sigma",
        }
        unknown = set(mapping) - known
        if unknown:
            raise FormatError("unknown config keys: %s" % sorted(unknown))
        if "experiment" not in mapping or "sweep" not in mapping:
            raise FormatError("config needs 'experiment' and 'sweep'")
        try:
            sweep = tuple(float(tok) for tok in str(mapping["sweep"]).split(",") if tok.strip())
        except ValueError as exc:
            raise FormatError("bad sweep %r" % mapping["sweep"]) from exc
        kwargs = dict(experiment=str(mapping["experiment"]), sweep=sweep)
        for key, attr, conv in (
            ("N", "n", int), ("M", "m", int), ("k", "k", int), ("family", "family", str),
            ("bits", "bits", int), ("target_ratio", "target_ratio", float),
            ("code_file", "code_file", str), ("search_attempts", "search_attempts", int),
            ("trials", "trials", int), ("seed", "master_seed", int), ("sigma", "sigma", float),
        ):
            if key in mapping:
                try:
                    kwargs[attr] = conv(mapping[key])
                except ValueError as exc:
                    raise FormatError("bad config value %s = %r" % (key, mapping[key])) from exc
        return cls(**kwargs)


def parse_config_file(path) -> dict:
    """Flat ``key = value`` config format; '#' lines are comments."""
    mapping = {}
    for line in data_lines(path):
        if "=" not in line:
            raise FormatError("config lines must be 'key = value', got %r" % line)
        key, _, val = line.partition("=")
        mapping[key.strip()] = val.strip()
    return mapping


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    mapping = parse_config_file(path)
    if overrides:
        mapping.update({k: str(v) for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_mapping(mapping)


def build_experiment_matrix(cfg: ExperimentConfig) -> tuple[CsMatrix, str]:
    """One matrix per experiment, from the configured codeword family.

    Returns the matrix and a short human-readable note on how the codeword
    was obtained (e.g. the achieved norm ratio for a searched code).
    """
    code_seed = child_seed(cfg.master_seed, STREAM_CODE)
    shift_seed = child_seed(cfg.master_seed, STREAM_SHIFTS)
    if cfg.family == "zc":
        code, note = zadoff_chu(cfg.n), "zadoff-chu"
    elif cfg.family == "random2bit":
        code = random_low_res_code(cfg.n, cfg.bits, code_seed)
        note = "random %d-bit code" % cfg.bits
    elif cfg.family == "ratio":
        code, achieved = search_code_by_norm_ratio(
            cfg.target_ratio, cfg.bits, cfg.m, cfg.n, cfg.search_attempts, code_seed
        )
        note = "searched %d-bit code, target ratio %s, achieved %s" % (
            cfg.bits, fmt_float(cfg.target_ratio), fmt_float(achieved),
        )
    else:
        code = load_code_text(cfg.code_file)
        note = "code from %s" % cfg.code_file
    return build_cs_matrix(code, cfg.m, shift_seed), note


@dataclass(frozen=True)
class PointStats:
    operating_point: float
    metric: str
    value: float
    ci_half_width: float
    trials_done: int
    skipped: int
    bound_value: float
    db_value: float | None = None
    db_half_width: float | None = None
    conditioned_trials: int = 0
    conditioned_max_sqerr: float = math.nan


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    points: tuple[PointStats, ...]
    mu: float
    d_min: float
    d_max: float
    family_note: str

    @property
    def norm_ratio(self) -> float:
        return self.d_max / self.d_min

    def csv_text(self) -> str:
        lines = [
            "# config_hash = %s" % self.config.config_hash(),
            "operating_point,metric,value,ci_half_width,trials,matrix_ratio,mu,bound_value",
        ]
        ratio = fmt_float(self.norm_ratio)
        mu = fmt_float(self.mu)
        for p in self.points:
            lines.append(
                "%s,%s,%s,%s,%d,%s,%s,%s"
                % (
                    fmt_float(p.operating_point), p.metric, fmt_float(p.value),
                    fmt_float(p.ci_half_width), p.trials_done, ratio, mu,
                    fmt_float(p.bound_value),
                )
            )
            if p.db_value is not None:
                lines.append(
                    "%s,%s,%s,%s,%d,%s,%s,%s"
                    % (
                        fmt_float(p.operating_point), p.metric + "_db",
                        fmt_float(p.db_value), fmt_float(p.db_half_width),
                        p.trials_done, ratio, mu,
                        fmt_float(_safe_db(p.bound_value)),
                    )
                )
        return "\n".join(lines) + "\n"

    def metadata_text(self) -> str:
        lines = ["# nwomp experiment metadata"]
        lines.append("config_hash = %s" % self.config.config_hash())
        lines.append(self.config.canonical_text().rstrip("\n"))
        lines.append("matrix_mu = %s" % fmt_float(self.mu))
        lines.append("matrix_d_min = %s" % fmt_float(self.d_min))
        lines.append("matrix_d_max = %s" % fmt_float(self.d_max))
        lines.append("matrix_norm_ratio = %s" % fmt_float(self.norm_ratio))
        lines.append("code = %s" % self.family_note)
        lines.append(
            "noise_convention = per-measurement noise scale is sigma/sqrt(M); "
            "operating points are quoted at the unit-modulus front-end scale"
        )
        lines.append(
            "seed_rule = child seeds are (seed, stream, ...); streams: "
            "%d=code, %d=shifts, %d=(point, trial, draw)"
            % (STREAM_CODE, STREAM_SHIFTS, STREAM_TRIALS)
        )
        for i, p in enumerate(self.points):
            lines.append(
                "point_%d = operating_point %s, trials %d, skipped %d, "
                "conditioned %d, conditioned_max_sqerr %s"
                % (
                    i, fmt_float(p.operating_point), p.trials_done, p.skipped,
                    p.conditioned_trials, fmt_float(p.conditioned_max_sqerr),
                )
            )
        return "\n".join(lines) + "\n"

    def save(self, csv_path, metadata_path=None) -> None:
        write_text(csv_path, self.csv_text())
        if metadata_path is None:
            metadata_path = str(csv_path) + ".meta"
        write_text(metadata_path, self.metadata_text())


def nmse_db(value: float) -> float:
    """Decibel form 10*log10(value); rejects nonpositive inputs."""
    if value <= 0:
        raise ValueError("NMSE must be > 0 for a dB value")
    return 10.0 * math.log10(value)


def _safe_db(value: float) -> float:
    return 10.0 * math.log10(value) if value > 0 else math.nan


def wilson_half_width(successes: int, n: int, z: float = _WILSON_Z) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if n < 1:
        return math.nan
    p = successes / n
    denom = 1.0 + z * z / n
    return (z / denom) * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))


def _trial_signal_seed(cfg, point_idx, trial_idx):
    return child_seed(cfg.master_seed, STREAM_TRIALS, point_idx, trial_idx, 0)


def _trial_noise_seed(cfg, point_idx, trial_idx):
    return child_seed(cfg.master_seed, STREAM_TRIALS, point_idx, trial_idx, 1)


def _exact_min_rescale(signal: SparseSignal, x_min: float) -> SparseSignal:
    """Scale the coefficients so the weakest modulus equals x_min exactly."""
    return SparseSignal(
        signal.length, signal.support, signal.coefficients * (x_min / signal.x_min)
    )


def run_nmse_experiment(cfg: ExperimentConfig, matrix: CsMatrix | None = None,
                        family_note: str | None = None) -> ExperimentResult:
    """NMSE across the sigma sweep, with the squared-error bound overlay.

    NMSE is the ratio of the summed squared estimation errors to the summed
    squared signal norms. The overlay evaluates the closed-form squared-error
    bound at rho = 2.63 * sigma_measurement per point (nan when vacuous).
    Rank-deficient trials are skipped and counted.
    """
    if cfg.experiment != "nmse":
        raise ValueError("config is for experiment %r" % cfg.experiment)
    if matrix is None:
        matrix, family_note = build_experiment_matrix(cfg)
    mu = mutual_coherence(matrix)
    points = []
    for p_idx, sigma_axis in enumerate(cfg.sweep):
        sigma_meas = sigma_axis / math.sqrt(cfg.m)
        rho_val = DEFAULT_RHO_OVER_SIGMA * sigma_meas
        bound = mse_upper_bound(mu, matrix.d_min, matrix.d_max, cfg.k, rho_val)
        errs = np.empty(cfg.trials, dtype=np.float64)
        norm_sum = 0.0
        done = 0
        skipped = 0
        cond_n = 0
        cond_max = math.nan
        for t_idx in range(cfg.trials):
            x = sample_sparse_signal(cfg.n, cfg.k, _trial_signal_seed(cfg, p_idx, t_idx))
            ms = measure(matrix, x, sigma_meas, _trial_noise_seed(cfg, p_idx, t_idx))
            try:
                trace = omp_recover(matrix, ms.observations, cfg.k)
            except RankDeficiencyError:
                skipped += 1
                continue
            dense = x.to_dense()
            sq_err = float(np.sum(np.abs(trace.estimate - dense) ** 2))
            errs[done] = sq_err
            norm_sum += float(np.sum(np.abs(dense) ** 2))
            done += 1
            if sigma_meas > 0:
                holds, _ = support_recovery_condition(
                    mu, matrix.d_min, matrix.d_max, cfg.k, rho_val, x.x_min
                )
                if holds:
                    v = ms.observations - matrix.entries @ dense
                    if empirical_event_check(matrix, v, rho_val):
                        cond_n += 1
                        cond_max = sq_err if math.isnan(cond_max) else max(cond_max, sq_err)
        errs = errs[:done]
        nmse = float(errs.sum() / norm_sum) if done else math.nan
        if done > 1 and norm_sum > 0:
            hw = float(_WILSON_Z * errs.std(ddof=1) / math.sqrt(done) / (norm_sum / done))
        else:
            hw = math.nan
        if nmse > 0:
            db = nmse_db(nmse)
            db_hw = math.nan if math.isnan(hw) else 10.0 / math.log(10.0) * hw / nmse
        else:
            db, db_hw = None, None
        points.append(
            PointStats(
                operating_point=sigma_axis, metric="nmse", value=nmse,
                ci_half_width=hw, trials_done=done, skipped=skipped,
                bound_value=bound if bound is not None else math.nan,
                db_value=db, db_half_width=db_hw,
                conditioned_trials=cond_n, conditioned_max_sqerr=cond_max,
            )
        )
    return ExperimentResult(
        config=cfg, points=tuple(points), mu=mu,
        d_min=matrix.d_min, d_max=matrix.d_max,
        family_note=family_note or cfg.family,
    )


def run_support_experiment(cfg: ExperimentConfig, matrix: CsMatrix | None = None,
                           family_note: str | None = None) -> ExperimentResult:
    """Exact-support-recovery rate across the x_min/sigma sweep.

    Per point t the ground truth is drawn with the floor sampler and rescaled
    so its weakest coefficient modulus is exactly t * sigma; the rate of exact
    support-set matches is reported with a Wilson 95% half-width.
    """
    if cfg.experiment != "support":
        raise ValueError("config is for experiment %r" % cfg.experiment)
    if matrix is None:
        matrix, family_note = build_experiment_matrix(cfg)
    mu = mutual_coherence(matrix)
    sigma_meas = cfg.sigma / math.sqrt(cfg.m)
    points = []
    for p_idx, t_val in enumerate(cfg.sweep):
        x_min_val = t_val * cfg.sigma
        successes = 0
        done = 0
        skipped = 0
        for t_idx in range(cfg.trials):
            x = sample_sparse_signal_with_floor(
                cfg.n, cfg.k, x_min_val, _trial_signal_seed(cfg, p_idx, t_idx)
            )
            x = _exact_min_rescale(x, x_min_val)
            ms = measure(matrix, x, sigma_meas, _trial_noise_seed(cfg, p_idx, t_idx))
            try:
                trace = omp_recover(matrix, ms.observations, cfg.k)
            except RankDeficiencyError:
                skipped += 1
                continue
            done += 1
            if trace.support == frozenset(int(i) for i in x.support):
                successes += 1
        rate = successes / done if done else math.nan
        points.append(
            PointStats(
                operating_point=t_val, metric="support_rate", value=rate,
                ci_half_width=wilson_half_width(successes, done),
                trials_done=done, skipped=skipped, bound_value=math.nan,
            )
        )
    return ExperimentResult(
        config=cfg, points=tuple(points), mu=mu,
        d_min=matrix.d_min, d_max=matrix.d_max,
        family_note=family_note or cfg.family,
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.experiment == "nmse":
        return run_nmse_experiment(cfg)
    return run_support_experiment(cfg)
