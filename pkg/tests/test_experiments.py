import math

import numpy as np
import pytest

import nwomp as nw
from nwomp._text import FormatError
from nwomp.experiments import (
    ExperimentConfig,
    build_experiment_matrix,
    load_config,
    parse_config_file,
    run_experiment,
    run_nmse_experiment,
    run_support_experiment,
    wilson_half_width,
)
from nwomp.matrices import save_code_text


def small_cfg(**kw):
    base = dict(experiment="nmse", sweep=(0.1,), trials=50, master_seed=5)
    base.update(kw)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        small_cfg(sweep=())
    with pytest.raises(ValueError):
        small_cfg(k=21)
    with pytest.raises(ValueError):
        small_cfg(m=32)
    with pytest.raises(ValueError):
        small_cfg(family="ratio")  # missing target
    with pytest.raises(ValueError):
        small_cfg(family="file")  # missing path
    with pytest.raises(ValueError):
        small_cfg(experiment="support", sweep=(0.0, 1.0))
    with pytest.raises(ValueError):
        small_cfg(trials=0)


def test_config_file_roundtrip(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text(
        "# comment\n"
        "experiment = support\n"
        "sweep = 0.5, 1.0\n"
        "trials = 20\n"
        "seed = 99\n"
        "family = zc\n"
    )
    cfg = load_config(p)
    assert cfg.experiment == "support"
    assert cfg.sweep == (0.5, 1.0)
    assert cfg.trials == 20
    assert cfg.master_seed == 99
    # overrides win over file values
    cfg2 = load_config(p, {"trials": 7, "seed": None})
    assert cfg2.trials == 7 and cfg2.master_seed == 99


def test_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("experiment = nmse\nsweep = 0.1\nbogus = 1\n")
    with pytest.raises(FormatError):
        load_config(p)


def test_config_hash_tracks_content():
    a = small_cfg()
    b = small_cfg(trials=51)
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == small_cfg().config_hash()


def test_parse_config_file_rejects_bad_lines(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("this is not a key value line\n")
    with pytest.raises(FormatError):
        parse_config_file(p)


# ---------------------------------------------------------------------------
# Matrix families
# ---------------------------------------------------------------------------

def test_family_matrices(tmp_path):
    a, note = build_experiment_matrix(small_cfg(family="zc"))
    assert note == "zadoff-chu" and a.norm_ratio == pytest.approx(1.0, abs=1e-9)
    a, note = build_experiment_matrix(small_cfg(family="random2bit"))
    assert "random" in note and a.norm_ratio > 1
    a, note = build_experiment_matrix(
        small_cfg(family="ratio", target_ratio=2.43, search_attempts=1500)
    )
    assert abs(a.norm_ratio - 2.43) <= 0.35
    code_path = tmp_path / "code.txt"
    save_code_text(nw.zadoff_chu(32), code_path)
    a, note = build_experiment_matrix(small_cfg(family="file", code_file=str(code_path)))
    assert a.norm_ratio == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def test_nmse_noiseless_machine_level():
    res = run_nmse_experiment(small_cfg(sweep=(0.0,), trials=100))
    assert res.points[0].value < 1e-20
    assert res.points[0].skipped == 0
    assert res.points[0].db_value is not None


def test_nmse_deterministic_output():
    cfg = small_cfg(sweep=(0.1, 0.4), trials=120)
    r1 = run_nmse_experiment(cfg)
    r2 = run_nmse_experiment(cfg)
    assert r1.csv_text() == r2.csv_text()
    assert r1.metadata_text() == r2.metadata_text()


def test_nmse_conditioned_subset_respects_bound():
    # tiny noise: the recovery condition holds for most draws, so the
    # conditioned subset is populated and its worst error obeys the bound
    cfg = small_cfg(sweep=(0.01,), trials=300)
    res = run_nmse_experiment(cfg)
    point = res.points[0]
    assert point.conditioned_trials > 0
    assert not math.isnan(point.bound_value)
    assert point.conditioned_max_sqerr <= point.bound_value * (1 + 1e-9)


def test_nmse_csv_shape():
    res = run_nmse_experiment(small_cfg(sweep=(0.1,), trials=30))
    lines = res.csv_text().strip().split("\n")
    assert lines[1] == "operating_point,metric,value,ci_half_width,trials,matrix_ratio,mu,bound_value"
    metrics = [l.split(",")[1] for l in lines[2:]]
    assert metrics == ["nmse", "nmse_db"]


def test_support_rates_and_asymptote():
    cfg = small_cfg(experiment="support", sweep=(0.3, 20.0), trials=150)
    res = run_support_experiment(cfg)
    rates = [p.value for p in res.points]
    assert all(0.0 <= r <= 1.0 for r in rates)
    assert rates[1] == pytest.approx(1.0, abs=0.02)
    assert rates[1] >= rates[0]


def test_support_exact_min_scaling():
    # the drawn ground truth has weakest modulus exactly t * sigma
    from nwomp.experiments import _exact_min_rescale

    x = nw.sample_sparse_signal_with_floor(32, 2, 0.7, seed=3)
    x2 = _exact_min_rescale(x, 0.7)
    assert x2.x_min == pytest.approx(0.7, abs=1e-15)
    assert np.array_equal(x.support, x2.support)


def test_run_experiment_dispatch():
    res = run_experiment(small_cfg(trials=10))
    assert res.points[0].metric == "nmse"
    res = run_experiment(small_cfg(experiment="support", sweep=(1.0,), trials=10))
    assert res.points[0].metric == "support_rate"
    with pytest.raises(ValueError):
        run_nmse_experiment(small_cfg(experiment="support", sweep=(1.0,)))


def test_result_files(tmp_path):
    res = run_nmse_experiment(small_cfg(trials=20))
    out = tmp_path / "r.csv"
    res.save(out)
    assert out.exists() and (tmp_path / "r.csv.meta").exists()
    meta = (tmp_path / "r.csv.meta").read_text()
    assert "config_hash" in meta and "matrix_mu" in meta and "noise_convention" in meta


# ---------------------------------------------------------------------------
# Small numeric helpers
# ---------------------------------------------------------------------------

def test_nmse_db_values():
    assert nw.nmse_db(1.0) == 0.0
    assert nw.nmse_db(0.1) == pytest.approx(-10.0)
    a, b = 0.02, 0.5
    assert nw.nmse_db(a / b) == pytest.approx(nw.nmse_db(a) - nw.nmse_db(b))
    with pytest.raises(ValueError):
        nw.nmse_db(0.0)


def test_wilson_half_width_values():
    assert math.isnan(wilson_half_width(0, 0))
    hw = wilson_half_width(50, 100)
    assert hw == pytest.approx(0.0958, abs=2e-3)
    assert wilson_half_width(100, 100) < wilson_half_width(90, 100)
