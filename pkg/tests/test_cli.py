import numpy as np
import pytest

import nwomp as nw
from nwomp.cli import EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from nwomp.guarantees import load_report
from nwomp.matrices import load_matrix_text, save_matrix_text
from nwomp.signals import load_signal_csv, save_measurements_csv


def run_cli(*args):
    return main([str(a) for a in args])


def test_matrix_zc_stats_and_determinism(tmp_path, capsys):
    out = tmp_path / "zc.txt"
    assert run_cli("matrix", "--family", "zc", "--N", "32", "--M", "20", "--out", out) == EXIT_OK
    printed = capsys.readouterr().out
    assert "ratio=1.000000" in printed
    first = out.read_bytes()
    assert run_cli("matrix", "--family", "zc", "--N", "32", "--M", "20", "--out", out) == EXIT_OK
    assert out.read_bytes() == first
    assert (tmp_path / "zc.txt.meta").exists()
    matrix = load_matrix_text(out)
    assert matrix.shape == (20, 32)


def test_matrix_random_family_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        assert run_cli("matrix", "--family", "random2bit", "--seed", 7, "--out", out) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_matrix_rejects_m_not_less_than_n(tmp_path):
    code = run_cli("matrix", "--family", "zc", "--N", "32", "--M", "40",
                   "--out", tmp_path / "x.txt")
    assert code == EXIT_USAGE


def test_guarantee_report(tmp_path):
    mat = tmp_path / "m.txt"
    run_cli("matrix", "--family", "zc", "--out", mat)
    rep_path = tmp_path / "rep.txt"
    assert run_cli("guarantee", "--matrix", mat, "--k", 2, "--sigma", "0.1",
                   "--rho-over-sigma", "2.63", "--x-min", "0.5",
                   "--out", rep_path) == EXIT_OK
    rep = load_report(rep_path)
    assert rep.rho == pytest.approx(0.263)
    csv_path = tmp_path / "rep.csv"
    assert run_cli("guarantee", "--matrix", mat, "--k", 2, "--sigma", "0.1",
                   "--rho-over-sigma", "2.63", "--csv", "--out", csv_path) == EXIT_OK
    assert load_report(csv_path).rho == pytest.approx(0.263)


def test_guarantee_missing_matrix(tmp_path):
    code = run_cli("guarantee", "--matrix", tmp_path / "absent.txt", "--k", 2,
                   "--sigma", "0.1", "--out", tmp_path / "r.txt")
    assert code == EXIT_IO


def test_recover_single_column(tmp_path):
    mat = tmp_path / "m.txt"
    run_cli("matrix", "--family", "zc", "--seed", 3, "--out", mat)
    matrix = load_matrix_text(mat)
    x = nw.SparseSignal(32, [5], [2.0 + 0j])
    ms = nw.measure(matrix, x, 0.0, seed=0)
    meas = tmp_path / "y.csv"
    save_measurements_csv(ms, meas)
    trace_path, est_path = tmp_path / "t.csv", tmp_path / "e.csv"
    assert run_cli("recover", "--matrix", mat, "--measurements", meas, "--k", 1,
                   "--out-trace", trace_path, "--out-estimate", est_path) == EXIT_OK
    est = load_signal_csv(est_path)
    assert list(est.support) == [5]
    assert est.coefficients[0] == pytest.approx(2.0, abs=1e-8)
    assert trace_path.read_text().startswith("iteration,selected_index,residual_norm")


def test_recover_noiseless_exact(tmp_path):
    mat = tmp_path / "m.txt"
    run_cli("matrix", "--family", "zc", "--seed", 3, "--out", mat)
    matrix = load_matrix_text(mat)
    x = nw.sample_sparse_signal(32, 2, seed=11)
    save_measurements_csv(nw.measure(matrix, x, 0.0, seed=0), tmp_path / "y.csv")
    assert run_cli("recover", "--matrix", mat, "--measurements", tmp_path / "y.csv",
                   "--k", 2, "--out-trace", tmp_path / "t.csv",
                   "--out-estimate", tmp_path / "e.csv") == EXIT_OK
    est = load_signal_csv(tmp_path / "e.csv")
    assert set(est.support) == set(x.support)


def test_recover_dimension_mismatch(tmp_path):
    mat = tmp_path / "m.txt"
    run_cli("matrix", "--family", "zc", "--out", mat)
    ms = nw.MeasurementSet(np.zeros(7, complex) + 1.0, 0.0, 0)
    save_measurements_csv(ms, tmp_path / "y.csv")
    code = run_cli("recover", "--matrix", mat, "--measurements", tmp_path / "y.csv",
                   "--k", 1, "--out-trace", tmp_path / "t.csv",
                   "--out-estimate", tmp_path / "e.csv")
    assert code == EXIT_USAGE


def test_recover_rank_deficiency_exit_code(tmp_path):
    rng = np.random.default_rng(23)
    raw = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
    raw[:, 4] = raw[:, 1]
    matrix = nw.normalize_frobenius(raw)
    save_matrix_text(matrix, tmp_path / "m.txt")
    y = matrix.entries[:, 1] + matrix.entries[:, 4]
    save_measurements_csv(nw.MeasurementSet(y, 0.0, 0), tmp_path / "y.csv")
    code = run_cli("recover", "--matrix", tmp_path / "m.txt",
                   "--measurements", tmp_path / "y.csv", "--k", 2,
                   "--out-trace", tmp_path / "t.csv",
                   "--out-estimate", tmp_path / "e.csv")
    assert code == EXIT_NUMERICAL


def write_config(path, **kw):
    base = dict(experiment="nmse", sweep="0.1,0.4", trials=25, seed=5, family="zc")
    base.update(kw)
    path.write_text("".join("%s = %s\n" % (k, v) for k, v in base.items()))


def test_simulate_runs_and_is_deterministic(tmp_path):
    cfg = tmp_path / "cfg.txt"
    write_config(cfg)
    out = tmp_path / "res.csv"
    assert run_cli("simulate", "nmse", "--config", cfg, "--out", out) == EXIT_OK
    first = out.read_bytes()
    assert (tmp_path / "res.csv.meta").exists()
    assert run_cli("simulate", "nmse", "--config", cfg, "--out", out) == EXIT_OK
    assert out.read_bytes() == first
    header = out.read_text().split("\n")[1]
    assert header == "operating_point,metric,value,ci_half_width,trials,matrix_ratio,mu,bound_value"


def test_simulate_support_with_overrides(tmp_path):
    cfg = tmp_path / "cfg.txt"
    write_config(cfg, experiment="support", sweep="0.5,2.0")
    out = tmp_path / "res.csv"
    assert run_cli("simulate", "support", "--config", cfg, "--out", out,
                   "--trials", 10, "--seed", 8) == EXIT_OK
    meta = (tmp_path / "res.csv.meta").read_text()
    assert "trials = 10" in meta and "seed = 8" in meta


def test_simulate_empty_sweep_rejected(tmp_path):
    cfg = tmp_path / "cfg.txt"
    write_config(cfg, sweep="")
    code = run_cli("simulate", "nmse", "--config", cfg, "--out", tmp_path / "r.csv")
    assert code in (EXIT_USAGE, EXIT_IO) and code != EXIT_OK


def test_simulate_missing_config(tmp_path):
    code = run_cli("simulate", "nmse", "--config", tmp_path / "absent.txt",
                   "--out", tmp_path / "r.csv")
    assert code == EXIT_IO
