import json
import subprocess
import sys

import numpy as np
import pytest

from amlc.cli import build_parser, main
from amlc.codes import (
    EnsembleSpec,
    avg_distance_spectrum,
    expurgate_spectrum,
    read_alist,
    read_spectrum_csv,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sample_writes_a_loadable_alist(tmp_path, capsys):
    path = str(tmp_path / "code.alist")
    code, out, _ = run_cli(capsys, "sample", "--n", "16", "--seed", "3",
                           "--out", path)
    assert code == 0
    info = json.loads(out)
    assert info["n"] == 16 and info["checks"] == 12
    assert info["seed"] == 3 and info["attempts"] >= 1
    h = read_alist(path)
    assert h.n_vars == 16
    assert all(len(a) == 3 for a in h.var_neighbors)
    assert all(len(a) == 4 for a in h.check_neighbors)

    twin = str(tmp_path / "twin.alist")
    main(["sample", "--n", "16", "--seed", "3", "--out", twin])
    capsys.readouterr()
    assert open(path).read() == open(twin).read()
    other = str(tmp_path / "other.alist")
    main(["sample", "--n", "16", "--seed", "4", "--out", other])
    capsys.readouterr()
    assert open(path).read() != open(other).read()


def test_sample_reports_the_distance_bound(tmp_path, capsys):
    path = str(tmp_path / "code.alist")
    code, out, _ = run_cli(capsys, "sample", "--n", "12", "--seed", "0",
                           "--out", path, "--with-lb")
    assert code == 0
    assert json.loads(out)["min_distance_lb"] >= 1


def test_spectrum_csv_round_trips_with_provenance(tmp_path, capsys):
    path = str(tmp_path / "spec.csv")
    code, _, _ = run_cli(capsys, "spectrum", "--n", "16", "--out", path)
    assert code == 0
    first = open(path).readline()
    assert first.startswith("# config:")
    assert json.loads(first[len("# config:"):])["n"] == 16
    table = read_spectrum_csv(path)
    want = avg_distance_spectrum(EnsembleSpec(16, 3, 4))
    assert table.n_vars == 16
    assert np.array_equal(table.zero_mask, want.zero_mask)
    live = ~np.asarray(table.zero_mask, dtype=bool)
    assert np.allclose(np.asarray(table.log_counts)[live],
                       np.asarray(want.log_counts)[live], atol=1e-12)


def test_spectrum_gamma_expurgates_and_doubles(tmp_path, capsys):
    path = str(tmp_path / "spec.csv")
    code, _, _ = run_cli(capsys, "spectrum", "--n", "16", "--gamma", "2",
                         "--out", path)
    assert code == 0
    table = read_spectrum_csv(path)
    want = expurgate_spectrum(avg_distance_spectrum(EnsembleSpec(16, 3, 4)),
                              2, doubling=True)
    assert np.array_equal(table.zero_mask, want.zero_mask)
    assert table.zero_mask[1] and table.zero_mask[2]
    live = ~np.asarray(table.zero_mask, dtype=bool)
    assert np.allclose(np.asarray(table.log_counts)[live],
                       np.asarray(want.log_counts)[live], atol=1e-12)


def test_decode_emits_a_verdict_object(tmp_path, capsys):
    path = str(tmp_path / "code.alist")
    main(["sample", "--n", "16", "--seed", "3", "--out", path])
    capsys.readouterr()
    code, out, _ = run_cli(capsys, "decode", "--alist", path,
                           "--channel", "bsc:0.02", "--seed", "1")
    assert code == 0
    doc = json.loads(out)
    for key in ("holds", "gap", "bp_codeword", "bp_converged",
                "bp_iterations", "lp_objective", "lp_integral",
                "lp_certified_gap", "config"):
        assert key in doc
    assert isinstance(doc["holds"], bool)
    assert doc["config"]["channel"] == "bsc:0.02"
    assert doc["config"]["delta"] == 0.0

    again_code, again_out, _ = run_cli(capsys, "decode", "--alist", path,
                                       "--channel", "bsc:0.02", "--seed", "1")
    assert again_out == out


def test_bound_sweep_writes_the_grid(tmp_path, capsys):
    path = str(tmp_path / "sweep.csv")
    code, _, _ = run_cli(capsys, "bound", "--n", "24", "--gamma", "2",
                         "--p-grid", "0.06,0.08", "--deltas", "0,5",
                         "--out", path)
    assert code == 0
    lines = open(path).read().strip().split("\n")
    assert lines[0].startswith("# config:")
    assert lines[1] == "p,delta,ln_bound"
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 4
    for p, d, v in rows:
        assert float(v) <= 0.0
    assert [(r[0], r[1]) for r in rows] == [
        ("0.059999999999999998", "0"), ("0.059999999999999998", "5"),
        ("0.080000000000000002", "0"), ("0.080000000000000002", "5")]


def test_bound_sweep_defaults_to_stdout(capsys):
    code, out, _ = run_cli(capsys, "bound", "--n", "24", "--gamma", "2",
                           "--p-grid", "0.06", "--deltas", "0")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "p,delta,ln_bound"
    assert len(lines) == 2


def test_confidence_produces_all_artifacts(tmp_path, capsys):
    report = str(tmp_path / "report.json")
    trials = str(tmp_path / "trials.csv")
    bound = str(tmp_path / "bound.csv")
    code, out, _ = run_cli(capsys, "confidence", "--n", "24",
                           "--channel", "bsc:0.001", "--trials", "4",
                           "--gamma", "1", "--seed", "7",
                           "--report-out", report, "--trials-out", trials,
                           "--bound-out", bound)
    assert code == 0
    doc = json.loads(out)
    assert doc["trials"] == 4
    assert doc["status"] in ("ok", "error")

    full = json.loads(open(report).read())
    assert full["config"]["master_seed"] == 7
    assert full["ds2"]["total_ln"] <= 0.0

    tlines = open(trials).read().strip().split("\n")
    assert tlines[0].startswith("# config:")
    assert tlines[1].startswith("index,seed,")
    assert len(tlines) == 2 + 4

    blines = open(bound).read().strip().split("\n")
    assert blines[0] == "h,ln_P1,lambda,rho,kappa"
    assert blines[-1].startswith("total,")


def test_error_verdict_is_still_a_completed_run(capsys):
    code, out, _ = run_cli(capsys, "confidence", "--n", "16",
                           "--channel", "bsc:0.06", "--trials", "2",
                           "--gamma", "10", "--seed", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "error"
    assert doc["log2_confidence_deficit"] is None
    assert doc["epsilon"] == 1.0


def test_confidence_run_alias_matches(capsys):
    argv = ["--n", "16", "--channel", "bsc:0.06", "--trials", "2",
            "--gamma", "10", "--seed", "3"]
    _, out_a, _ = run_cli(capsys, "confidence", *argv)
    _, out_b, _ = run_cli(capsys, "confidence-run", *argv)
    assert out_a == out_b


def test_mindist_lb_command(tmp_path, capsys):
    path = str(tmp_path / "code.alist")
    main(["sample", "--n", "12", "--seed", "0", "--out", path])
    capsys.readouterr()
    code, out, _ = run_cli(capsys, "mindist-lb", "--alist", path,
                           "--stop-at", "2")
    assert code == 0
    doc = json.loads(out)
    assert isinstance(doc["min_distance_lb"], int)
    assert doc["min_distance_lb"] >= 1
    assert doc["stop_at"] == 2


def test_config_file_feeds_defaults_and_flags_win(tmp_path, capsys):
    out_a = str(tmp_path / "a.alist")
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": 16, "seed": 5, "out": out_a}))
    code, out, _ = run_cli(capsys, "--config", str(cfg), "sample")
    assert code == 0
    assert json.loads(out)["seed"] == 5

    # an explicit flag must beat the config value
    out_b = str(tmp_path / "b.alist")
    code, out, _ = run_cli(capsys, "--config", str(cfg), "sample",
                           "--seed", "9", "--out", out_b)
    assert code == 0
    assert json.loads(out)["seed"] == 9
    assert open(out_a).read() != open(out_b).read()


def test_bad_inputs_exit_nonzero(tmp_path, capsys):
    code, _, err = run_cli(capsys, "decode", "--alist",
                           str(tmp_path / "missing.alist"),
                           "--channel", "bsc:0.02")
    assert code == 1 and err.startswith("amlc:")

    path = str(tmp_path / "code.alist")
    main(["sample", "--n", "12", "--seed", "0", "--out", path])
    capsys.readouterr()
    code, _, err = run_cli(capsys, "decode", "--alist", path,
                           "--channel", "not-a-channel")
    assert code == 1 and "channel" in err

    code, _, err = run_cli(capsys, "decode", "--alist", path,
                           "--channel", "bsc:1.5")
    assert code == 1

    with pytest.raises(SystemExit):
        main([])  # a subcommand is mandatory


def test_workers_default_comes_from_the_environment(monkeypatch):
    monkeypatch.setenv("AMLC_WORKERS", "2")
    args = build_parser().parse_args(
        ["confidence", "--n", "16", "--channel", "bsc:0.06", "--trials", "1"])
    assert args.workers == 2
    monkeypatch.delenv("AMLC_WORKERS")
    args = build_parser().parse_args(
        ["confidence", "--n", "16", "--channel", "bsc:0.06", "--trials", "1"])
    assert args.workers == 1


def test_console_entry_point_is_installed():
    proc = subprocess.run([sys.executable, "-m", "amlc.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sample" in proc.stdout and "confidence" in proc.stdout
