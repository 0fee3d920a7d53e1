"""End-to-end tests for the fejerlab command-line interface.

Every test drives cli.main(argv) in process with a JSON config written to a
temp directory, then checks the exit code, the printed output, and the files
written under the --out prefix.
"""

import csv
import json

import pytest

from fejerlab.cli import main
from fejerlab.moduli import Constant, Harmonic, schedule_to_spec
from fejerlab.problems import (
    problem_to_spec,
    segment_argmin,
    tripod_median,
    two_halfspace,
)
from fejerlab.spaces import Euclidean, Tripod, point_to_spec

# ---------------------------------------------------------------------------
# Config builders
# ---------------------------------------------------------------------------


def rate_config(paths=400, horizon=1500, seed=7, threads=1, epsilons=(1.0,), lam=0.1):
    """Small projection-splitting experiment with a rate-certificate audit."""
    return {
        "space": "euclidean",
        "problem": problem_to_spec(two_halfspace()),
        "algorithm": "skm",
        "x0": point_to_spec(Euclidean((1.0, 1.0))),
        "schedule": schedule_to_spec(Constant(0.5)),
        "ensemble": {"paths": paths, "horizon": horizon, "seed": seed, "threads": threads},
        "audit": {"epsilons": list(epsilons), "lambda": lam},
    }


def fast_config(paths=200, horizon=400, seed=11):
    cfg = rate_config(paths=paths, horizon=horizon, seed=seed)
    cfg["audit"] = {"epsilons": [1.0, 4.0], "fast": {"c": 2.0, "r": 16}}
    return cfg


def sb_liminf_config(paths=128, horizon=400, seed=5):
    return {
        "space": "euclidean",
        "problem": problem_to_spec(segment_argmin()),
        "algorithm": "sb",
        "x0": point_to_spec(Euclidean((0.0, 2.0))),
        "schedule": schedule_to_spec(Harmonic(1.0, 1.0)),
        "ensemble": {"paths": paths, "horizon": horizon, "seed": seed, "threads": 1},
        "audit": {"epsilons": [1.0], "liminf": {"epsilon": 1.0, "start": 0}},
    }


def tripod_liminf_config(paths=64, horizon=120, seed=3):
    return {
        "space": "tripod",
        "problem": problem_to_spec(tripod_median(4.0)),
        "algorithm": "sppa",
        "x0": point_to_spec(Tripod(0, 3.0)),
        "schedule": schedule_to_spec(Harmonic(1.0, 1.0)),
        "ensemble": {"paths": paths, "horizon": horizon, "seed": seed, "threads": 1},
        "audit": {"epsilons": [2.0], "liminf": {"epsilon": 2.0, "start": 0}},
    }


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
    return str(path)


def run_cli(*argv):
    return main(list(argv))


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_passes_and_prints_machine_readable_summary(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config(paths=4, horizon=4))
    rc = run_cli("validate", "--config", cfg)
    out = capsys.readouterr().out
    summary = json.loads(out)
    assert rc == 0
    assert summary["pass"] is True
    assert summary["space"] == "euclidean"


def test_validate_tripod_space(tmp_path, capsys):
    cfg = write_config(tmp_path, tripod_liminf_config(paths=2, horizon=2))
    rc = run_cli("validate", "--config", cfg)
    summary = json.loads(capsys.readouterr().out)
    assert rc == 0 and summary["pass"] is True and summary["space"] == "tripod"


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_writes_curves_with_one_row_per_iterate(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config(paths=1, horizon=10))
    out = str(tmp_path / "a_")
    rc = run_cli("run", "--config", cfg, "--out", out)
    assert rc == 0
    printed = capsys.readouterr().out
    assert f"wrote {out}curves.csv" in printed
    with open(out + "curves.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 11  # header + iterates 0..horizon
    assert rows[0][:4] == ["n", "mean_dist", "mean_sq_dist", "mean_gap"]


def test_run_is_byte_identical_across_invocations(tmp_path):
    cfg = write_config(tmp_path, rate_config(paths=40, horizon=60))
    run_cli("run", "--config", cfg, "--out", str(tmp_path / "a_"))
    run_cli("run", "--config", cfg, "--out", str(tmp_path / "b_"))
    a = (tmp_path / "a_curves.csv").read_bytes()
    b = (tmp_path / "b_curves.csv").read_bytes()
    assert a == b


def test_seed_override_changes_the_curves(tmp_path):
    cfg = write_config(tmp_path, rate_config(paths=40, horizon=60, seed=7))
    run_cli("run", "--config", cfg, "--out", str(tmp_path / "a_"))
    run_cli("run", "--config", cfg, "--out", str(tmp_path / "b_"), "--seed-override", "8")
    run_cli("run", "--config", cfg, "--out", str(tmp_path / "c_"), "--seed-override", "7")
    a = (tmp_path / "a_curves.csv").read_bytes()
    b = (tmp_path / "b_curves.csv").read_bytes()
    c = (tmp_path / "c_curves.csv").read_bytes()
    assert a != b
    assert a == c  # overriding with the config's own seed is a no-op


def test_seed_override_out_of_range_is_an_input_error(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config(paths=2, horizon=2))
    rc = run_cli("run", "--config", cfg, "--seed-override", "-1")
    assert rc == 1
    assert "--seed-override" in capsys.readouterr().err


def test_run_to_unwritable_prefix_is_a_runtime_error(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config(paths=2, horizon=2))
    rc = run_cli("run", "--config", cfg, "--out", str(tmp_path / "missing" / "dir_"))
    assert rc == 3
    assert "runtime error" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# audit: rate certificates
# ---------------------------------------------------------------------------


def test_audit_rate_certificate_passes_and_writes_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config())
    out = str(tmp_path / "r_")
    rc = run_cli("audit", "--config", cfg, "--out", out)
    printed = capsys.readouterr().out
    assert rc == 0
    assert "[PASS] mean-rate certificate check" in printed
    assert "[PASS] almost-sure tail check" in printed
    with open(out + "audit.json") as fh:
        doc = json.load(fh)
    assert doc["schema"] == "fejerlab-audit-v1"
    assert doc["kind"] == "rate"
    assert {r["criterion"] for r in doc["records"]} == {"mean", "almost_sure"}


def test_audit_beyond_horizon_checks_are_unchecked_not_failed(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config(horizon=900))
    out = str(tmp_path / "u_")
    rc = run_cli("audit", "--config", cfg, "--out", out)
    printed = capsys.readouterr().out
    assert rc == 0  # unchecked records do not fail the audit
    assert "[UNCHECKED] almost-sure tail check" in printed
    assert "horizon" in printed


def test_audit_reaudit_from_curves_matches_the_original(tmp_path):
    cfg = write_config(tmp_path, rate_config())
    out = str(tmp_path / "r_")
    assert run_cli("audit", "--config", cfg, "--out", out) == 0
    re_out = str(tmp_path / "re_")
    rc = run_cli(
        "audit", "--config", cfg, "--out", re_out, "--curves", out + "curves.csv"
    )
    assert rc == 0
    original = (tmp_path / "r_audit.json").read_bytes()
    reaudited = (tmp_path / "re_audit.json").read_bytes()
    assert original == reaudited


def test_audit_doctored_curves_fail_with_exit_4(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config())
    out = str(tmp_path / "r_")
    assert run_cli("audit", "--config", cfg, "--out", out) == 0
    with open(out + "curves.csv") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    i_mean = header.index("mean_dist")
    i_tail = header.index("tail_eps_1.0")
    for row in rows[1:]:
        row[i_mean] = "9.9"  # every iterate pretends to sit far from the solutions
        row[i_tail] = "1"
    doctored = tmp_path / "doctored.csv"
    with open(doctored, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    rc = run_cli(
        "audit", "--config", cfg, "--out", str(tmp_path / "d_"), "--curves", str(doctored)
    )
    printed = capsys.readouterr().out
    assert rc == 4
    assert "[FAIL] mean-rate certificate check" in printed
    assert "[FAIL] almost-sure tail check" in printed


def test_audit_corrupted_curves_file_is_an_input_error(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config())
    bad = tmp_path / "bad.csv"
    bad.write_text("n,mean_dist\n0,1.0\n")
    rc = run_cli(
        "audit", "--config", cfg, "--out", str(tmp_path / "x_"), "--curves", str(bad)
    )
    assert rc == 1
    assert "--curves" in capsys.readouterr().err


def test_audit_curves_missing_tail_threshold_is_an_input_error(tmp_path, capsys):
    cfg_run = write_config(tmp_path, rate_config(epsilons=(1.0,)), name="run.json")
    out = str(tmp_path / "r_")
    assert run_cli("audit", "--config", cfg_run, "--out", out) == 0
    cfg_wider = write_config(tmp_path, rate_config(epsilons=(2.0,)), name="wider.json")
    rc = run_cli(
        "audit",
        "--config",
        cfg_wider,
        "--out",
        str(tmp_path / "w_"),
        "--curves",
        out + "curves.csv",
    )
    assert rc == 1
    assert "missing tail thresholds" in capsys.readouterr().err


def test_audit_without_lambda_is_an_input_error(tmp_path, capsys):
    cfg = rate_config(paths=2, horizon=2)
    del cfg["audit"]["lambda"]
    path = write_config(tmp_path, cfg)
    rc = run_cli("audit", "--config", path, "--out", str(tmp_path / "x_"))
    assert rc == 1
    assert "config.audit.lambda" in capsys.readouterr().err


def test_audit_unknown_modulus_shape_exits_5(tmp_path, capsys):
    # Equal-weight two-atom Busemann objectives have no catalogued regularity
    # modulus, so a certificate audit must fail fast with the dedicated code.
    cfg = sb_liminf_config(paths=2, horizon=2)
    cfg["audit"] = {"epsilons": [1.0], "lambda": 0.5}
    path = write_config(tmp_path, cfg)
    rc = run_cli("audit", "--config", path, "--out", str(tmp_path / "x_"))
    assert rc == 5
    assert "no modulus known" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# audit: fast-rate and gap-window variants
# ---------------------------------------------------------------------------


def test_audit_fast_rate_passes(tmp_path, capsys):
    cfg = write_config(tmp_path, fast_config())
    out = str(tmp_path / "f_")
    rc = run_cli("audit", "--config", cfg, "--out", out)
    printed = capsys.readouterr().out
    assert rc == 0
    assert "[PASS] fast-rate envelope check" in printed
    assert "[PASS] fast-rate tail check" in printed
    with open(out + "audit.json") as fh:
        doc = json.load(fh)
    assert doc["kind"] == "fast"
    criteria = {r["criterion"] for r in doc["records"]}
    assert criteria == {"fast_mean_envelope", "fast_tail"}


def test_audit_fast_rejects_infeasible_parameters(tmp_path, capsys):
    cfg = fast_config(paths=2, horizon=2)
    cfg["audit"]["fast"] = {"c": 2.0, "r": 15}  # root schedule infeasible: 4vc > r
    path = write_config(tmp_path, cfg)
    rc = run_cli("audit", "--config", path, "--out", str(tmp_path / "x_"))
    assert rc == 1
    assert "config.audit.fast" in capsys.readouterr().err


def test_audit_gap_window_passes_with_witness_and_caveat(tmp_path, capsys):
    cfg = write_config(tmp_path, sb_liminf_config())
    out = str(tmp_path / "g_")
    rc = run_cli("audit", "--config", cfg, "--out", out)
    printed = capsys.readouterr().out
    assert rc == 0
    assert "[PASS] gap-window (liminf) check" in printed
    assert "window [0, 175]" in printed
    assert "astronomically large" in printed
    with open(out + "audit.json") as fh:
        doc = json.load(fh)
    assert doc["kind"] == "liminf"
    assert doc["records"][0]["criterion"] == "gap_window"
    assert doc["records"][0]["bound_satisfied"] is True


def test_audit_gap_window_witness_can_precede_a_long_window(tmp_path, capsys):
    # The certified window end (1425) exceeds this short horizon, but the
    # witness iterate appears early, so the check still passes.
    cfg = write_config(tmp_path, tripod_liminf_config())
    rc = run_cli("audit", "--config", cfg, "--out", str(tmp_path / "t_"))
    printed = capsys.readouterr().out
    assert rc == 0
    assert "window [0, 1425]" in printed
    assert "witness at n=" in printed


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def test_report_summarizes_a_rate_audit(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config())
    out = str(tmp_path / "r_")
    assert run_cli("audit", "--config", cfg, "--out", out) == 0
    capsys.readouterr()
    rc = run_cli("report", "--config", cfg, "--out", out)
    printed = capsys.readouterr().out
    assert rc == 0
    assert (
        "fejerlab report: kind=rate algorithm=skm paths=400 horizon=1500 lambda=0.1"
        in printed
    )
    assert "mean-rate certificate check" in printed
    assert "almost-sure tail check" in printed
    assert "checks: 2 passed, 0 failed, 0 unchecked" in printed


def test_report_counts_unchecked_records(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config(horizon=900))
    out = str(tmp_path / "u_")
    assert run_cli("audit", "--config", cfg, "--out", out) == 0
    capsys.readouterr()
    rc = run_cli("report", "--config", cfg, "--out", out)
    printed = capsys.readouterr().out
    assert rc == 0
    assert "checks: 1 passed, 0 failed, 1 unchecked" in printed


def test_report_missing_outputs_is_an_input_error(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config(paths=2, horizon=2))
    rc = run_cli("report", "--config", cfg, "--out", str(tmp_path / "nope_"))
    assert rc == 1
    assert "report input error" in capsys.readouterr().err


def test_report_rejects_unknown_audit_schema(tmp_path, capsys):
    cfg = write_config(tmp_path, rate_config())
    out = str(tmp_path / "r_")
    assert run_cli("audit", "--config", cfg, "--out", out) == 0
    with open(out + "audit.json") as fh:
        doc = json.load(fh)
    doc["schema"] = "fejerlab-audit-v999"
    with open(out + "audit.json", "w") as fh:
        json.dump(doc, fh)
    rc = run_cli("report", "--config", cfg, "--out", out)
    assert rc == 1
    assert "schema" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------


def test_malformed_json_reports_line_and_column(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"space": "euclidean",\n  "problem": }')
    rc = run_cli("validate", "--config", str(path))
    err = capsys.readouterr().err
    assert rc == 1
    assert "line 2" in err


def test_missing_config_file_is_an_input_error(tmp_path, capsys):
    rc = run_cli("validate", "--config", str(tmp_path / "absent.json"))
    assert rc == 1
    assert "cannot read" in capsys.readouterr().err


def test_unknown_top_level_field_is_rejected(tmp_path, capsys):
    cfg = rate_config(paths=2, horizon=2)
    cfg["extra"] = 1
    rc = run_cli("validate", "--config", write_config(tmp_path, cfg))
    assert rc == 1
    assert "unknown field" in capsys.readouterr().err


def test_invalid_start_point_is_rejected_with_field_path(tmp_path, capsys):
    cfg = rate_config(paths=2, horizon=2)
    cfg["x0"] = {"space": "halfplane", "x": 0.0, "y": 0.0}  # boundary: not a point
    rc = run_cli("validate", "--config", write_config(tmp_path, cfg))
    assert rc == 1
    assert "config.x0" in capsys.readouterr().err


def test_space_point_mismatch_is_rejected(tmp_path, capsys):
    cfg = rate_config(paths=2, horizon=2)
    cfg["x0"] = point_to_spec(Tripod(0, 1.0))
    rc = run_cli("validate", "--config", write_config(tmp_path, cfg))
    assert rc == 1
    assert "config.x0" in capsys.readouterr().err


def test_cross_field_schedule_check_is_rejected(tmp_path, capsys):
    cfg = tripod_liminf_config(paths=2, horizon=2)
    cfg["schedule"] = schedule_to_spec(Constant(0.5))  # not summable: invalid for sppa
    rc = run_cli("validate", "--config", write_config(tmp_path, cfg))
    assert rc == 1
    assert "config:" in capsys.readouterr().err


def test_fast_and_liminf_are_mutually_exclusive(tmp_path, capsys):
    cfg = fast_config(paths=2, horizon=2)
    cfg["audit"]["liminf"] = {"epsilon": 1.0, "start": 0}
    rc = run_cli("validate", "--config", write_config(tmp_path, cfg))
    assert rc == 1
    assert "at most one" in capsys.readouterr().err


def test_duplicate_audit_thresholds_are_rejected(tmp_path, capsys):
    cfg = rate_config(paths=2, horizon=2, epsilons=(1.0, 1.0))
    rc = run_cli("validate", "--config", write_config(tmp_path, cfg))
    assert rc == 1
    assert "distinct" in capsys.readouterr().err
