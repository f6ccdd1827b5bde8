import json
import math
import os

import numpy as np
import pytest

from heatlab import cli


def write_config(path, text):
    path.write_text(text)
    return str(path)


def read_report(out_dir, name):
    with open(os.path.join(out_dir, name), "r") as fh:
        return json.load(fh)


OU_SPECTRUM = """
family = ou
radius = 8.0
n_points = 400
seed = 3
"""

VERIFY_SMALL = """
family = mu_a
a = 1.5
radius = 10.0
n_points = 300
weight = mu_a
beta = 1.0
times = 0.5, 1.0
train_size = 40
heldout_size = 40
safety = 1.5
seed = 5
"""


def test_spectrum_run_and_determinism(tmp_path):
    cfg = write_config(tmp_path / "cfg.txt", OU_SPECTRUM)
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    assert cli.main(["spectrum", "--config", cfg, "--out", out1, "--quiet"]) == 0
    assert cli.main(["spectrum", "--config", cfg, "--out", out2, "--quiet"]) == 0
    csv1 = open(os.path.join(out1, "spectrum.csv"), "rb").read()
    csv2 = open(os.path.join(out2, "spectrum.csv"), "rb").read()
    assert csv1 == csv2
    rep1 = open(os.path.join(out1, "spectrum_report.json"), "rb").read()
    rep2 = open(os.path.join(out2, "spectrum_report.json"), "rb").read()
    assert rep1 == rep2

    lines = csv1.decode().strip().split("\n")
    assert lines[0] == "index,lambda,exp_minus_lambda_t1"
    lam = [float(line.split(",")[1]) for line in lines[1 : 7]]
    assert np.max(np.abs(np.array(lam) - np.arange(6))) < 1e-2

    report = read_report(out1, "spectrum_report.json")
    assert report["schema"] == "heatlab.report.v1"
    assert all(chk["pass"] for chk in report["checks"].values())


def test_malformed_config_exits_2_without_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path / "bad.txt", "this is not a key value line\n")
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", cfg, "--out", out]) == 2
    assert not os.path.exists(out)

    cfg2 = write_config(tmp_path / "bad2.txt", "unknown_knob = 3\n")
    assert cli.main(["spectrum", "--config", cfg2, "--out", out]) == 2
    assert not os.path.exists(out)

    cfg3 = write_config(tmp_path / "bad3.txt", "family = mu_a\na = -2\n")
    assert cli.main(["spectrum", "--config", cfg3, "--out", out]) == 2
    assert not os.path.exists(out)


def test_missing_config_file_exits_2(tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", str(tmp_path / "nope.txt"), "--out", out]) == 2
    assert not os.path.exists(out)


def test_verify_pipeline(tmp_path):
    cfg = write_config(tmp_path / "cfg.txt", VERIFY_SMALL)
    out = str(tmp_path / "out")
    assert cli.main(["verify", "--config", cfg, "--out", out, "--quiet"]) == 0
    report = read_report(out, "verify_report.json")
    res = report["results"]
    assert res["ultracontractive"] is False  # a = 1.5 < 2
    assert res["lyapunov_constant"] >= 0.0
    assert 0.0 < res["lambda"] < 1.0
    for name in ("l2_domination", "kernel_domination", "trace_domination", "heldout_envelope"):
        assert report["checks"][name]["pass"], name
        assert report["checks"][name]["violations"] == 0
    rec = cli.ReportRecord(
        experiment=report["experiment"],
        inputs=report["inputs"],
        results=res,
        checks=report["checks"],
    )
    assert rec.consistent()
    trace_lines = open(os.path.join(out, "verify_trace.csv")).read().strip().split("\n")
    assert trace_lines[0] == "t,hs_norm_sq,trace_bound"
    for line in trace_lines[1:]:
        t, hs, bound = map(float, line.split(","))
        assert hs <= bound


def test_verify_universal_weight_trace_exits_5(tmp_path):
    cfg = write_config(
        tmp_path / "cfg.txt", VERIFY_SMALL.replace("weight = mu_a", "weight = universal")
    )
    out = str(tmp_path / "out")
    assert cli.main(["verify", "--config", cfg, "--out", out]) == 5
    assert not os.path.exists(out)


def test_verify_degenerate_family_exits_4(tmp_path):
    # near-constant bumps: every quotient sits below the floor
    cfg = write_config(
        tmp_path / "cfg.txt",
        VERIFY_SMALL + "bump_width_lo = 50.0\nbump_width_hi = 50.0\n",
    )
    out = str(tmp_path / "out")
    assert cli.main(["verify", "--config", cfg, "--out", out]) == 4
    assert not os.path.exists(out)


def test_kernel_time_below_floor_exits_3(tmp_path):
    cfg = write_config(tmp_path / "cfg.txt", OU_SPECTRUM + "times = 1e-4\n")
    out = str(tmp_path / "out")
    assert cli.main(["kernel", "--config", cfg, "--out", out]) == 3
    assert not os.path.exists(out)


def test_kernel_table_ou(tmp_path):
    cfg = write_config(tmp_path / "cfg.txt", "family = ou\nn_points = 800\ntimes = 0.5, 1.0\n")
    out = str(tmp_path / "out")
    assert cli.main(["kernel", "--config", cfg, "--out", out, "--quiet"]) == 0
    report = read_report(out, "kernel_report.json")
    assert report["checks"]["mehler_match"]["pass"]
    assert report["results"]["mehler_max_rel_dev"] < 1e-2
    assert report["checks"]["bound_dominates"]["pass"]
    lines = open(os.path.join(out, "kernel_table.csv")).read().strip().split("\n")
    assert lines[0] == "t,x,y,p_t,bound,slack,mehler,mehler_rel_dev"
    for line in lines[1:]:
        vals = [float(v) for v in line.split(",")]
        # the closed-form bound dominates the exact kernel outright; the
        # discretized kernel only up to its own discretization error
        assert vals[4] >= vals[6] - 1e-12
        assert vals[5] >= -1e-2 * vals[3]


def test_kernel_table_mu_a_pipeline_bound(tmp_path):
    # radius omitted: chosen automatically from the tail-mass target
    cfg = write_config(
        tmp_path / "cfg.txt",
        "family = mu_a\na = 1.5\nn_points = 300\nweight = mu_a\nbeta = 1.0\n"
        "times = 0.5\ntrain_size = 30\nseed = 11\n",
    )
    out = str(tmp_path / "out")
    assert cli.main(["kernel", "--config", cfg, "--out", out, "--quiet"]) == 0
    report = read_report(out, "kernel_report.json")
    assert report["checks"]["bound_dominates"]["pass"]
    assert report["inputs"]["radius"] > 8.0  # suggested window for a = 1.5
    lines = open(os.path.join(out, "kernel_table.csv")).read().strip().split("\n")
    assert lines[0] == "t,x,y,p_t,bound,slack"
    for line in lines[1:]:
        vals = [float(v) for v in line.split(",")]
        assert vals[5] >= -1e-9


def test_converse_from_sample_file(tmp_path):
    ts = np.geomspace(1e-2, 1e2, 400)
    rows = "\n".join(f"{t:.17g},{t ** -0.5:.17g}" for t in ts)
    sample = tmp_path / "ksamples.csv"
    sample.write_text("t,K\n" + rows + "\n")
    cfg = write_config(tmp_path / "cfg.txt", f"k_samples_csv = {sample}\n")
    out = str(tmp_path / "out")
    assert cli.main(["converse", "--config", cfg, "--out", out, "--quiet"]) == 0
    report = read_report(out, "converse_report.json")
    assert abs(report["results"]["fitted_power"] - 2.0) < 0.05
    assert abs(report["results"]["fitted_prefactor"] - 1.0 / (2.0 * math.e)) < 0.05 / (
        2.0 * math.e
    )


def test_converse_from_classical_rate(tmp_path):
    cfg = write_config(tmp_path / "cfg.txt", "rate = classical\nrate_n = 1.0\n")
    out = str(tmp_path / "out")
    assert cli.main(["converse", "--config", cfg, "--out", out, "--quiet"]) == 0
    report = read_report(out, "converse_report.json")
    assert abs(report["results"]["fitted_power"] - 3.0) < 0.05


def test_nash_scan_bumps_and_degenerate(tmp_path):
    base = "family = mu_a\na = 1.5\nradius = 10.0\nn_points = 300\nbeta = 1.0\ntrain_size = 30\nseed = 2\n"
    cfg = write_config(tmp_path / "cfg.txt", base)
    out = str(tmp_path / "out")
    assert cli.main(["nash-scan", "--config", cfg, "--out", out, "--quiet"]) == 0
    report = read_report(out, "nash_scan_report.json")
    assert report["results"]["degenerate_rate"] is False
    assert report["results"]["warning"] is None
    assert report["checks"]["envelope_below_samples"]["pass"]
    assert os.path.exists(os.path.join(out, "nash_quotients.csv"))
    assert os.path.exists(os.path.join(out, "nash_envelope.csv"))

    cfg2 = write_config(tmp_path / "cfg2.txt", base + "family_kind = constants\n")
    out2 = str(tmp_path / "out2")
    assert cli.main(["nash-scan", "--config", cfg2, "--out", out2, "--quiet"]) == 0
    report2 = read_report(out2, "nash_scan_report.json")
    assert report2["results"]["degenerate_rate"] is True
    assert "degenerate" in report2["results"]["warning"]


def test_trace_subcommand(tmp_path):
    cfg = write_config(tmp_path / "cfg.txt", OU_SPECTRUM)
    out = str(tmp_path / "out")
    assert cli.main(["trace", "--config", cfg, "--out", out, "--quiet"]) == 0
    report = read_report(out, "trace_report.json")
    assert report["checks"]["hs_equals_diag_quadrature"]["pass"]
    lines = open(os.path.join(out, "trace_table.csv")).read().strip().split("\n")
    assert lines[0] == "t,trace,hs_norm_sq,diag_quadrature"
    for line in lines[1:]:
        t, tr, hs, diag = map(float, line.split(","))
        assert abs(hs - diag) <= 1e-8


def test_seed_flag_overrides_config(tmp_path):
    base = "family = mu_a\na = 1.5\nradius = 10.0\nn_points = 300\ntrain_size = 10\nseed = 1\n"
    cfg = write_config(tmp_path / "cfg.txt", base)
    outs = [str(tmp_path / f"o{i}") for i in range(3)]
    assert cli.main(["nash-scan", "--config", cfg, "--out", outs[0], "--quiet"]) == 0
    assert cli.main(["nash-scan", "--config", cfg, "--out", outs[1], "--quiet", "--seed", "9"]) == 0
    assert cli.main(["nash-scan", "--config", cfg, "--out", outs[2], "--quiet", "--seed", "9"]) == 0
    q0 = open(os.path.join(outs[0], "nash_quotients.csv"), "rb").read()
    q1 = open(os.path.join(outs[1], "nash_quotients.csv"), "rb").read()
    q2 = open(os.path.join(outs[2], "nash_quotients.csv"), "rb").read()
    assert q1 != q0
    assert q1 == q2
