import csv
import subprocess
import sys
from dataclasses import replace
from fractions import Fraction

import pytest

from canform import algorithms as algs
from canform.canonical import CanonicalParams, canonical_realization
from canform.cli import build_parser, cmd_table, main
from canform.realization import StructuredRealization, save_realization, similarity_transform

from conftest import NIDS_ZETA

BASELINE = """\
[params]
algorithm = nids
alpha = 1/10

[graph]
topology = ring
n = 5
mu = 1/4

[objective]
type = quadratic
b = 1 2 3 4 5

[simulation]
K = 2000
x0 = 0
w0 = 0

[tolerances]
threshold = 1e-8
"""


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def double_comm_file(tmp_path):
    r = canonical_realization(CanonicalParams(Fraction(1, 10), *NIDS_ZETA))
    path = tmp_path / "double_comm.real"
    save_realization(StructuredRealization(r.A0, r.A1, r.B0, [1, 0], r.C0, r.C1), path)
    return path


def test_canonicalize_nids(capsys):
    code, out, _ = run(["canonicalize", "--alg", "nids", "--alpha", "1/10"], capsys)
    assert code == 0
    assert "zeta = (1/2, 1, 0, 1/2)" in out
    assert "alpha = 1/10" in out


def test_canonicalize_double_comm(double_comm_file, capsys):
    code, out, _ = run(["canonicalize", "--file", str(double_comm_file)], capsys)
    assert code == 2
    assert "DoubleCommunication" in out


def test_canonicalize_zero_alpha(capsys):
    code, _, err = run(["canonicalize", "--alg", "nids", "--alpha", "0"], capsys)
    assert code == 1 and "ZeroStepsize" in err


def test_canonicalize_decimal_alpha_rejected(capsys):
    code, _, _ = run(["canonicalize", "--alg", "nids", "--alpha", "0.1"], capsys)
    assert code == 1


def test_canonicalize_missing_file(tmp_path, capsys):
    code, _, _ = run(["canonicalize", "--file", str(tmp_path / "nope.real")], capsys)
    assert code == 1


def test_canonicalize_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.real"
    bad.write_text("[realization]\ns = 2\nA0 = 1 2\n")
    code, _, _ = run(["canonicalize", "--file", str(bad)], capsys)
    assert code == 1


@pytest.mark.parametrize("a,b,verdict", [("nids", "exact_diffusion", "EQUIVALENT"), ("nids", "extra", "DISTINCT")])
def test_compare(a, b, verdict, capsys):
    code, out, _ = run(["compare", a, b], capsys)
    assert code == 0
    assert out.strip().splitlines()[-1] == verdict


def test_compare_similarity_copy(tmp_path, capsys):
    r = algs.get_algorithm("diging", Fraction(1, 3))
    save_realization(r, tmp_path / "a.real")
    save_realization(similarity_transform(r, [[1, 2], [1, 3]]), tmp_path / "b.real")
    code, out, _ = run(["compare", str(tmp_path / "a.real"), str(tmp_path / "b.real")], capsys)
    assert code == 0 and out.strip().endswith("EQUIVALENT")


def test_compare_non_canonicalizable(double_comm_file, capsys):
    code, out, _ = run(["compare", str(double_comm_file), "nids"], capsys)
    assert code == 0
    assert "not canonicalizable" in out and out.strip().endswith("DISTINCT")


def test_compare_unknown_token(capsys):
    code, _, _ = run(["compare", "nids", "not_an_algorithm"], capsys)
    assert code == 1


def test_table(capsys):
    code, out, _ = run(["table", "--alpha", "1/10", "--beta", "1"], capsys)
    assert code == 0
    assert out.count("yes") == 7


def test_table_csv(capsys):
    code, out, _ = run(["table", "--beta", "1", "--format", "csv"], capsys)
    rows = list(csv.reader(out.strip().splitlines()))
    assert code == 0 and rows[0][0] == "algorithm" and len(rows) == 8
    assert rows[-1] == ["jakovetic_bW", "1/10", "2", "9/10", "0", "true"]


def test_table_without_beta_warns(capsys):
    code, out, err = run(["table"], capsys)
    assert code == 0
    assert "warning" in err and "Jakovetic" not in out


def test_table_corrupted_registry(capsys):
    reg = dict(algs.REGISTRY)
    reg["extra"] = replace(reg["extra"], builder=reg["diging"].builder)
    args = build_parser().parse_args(["table", "--beta", "1"])
    code = cmd_table(args, registry=reg)
    out = capsys.readouterr().out
    assert code == 3
    assert "mismatch extra" in out


def test_analyze_scaled_pass(capsys):
    code, out, _ = run(["analyze", "--alg", "nids", "--graph", "ring", "--n", "5", "--mu", "1/4"], capsys)
    assert code == 0 and "verdict: pass" in out


def test_analyze_unscaled_fail(capsys):
    code, out, _ = run(["analyze", "--alg", "nids", "--graph", "ring", "--n", "5"], capsys)
    assert code == 4
    assert "offending lambda = 3.618" in out


def test_analyze_params_csv(capsys):
    code, out, _ = run(["analyze", "--params", "1,0,0,0,0", "--graph", "complete", "--n", "4", "--format", "csv"], capsys)
    assert code == 4
    assert out.splitlines()[0] == "lambda,poles,zeros,classification"


def test_analyze_disconnected(capsys):
    code, _, err = run(["analyze", "--alg", "nids", "--graph", "erdos_renyi", "--n", "8",
                        "--prob", "0.1", "--seed", "7"], capsys)
    assert code == 1 and "DisconnectedGraph" in err


def test_analyze_seed_env(monkeypatch, capsys):
    argv = ["analyze", "--alg", "nids", "--graph", "erdos_renyi", "--n", "8", "--prob", "0.1", "--mu", "1/8"]
    monkeypatch.setenv("CANFORM_SEED", "7")
    assert run(argv, capsys)[0] == 1
    monkeypatch.setenv("CANFORM_SEED", "not-a-number")
    assert run(argv, capsys)[0] == 1


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_simulate_baseline(tmp_path, capsys):
    out_csv = tmp_path / "traj.csv"
    code, out, _ = run(["simulate", _write(tmp_path, BASELINE), "--output", str(out_csv)], capsys)
    assert code == 0
    assert "final error" in out and "consensus residual" in out
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["k", "i", "coord", "x", "w", "v1", "v2", "y", "u"]
    assert len(rows) == 1 + 2000 * 5


def test_simulate_large_alpha_fails(tmp_path, capsys):
    code, out, _ = run(["simulate", _write(tmp_path, BASELINE.replace("alpha = 1/10", "alpha = 100"))], capsys)
    assert code == 5


def test_simulate_logcosh_metrics_only(tmp_path, capsys):
    code, out, _ = run(["simulate", _write(tmp_path, BASELINE.replace("type = quadratic", "type = logcosh"))], capsys)
    assert code == 0 and "metrics only" in out


def test_simulate_realization_file(tmp_path, capsys):
    save_realization(algs.get_algorithm("nids", Fraction(1, 10)), tmp_path / "nids.real")
    cfg = BASELINE.replace("algorithm = nids", "realization = nids.real")
    code, out, _ = run(["simulate", _write(tmp_path, cfg)], capsys)
    assert code == 0 and "zeta = (1/2, 1, 0, 1/2)" in out


def test_simulate_config_errors(tmp_path, capsys):
    both = BASELINE.replace("algorithm = nids", "algorithm = nids\nrealization = x.real")
    assert run(["simulate", _write(tmp_path, both)], capsys)[0] == 1
    assert run(["simulate", str(tmp_path / "missing.ini")], capsys)[0] == 1
    missing_real = BASELINE.replace("algorithm = nids", "realization = missing.real")
    assert run(["simulate", _write(tmp_path, missing_real, "b.ini")], capsys)[0] == 1


def test_simulate_t3_violation_flagged(tmp_path, capsys):
    cfg = BASELINE.replace("w0 = 0", "w0 = 1 0 0 0 0")
    code, out, _ = run(["simulate", _write(tmp_path, cfg)], capsys)
    assert code == 5
    assert "T3" in out


def test_simulate_random_init_seeded(tmp_path, monkeypatch, capsys):
    cfg = BASELINE.replace("x0 = 0", "x0 = random\nseed = 3").replace("K = 2000", "K = 5")
    path = _write(tmp_path, cfg)
    outs = []
    for _ in range(2):
        run(["simulate", path, "--output", str(tmp_path / "t.csv")], capsys)
        outs.append((tmp_path / "t.csv").read_text())
    assert outs[0] == outs[1]
    monkeypatch.setenv("CANFORM_SEED", "4")
    run(["simulate", path, "--output", str(tmp_path / "t.csv")], capsys)
    assert (tmp_path / "t.csv").read_text() != outs[0]


def test_fixed_point_nids(capsys):
    code, out, _ = run(["fixed-point", "--alg", "nids", "--b", "1 2 3 4 5"], capsys)
    assert code == 0
    resid = float(out.strip().splitlines()[-1].split("=")[1])
    assert resid <= 1e-10


def test_fixed_point_csv(capsys):
    code, out, _ = run(["fixed-point", "--alg", "diging", "--b", "1 2 3 4 5", "--format", "csv"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "i,coord,x,w,v1,v2,y,u"


@pytest.mark.parametrize("params,graph,n", [("1,0,1,0,0", "ring", "5"), ("1,1,0,-1/4,0", "complete", "4")])
def test_fixed_point_t2(params, graph, n, capsys):
    code, out, _ = run(["fixed-point", "--params", params, "--graph", graph, "--n", n,
                        "--b", " ".join(str(i) for i in range(int(n)))], capsys)
    assert code == 6 and "T2Violated" in out


def test_fixed_point_t2_ring_passes(capsys):
    code, _, _ = run(["fixed-point", "--params", "1,1,0,-1/4,0", "--graph", "ring", "--n", "5", "--b", "1 2 3 4 5"], capsys)
    assert code == 0


def test_fixed_point_needs_b(capsys):
    assert run(["fixed-point", "--alg", "nids"], capsys)[0] == 1


@pytest.mark.parametrize("argv", [["table", "--bogus"], ["analyze", "--alg", "nids", "--unknown", "1"],
                                  ["frobnicate"], []])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as ei:
        main(argv)
    assert ei.value.code == 1


@pytest.mark.parametrize("cmd", ["canonicalize", "compare", "table", "analyze", "simulate", "fixed-point"])
def test_help_documents_flags(cmd, capsys):
    with pytest.raises(SystemExit) as ei:
        main([cmd, "--help"])
    assert ei.value.code == 0
    text = capsys.readouterr().out
    sub = build_parser()._subparsers._group_actions[0].choices[cmd]
    for action in sub._actions:
        for flag in action.option_strings:
            assert flag in text
        if action.option_strings and action.help is None:
            pytest.fail(f"{cmd} {action.option_strings} undocumented")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "canform", "canonicalize", "--alg", "extra"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "zeta = (1/2, 1, 0, 0)" in res.stdout
