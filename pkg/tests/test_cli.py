import json
import subprocess
import sys

import pytest

from randomflight.cli import RunConfig, main, parse_args
from randomflight.errors import UsageError
from randomflight.verification import parse_report


def run_cli(capsysbinary, *argv):
    code = main(list(argv))
    out = capsysbinary.readouterr()
    return code, out.out, out.err.decode()


def test_parse_theorem_args():
    cfg = parse_args("theorem --m 1 --n 2 --dist constant:1 --trials 1000000 --seed 42".split())
    assert cfg == RunConfig(
        command="theorem", dists=("constant:1",), m=(1,), n=(2,), trials=1_000_000, seed=42,
        shards=cfg.shards,
    )
    assert 1 <= cfg.shards <= 64


@pytest.mark.parametrize(
    "argv",
    [
        "rayleigh --n 1 --seed 1",
        "estimate --m 0 --n 0 --seed 1",
        "theorem --m 1 --n 1 --seed 1",
        "theorem --m 1 --seed 1",
        "rayleigh --n 2",
        "bogus --seed 1",
        "theorem --seed 1 --bogus 3",
        "oracle --m 1 --n 1",
        "oracle --n 1",
        "estimate --n 2 --m 1 --radius 1 --seed 1",
        "estimate --n 2 --seed 1 --dist gamma:2",
        "lemma --seed 1 --dist constant:1 --dist constant:1",
        "additivity --n 2 --seed 1",
        "estimate --n 2 --seed 1 --level 1.5",
        "",
    ],
)
def test_usage_errors_exit_two(capsysbinary, argv):
    code, out, err = run_cli(capsysbinary, *argv.split())
    assert code == 2
    assert out == b""
    assert "error" in err


def test_parse_args_raises_usage_error():
    with pytest.raises(UsageError):
        parse_args(["rayleigh", "--n", "1", "--seed", "3"])


def test_oracle_prints_value(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "oracle", "--m", "3", "--n", "5")
    assert code == 0 and out == b"0.375\n"
    code, out, _ = run_cli(capsysbinary, "oracle", "--n", "3")
    assert out == b"0.25\n"


def test_oracle_quadrature(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "oracle", "--m", "1", "--n", "3", "--method", "quadrature")
    assert code == 0 and float(out) == pytest.approx(0.25, abs=1e-6)
    code, out, _ = run_cli(capsysbinary, "oracle", "--n", "3", "--method", "quadrature", "--radius", "1")
    assert float(out) == pytest.approx(0.25, abs=1e-6)


def test_theorem_default_sweep_is_deterministic(capsysbinary):
    args = ["theorem", "--seed", "42", "--trials", "2000"]
    first = run_cli(capsysbinary, *args)
    second = run_cli(capsysbinary, *args)
    assert first[0] in (0, 1) and first[:2] == second[:2]
    rows = parse_report(first[1])
    assert len(rows) == 27 * 5


def test_lemma_constant_triple(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "lemma", "--dist", "constant:1", "--seed", "5", "--trials", "20000")
    rows = parse_report(out)
    sums = [r for r in rows if r["check"] == "sum"]
    assert len(sums) == 1 and sums[0]["expected"] == 1.0
    assert code == 0


def test_lemma_walk_source(capsysbinary):
    code, out, _ = run_cli(
        capsysbinary, "lemma", "--seed", "5", "--trials", "20000",
        "--dist", "walk:2:constant:1", "--dist", "exp:1", "--dist", "uniform:0.5,1.5",
    )
    rows = parse_report(out)
    assert [r["check"] for r in rows] == ["sum"]
    assert rows[0]["dist"] == "walk:2:constant:1.0|draw:exp:1.0|draw:uniform:0.5,1.5"


def test_shards_do_not_change_output(capsysbinary):
    base = ["additivity", "--n", "4", "--seed", "9", "--trials", "30001"]
    outputs = {run_cli(capsysbinary, *base, "--shards", k)[1] for k in ("1", "3", "64")}
    assert len(outputs) == 1


def test_stdout_and_file_identical(capsysbinary, tmp_path):
    args = ["rayleigh", "--n", "2,3", "--seed", "1", "--trials", "5000"]
    _, out, _ = run_cli(capsysbinary, *args, "--out", "-")
    target = tmp_path / "r.csv"
    code, file_out, _ = run_cli(capsysbinary, *args, "--out", str(target))
    assert file_out == b""
    assert target.read_bytes() == out
    assert code == 0


def test_jsonl_format(capsysbinary):
    _, out, _ = run_cli(capsysbinary, "rayleigh", "--n", "2", "--seed", "1", "--trials", "5000",
                        "--format", "json-lines")
    assert json.loads(out)["n"] == 2


def test_failed_check_exits_one(capsysbinary):
    # a vanishing interval can never contain 1/3 with 1000 trials
    code, out, err = run_cli(capsysbinary, "theorem", "--m", "1", "--n", "2", "--seed", "1",
                             "--trials", "1000", "--level", "1e-6")
    assert code == 1
    assert parse_report(out)[0]["passed"] == "false"
    assert "0 passed, 5 failed" in err


def test_estimate_outside_hypothesis_is_excluded(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "estimate", "--m", "1", "--n", "1", "--seed", "1", "--trials", "1000")
    row = parse_report(out)[0]
    assert code == 0 and row["passed"] == "excluded" and row["expected"] is None
    assert row["p_hat"] == 0.0 and row["ties"] == 1000


def test_estimate_return(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "estimate", "--n", "3", "--seed", "1", "--trials", "100000")
    row = parse_report(out)[0]
    assert code == 0 and row["expected"] == 0.25 and row["passed"] == "true"


def test_config_file_and_override(capsysbinary, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"m": 1, "n": 2, "dist": "exp:1", "trials": 4000, "seed": 3, "level": 0.99}))
    code, out, _ = run_cli(capsysbinary, "theorem", "--config", str(cfg), "--trials", "5000")
    row = parse_report(out)[0]
    assert row["trials"] == 5000 and row["dist"] == "exp:1.0" and row["level"] == 0.99
    assert code in (0, 1)


def test_config_rejects_unknown_fields(capsysbinary, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"seed": 3, "colour": "red"}))
    code, _, err = run_cli(capsysbinary, "theorem", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_missing_config_file(capsysbinary, tmp_path):
    code, _, _ = run_cli(capsysbinary, "theorem", "--config", str(tmp_path / "nope.json"))
    assert code == 2


def test_unwritable_output_exits_two(capsysbinary, tmp_path):
    code, _, err = run_cli(capsysbinary, "rayleigh", "--n", "2", "--seed", "1", "--trials", "100",
                           "--out", str(tmp_path / "missing" / "r.csv"))
    assert code == 2 and "error" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "randomflight", "oracle", "--m", "3", "--n", "5"],
        capture_output=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == b"0.375\n"
    proc = subprocess.run([sys.executable, "-m", "randomflight", "rayleigh", "--n", "1", "--seed", "1"],
                          capture_output=True, check=False)
    assert proc.returncode == 2


def test_help_lists_formats():
    proc = subprocess.run([sys.executable, "-m", "randomflight", "theorem", "--help"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "exit codes" in proc.stdout and "twopoint" in proc.stdout
