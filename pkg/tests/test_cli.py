import json

import pytest

from fae.cli import EXIT_DOMAIN, EXIT_IO, EXIT_OK, main


def test_estimate(capsys):
    assert main(["estimate", "--amplitude", "0.3", "--ell", "6", "--seed", "4", "--trace"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert abs(out["amplitude_hat"] - 0.3) < 0.05
    assert len(out["trace"]) == 6


def test_estimate_is_deterministic(capsys):
    main(["estimate", "--amplitude", "0.8", "--seed", "11"])
    first = capsys.readouterr().out
    main(["estimate", "--amplitude", "0.8", "--seed", "11"])
    assert capsys.readouterr().out == first


def test_estimate_rounded_bound_flag(capsys):
    assert main(["estimate", "--amplitude", "0.5", "--paper-initial-bound"]) == EXIT_OK


@pytest.mark.parametrize("argv", [
    ["estimate", "--amplitude", "1.5"],
    ["estimate", "--amplitude", "0.5", "--delta-c", "0"],
    ["estimate"],
    ["bounds", "--epsilon", "-1", "--delta", "0.05"],
    ["bench", "--trials", "0", "--out", "x.csv"],
])
def test_domain_errors_exit_one(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == EXIT_DOMAIN


def test_bench_writes_outputs(tmp_path, capsys):
    out, js, svg = tmp_path / "b.csv", tmp_path / "b.json", tmp_path / "b.svg"
    argv = ["bench", "--amplitudes", "0.3", "--ell-min", "3", "--ell-max", "5", "--trials", "10",
            "--seed", "1", "--out", str(out), "--json", str(js), "--svg", str(svg)]
    assert main(argv) == EXIT_OK
    assert out.read_text().count("\n") == 4
    assert json.loads(js.read_text())["config"]["master_seed"] == 1
    assert svg.read_text().lstrip().startswith("<?xml")


def test_bench_unwritable_exit_two(tmp_path, capsys):
    argv = ["bench", "--amplitudes", "0.3", "--ell-min", "3", "--ell-max", "3", "--trials", "2",
            "--out", str(tmp_path / "nope" / "b.csv")]
    assert main(argv) == EXIT_IO


def test_bounds_table_and_json(capsys):
    assert main(["bounds", "--epsilon", "1e-3", "--delta", "0.05"]) == EXIT_OK
    table = capsys.readouterr().out
    assert "2.78097e+07" in table and "223.8" in table
    assert main(["bounds", "--epsilon", "1e-3", "--delta", "0.05", "--json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["ell"] == 12


def test_verify_simulator(capsys):
    assert main(["verify", "--suite", "simulator"]) == EXIT_OK
    assert "[PASS]" in capsys.readouterr().out


def test_verify_failure_exit_three(monkeypatch, capsys):
    from fae import verify
    from fae.cli import EXIT_VERIFY

    def failing():
        res = verify.SuiteResult("simulator")
        res.check(False, "forced")
        return res

    monkeypatch.setitem(verify.SUITES, "simulator", failing)
    assert main(["verify", "--suite", "simulator"]) == EXIT_VERIFY
