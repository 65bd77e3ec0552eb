import csv
import io
import json
import math

import pytest

from spinso4.cli import (
    EXIT_ERROR,
    EXIT_FAIL,
    EXIT_OK,
    Check,
    ConfigError,
    RunConfig,
    derive_pass,
    load_report,
    main,
    parse_config_text,
    run,
    to_csv,
    to_json,
    to_text,
    validate,
)

FAST_KS = ["--set", "suites=ks", "--set", "ks.samples=2000", "--set", "ks.N_max=10"]


def strip_timestamp(text):
    data = json.loads(text)
    data.pop("timestamp")
    return data


def test_config_parsing_and_comments():
    cfg = parse_config_text(
        "# demo\ncoulomb.k = 0.5\noscillator.omegas = [1.0, sqrt(2)]\nsuites = ks, radial  # two\n"
        "grid.ladder = 32, 48\n"
    )
    assert cfg.coulomb_k == 0.5
    assert cfg.oscillator_omegas == [1.0, math.sqrt(2.0)]
    assert cfg.suites == ["ks", "radial"]
    assert cfg.grid_ladder == [32, 48]
    assert validate(cfg) is cfg


@pytest.mark.parametrize("text,fragment", [
    ("coulomb.q = 1", "unknown key"),
    ("coulomb.k = abc", "bad value"),
    ("spectrum.n_max = 2.5", "bad value"),
    ("\n\nsuites", ":3: expected key = value"),
])
def test_config_errors_name_the_line(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config_text(text, "cfg.txt")


@pytest.mark.parametrize("setting", [
    "suites=", "suites=quantum", "grid.ladder=48,32", "output.formats=xml", "coulomb.k=-1",
    "eigen.points=17",
])
def test_validation_errors(setting):
    key, raw = setting.split("=", 1)
    cfg = parse_config_text(f"{key} = {raw}")
    with pytest.raises(ConfigError):
        validate(cfg)


def test_derive_pass_comparators():
    assert derive_pass({"value": 1e-9, "tol": 1e-8, "cmp": "<="})
    assert not derive_pass({"value": 1.0, "tol": 1.0, "cmp": "<"})
    assert derive_pass({"value": 14.0, "tol": [12.0, 20.0], "cmp": "in"})
    assert derive_pass({"value": 8, "tol": 8, "cmp": "=="})
    assert derive_pass({"value": [1e-2, 1e-4, 1e-5], "tol": {"reduction": 4.0, "final": 1e-3},
                        "cmp": "ladder"})
    assert not derive_pass({"value": None, "tol": 1.0, "cmp": "<="})
    assert not derive_pass({"value": 0.0, "tol": 1.0, "cmp": "<=", "error": "boom"})
    with pytest.raises(ValueError):
        derive_pass({"value": 0.0, "tol": 1.0, "cmp": "~"})
    assert Check("s", "c", "a", 0.5, 1.0).passed


def test_exit_ok_and_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", *FAST_KS, "--out", str(out), "--format", "json,csv", "--format", "text"])
    assert code == EXIT_OK
    report = load_report(out / "report.json")
    assert report["totals"]["failed"] == 0
    rows = list(csv.reader(io.StringIO((out / "report.csv").read_text())))
    assert len(rows) == report["totals"]["checks"] + 1
    assert "checks passed" in (out / "report.txt").read_text()
    assert "PASS" in capsys.readouterr().out


def test_failed_check_gives_exit_one(tmp_path):
    # degeneracy scans are limited to n <= 6, so the suite records a failed check
    code = main(["run", "--set", "suites=spectrum", "--set", "spectrum.n_max=7",
                 "--set", "spectrum.k_values=0.8", "--out", str(tmp_path)])
    assert code == EXIT_FAIL
    report = load_report(tmp_path / "report.json")
    failed = [c for c in report["checks"] if not c["pass"]]
    assert failed and all("error" in c for c in failed)


@pytest.mark.parametrize("argv", [
    ["run", "--set", "suites=nothing"],
    ["run", "--set", "nokey"],
    ["run", "--config", "/nonexistent/config.txt"],
    ["run", "--set", "suites=ks", "--format", "xml"],
])
def test_usage_errors_give_exit_two(argv, tmp_path):
    assert main([*argv, "--out", str(tmp_path)]) == EXIT_ERROR


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


def test_config_file_and_emit(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("suites = ks\nks.samples = 500\nks.N_max = 4\nseed = 3\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path), "--format", "json"]) == EXIT_OK
    report = load_report(tmp_path / "report.json")
    assert report["config"]["seed"] == 3 and report["config"]["ks.samples"] == 500
    assert main(["emit", str(tmp_path / "report.json"), "--out", str(tmp_path / "e"),
                 "--format", "csv"]) == EXIT_OK
    assert (tmp_path / "e" / "report.csv").read_text() == to_csv(report)


def test_json_roundtrip_and_determinism():
    cfg = RunConfig(suites=["ks"], ks_samples=2000, ks_N_max=10)
    a = to_json(run(cfg))
    b = to_json(run(RunConfig(suites=["ks"], ks_samples=2000, ks_N_max=10)))
    assert strip_timestamp(a) == strip_timestamp(b)
    assert to_json(json.loads(a)) == a
    report = json.loads(a)
    assert to_text(report).count("PASS") == report["totals"]["passed"]
