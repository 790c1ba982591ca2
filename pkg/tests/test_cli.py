import json
import os

import pytest

from cli import CommandRunner, parse_window
from config import Settings, load_settings
from errors import InputError
from main import main


@pytest.fixture
def s2(samples_dir):
    return os.path.join(samples_dir, "s2.json")


@pytest.fixture
def report_path(tmp_path):
    return str(tmp_path / "report.json")


def read(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_parse_window():
    assert parse_window("1-4") == [1, 2, 3, 4]
    assert parse_window("5, 2,3") == [2, 3, 5]
    with pytest.raises(InputError):
        parse_window("a-b")
    with pytest.raises(InputError):
        parse_window("")


def test_check_sample(s2, samples_dir, report_path):
    structure = os.path.join(samples_dir, "s2_product.cinf")
    assert main(["--json", report_path, "check", s2, "--structure", structure]) == 0
    report = read(report_path)
    assert report["schema"] == "cinf-lift-report/1"
    assert report["status"] == "pass"
    assert report["results"]["structure"]["cn_residual"] == "0"
    assert report["results"]["structure"]["invariance"]["holds"] is True


def test_check_reports_broken_algebra(s2, tmp_path, report_path):
    with open(s2, encoding="utf-8") as f:
        data = json.load(f)
    data["product"] = [p for p in data["product"] if p["left"] != "x"]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data))
    assert main(["--json", report_path, "check", str(path)]) == 1
    assert read(report_path)["status"] == "finding"


def test_cohomology_report_is_deterministic(s2, tmp_path):
    first, second = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    for path in (first, second):
        assert main(["--json", path, "cohomology", s2, "--flavor", "cyclic", "--window", "2-4"]) == 0
    with open(first, encoding="utf-8") as a, open(second, encoding="utf-8") as b:
        assert a.read() == b.read()
    blocks = read(first)["results"]["blocks"]
    assert blocks
    assert all(b["dimension"] == b["dense_dimension"] for b in blocks)


def test_obstruction_and_extend(s2, samples_dir):
    structure = os.path.join(samples_dir, "s2_product.cinf")
    assert main(["obstruction", s2, "--structure", structure, "--level", "4"]) == 0
    assert main(["extend", s2, "--level", "4", "--flavor", "symplectic"]) == 0


@pytest.mark.slow
def test_obstructed_extend_exits_with_finding(samples_dir, report_path):
    algebra = os.path.join(samples_dir, "square_zero.json")
    structure = os.path.join(samples_dir, "square_zero_m3.cinf")
    assert main(["--json", report_path, "extend", algebra, "--structure", structure]) == 1
    report = read(report_path)
    assert report["status"] == "finding"
    assert report["results"]["success"] is False
    assert report["results"]["obstruction"]["bidegree"] == [5, 3]


def test_synthetic_lift(s2, report_path):
    code = main(["--json", report_path, "lift", s2, "--order", "4", "--synthetic", "--seed", "3",
                 "--two-step-crosscheck"])
    assert code == 0
    results = read(report_path)["results"]
    assert set(results["lift"]["residuals"].values()) == {"0"}
    assert set(results["two_step"]["residuals"].values()) == {"0"}
    assert [s["order"] for s in results["lift"]["stages"]] == [3, 4]


def test_lift_morphism(s2):
    assert main(["lift-morphism", s2, "--order", "4", "--seed", "5"]) == 0


def test_verify_i(s2, report_path):
    assert main(["--json", report_path, "verify-I", s2, "--window", "1-3"]) == 0
    maps = read(report_path)["results"]["maps"]
    assert all(m["holds"] and m["commutes"] for m in maps)


def test_verify_cartan(s2, report_path):
    assert main(["--json", report_path, "verify-cartan", s2, "--samples", "6", "--max-order", "3"]) == 0
    results = read(report_path)["results"]
    assert results["failures"] == []
    assert all(n == 6 for n in results["passed"].values())


def test_usage_errors_exit_with_two(s2, tmp_path):
    assert main(["cohomology"]) == 2
    assert main(["cohomology", s2, "--flavor", "hochschild"]) == 2
    assert main(["check", str(tmp_path / "absent.json")]) == 2
    assert main(["--help"]) == 0


def test_parse_errors_are_reported(tmp_path, report_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    assert main(["--json", report_path, "check", str(path)]) == 2
    report = read(report_path)
    assert report["status"] == "input-error"
    assert report["results"]["error"]["code"] == "syntax"


def test_bad_window_is_input_error(s2):
    assert main(["cohomology", s2, "--window", "x"]) == 2


def test_runner_rejects_unknown_command():
    with pytest.raises(InputError):
        CommandRunner(Settings()).run("deform")


def test_runner_uses_default_order(s2):
    result = CommandRunner(Settings(default_order=4)).run("lift", algebra_path=s2)
    assert result.success
    assert result.results["lift"]["truncation"] == 4


def test_settings_from_env_file(tmp_path, monkeypatch):
    for name in ("CINF_LIFT_DEFAULT_ORDER", "CINF_LIFT_SEED", "CINF_LIFT_PIVOT"):
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)
    env = tmp_path / "settings.env"
    env.write_text("CINF_LIFT_DEFAULT_ORDER=5\nCINF_LIFT_SEED=17\n")
    settings = load_settings(str(env))
    assert (settings.default_order, settings.seed, settings.pivot) == (5, 17, "sparse")
    assert settings.override(seed=None, default_order=7).default_order == 7


def test_bad_settings(monkeypatch):
    monkeypatch.setenv("CINF_LIFT_DEFAULT_ORDER", "2")
    with pytest.raises(InputError):
        load_settings()
    monkeypatch.setenv("CINF_LIFT_DEFAULT_ORDER", "six")
    with pytest.raises(InputError):
        load_settings()
