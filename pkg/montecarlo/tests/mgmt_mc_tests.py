import csv
import json
import logging
from unittest.mock import patch

import pytest

from django.core.management import CommandError, call_command

from montecarlo.harness import run_mc
from nrtlstudy.tests.utils import log_extra

UNIT_SPEC = {"label": "unit", "variables": ["y"], "sigma": [0.1]}


@pytest.fixture(autouse=True)
def test_settings(settings, tmp_path):
    """Override settings for tests"""
    settings.NRTL_STUDY_OUTPUT_DIR = str(tmp_path / "out")
    settings.NRTL_STUDY_THREADS = 1
    settings.NRTL_STUDY_VERBOSITY = 1
    return settings


def write_config(tmp_path, measurement=None, **extra):
    surrogate = {
        "label": "line",
        "theta_true": [1.0, 2.0],
        "grids": {
            "measurement": measurement or {"u": {"start": 0.0, "stop": 1.0, "num": 11}},
            "prediction": {"u": [0.0, 0.5, 1.0]},
            "initial": {"u": [0.0, 0.5, 1.0]},
        },
    }
    data = {
        "surrogates": [surrogate],
        "measurement_scenarios": [UNIT_SPEC],
        "n_mc": 3,
        "seed": 1,
        **extra,
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf8")
    return str(path)


def read_rows(path):
    with path.open(newline="", encoding="utf8") as csv_file:
        return list(csv.DictReader(csv_file))


def test_noise_free_mc(tmp_path, caplog):
    caplog.set_level(logging.INFO)
    call_command("mc", f"--config={write_config(tmp_path, noise_free=True)}")
    out = tmp_path / "out"
    (row,) = read_rows(out / "mc_report.csv")
    assert row["scenario"] == "line/unit/All/None"
    assert row["n_mc_count"] == "3"
    assert row["n_failed_count"] == "0"
    assert row["Q95_y_dimless"] == "1.0"
    assert row["Q95_theta_dimless"] == "1.0"
    assert row["s_bar_y_dimless"] == "0.0"
    assert row["D_U_dimless"] == "nan"
    assert row["failure_alarm_flag"] == "0"
    (by_theta,) = read_rows(out / "summary_by_theta.csv")
    assert by_theta["theta"] == "All"
    (by_reg,) = read_rows(out / "summary_by_reg.csv")
    assert by_reg["reg"] == "None"
    summary = json.loads((out / "mc_summary.json").read_text())
    assert summary["seed"] == 1
    assert summary["n_scenarios"] == 1
    assert summary["scenarios"][0]["D_U_dimless"] is None
    assert list(summary["timers"]) == ["line/unit/All/None"]

    assert caplog.record_tuples == [("eventsinfo.mc", logging.INFO, "mc done")]
    extra = log_extra(caplog.records[0])
    assert extra.pop("timers").keys() == {"command_s"}
    assert extra == {"n_scenarios": 1, "n_failed": 0, "out": str(out)}


def test_scenario_matrix_rows(tmp_path):
    config = write_config(
        tmp_path,
        parameter_scenarios=["All", "theta1*"],
        regularization_scenarios=["None", "GO"],
    )
    call_command("mc", f"--config={config}", "--seed=5")
    out = tmp_path / "out"
    rows = read_rows(out / "mc_report.csv")
    assert [row["scenario"] for row in rows] == [
        "line/unit/All/None",
        "line/unit/All/GO",
        "line/unit/theta1*/None",
        "line/unit/theta1*/GO",
    ]
    assert [row["reg"] for row in read_rows(out / "summary_by_reg.csv")] == ["None", "GO"]
    assert json.loads((out / "mc_summary.json").read_text())["seed"] == 5


def test_scenario_filter(tmp_path):
    config = write_config(tmp_path, regularization_scenarios=["None", "GO"])
    call_command("mc", f"--config={config}", "--scenario=*/GO")
    rows = read_rows(tmp_path / "out" / "mc_report.csv")
    assert [row["scenario"] for row in rows] == ["line/unit/All/GO"]


def test_scenario_filter_without_match(tmp_path):
    with pytest.raises(CommandError) as excinfo:
        call_command("mc", f"--config={write_config(tmp_path)}", "--scenario=zzz")
    assert str(excinfo.value) == "Invalid config at $: no scenario matches 'zzz'"
    assert excinfo.value.returncode == 2
    assert not (tmp_path / "out").exists()


def test_failure_alarm(tmp_path, caplog):
    caplog.set_level(logging.INFO)
    config = write_config(tmp_path, measurement={"u": [0.5, 0.5, 0.5, 0.5]}, noise_free=True)
    call_command("mc", f"--config={config}")
    assert caplog.record_tuples == [
        ("eventsinfo.montecarlo", logging.INFO, "replicate failed"),
        ("eventsinfo.montecarlo", logging.INFO, "replicate failed"),
        ("eventsinfo.montecarlo", logging.INFO, "replicate failed"),
        ("events", logging.ERROR, "mc failure alarm"),
        ("eventsinfo.mc", logging.INFO, "mc done"),
    ]
    assert log_extra(caplog.records[3]) == {
        "scenario": "line/unit/All/None",
        "iteration": 0,
        "n_success": 0,
        "n_failed": 3,
        "Q95_y": pytest.approx(float("nan"), nan_ok=True),
    }
    (row,) = read_rows(tmp_path / "out" / "mc_report.csv")
    assert row["failure_alarm_flag"] == "1"
    assert row["Q95_y_dimless"] == "nan"


def test_scenario_details_at_verbosity_2(tmp_path, caplog):
    caplog.set_level(logging.INFO)
    call_command("mc", f"--config={write_config(tmp_path)}", "--verbosity=2")
    assert caplog.record_tuples == [
        ("eventsinfo.mc", logging.INFO, "mc scenario"),
        ("eventsinfo.mc", logging.INFO, "mc done"),
    ]
    extra = log_extra(caplog.records[0])
    assert extra["scenario"] == "line/unit/All/None"
    assert extra["n_success"] == 3


def test_quiet(tmp_path, caplog):
    caplog.set_level(logging.INFO)
    config = write_config(tmp_path, measurement={"u": [0.5, 0.5, 0.5, 0.5]}, noise_free=True)
    call_command("mc", f"--config={config}", "--verbosity=0")
    assert [name for name, _, _ in caplog.record_tuples] == ["eventsinfo.montecarlo"] * 3
    assert (tmp_path / "out" / "mc_report.csv").exists()


def test_invalid_n_mc(tmp_path):
    with pytest.raises(CommandError) as excinfo:
        call_command("mc", f"--config={write_config(tmp_path, n_mc=0)}")
    assert excinfo.value.returncode == 2
    assert str(excinfo.value).startswith("Invalid config at $.n_mc: ")


def test_failure_alarm_from_settings(tmp_path, settings):
    settings.NRTL_STUDY_FAILURE_ALARM = 0.25
    with patch("montecarlo.management.commands.mc.run_mc", wraps=run_mc) as mock_run:
        call_command("mc", f"--config={write_config(tmp_path, noise_free=True)}")
    assert mock_run.call_count == 1
    assert mock_run.call_args.kwargs["failure_alarm"] == 0.25


def test_invalid_failure_alarm_setting(tmp_path, settings):
    settings.NRTL_STUDY_FAILURE_ALARM = 1.5
    with pytest.raises(CommandError) as excinfo:
        call_command("mc", f"--config={write_config(tmp_path)}")
    assert str(excinfo.value) == "settings.NRTL_STUDY_FAILURE_ALARM has invalid value 1.5."
    assert excinfo.value.returncode == 2


MC_FILES = ["mc_report.csv", "summary_by_theta.csv", "summary_by_reg.csv"]


def run_twice_and_threaded(tmp_path, command, config, files):
    outputs = []
    for name, threads in [("first", 1), ("again", 1), ("threaded", 4)]:
        out = tmp_path / name
        call_command(command, f"--config={config}", f"--out={out}", f"--threads={threads}")
        outputs.append([(out / file_name).read_bytes() for file_name in files])
    return outputs


def test_reports_are_reproducible(tmp_path):
    config = write_config(
        tmp_path,
        parameter_scenarios=["All", "theta1*"],
        regularization_scenarios=["None", "E", "GO"],
    )
    first, again, threaded = run_twice_and_threaded(tmp_path, "mc", config, MC_FILES)
    assert again == first
    assert threaded == first


@pytest.mark.slow
def test_nrtl_reports_are_reproducible(tmp_path):
    path = tmp_path / "nrtl.json"
    path.write_text(
        json.dumps(
            {
                "fixture_mixtures": ["methanol-water-like"],
                "measurement_scenarios": ["worst", "best"],
                "parameter_scenarios": ["All", "alpha*"],
                "regularization_scenarios": ["None", "SVD"],
                "n_mc": 4,
                "seed": 9,
            }
        ),
        encoding="utf8",
    )
    first, again, threaded = run_twice_and_threaded(tmp_path, "mc", str(path), MC_FILES)
    assert again == first
    assert threaded == first
