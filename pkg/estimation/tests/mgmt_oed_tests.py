import csv
import json
import logging

import pytest

from django.core.management import CommandError, call_command

from nrtlstudy.tests.utils import log_extra

UNIT_SPEC = {"label": "unit", "variables": ["y"], "sigma": [1.0]}
SURROGATE = {
    "label": "line",
    "theta_true": [1.0, 2.0],
    "grids": {
        "measurement": {"u": [0.0, 1.0]},
        "prediction": {"u": [0.5]},
        "initial": {"u": [0.0, 1.0]},
    },
}


@pytest.fixture(autouse=True)
def test_settings(settings, tmp_path):
    """Override settings for tests"""
    settings.NRTL_STUDY_OUTPUT_DIR = str(tmp_path / "out")
    settings.NRTL_STUDY_THREADS = 1
    settings.NRTL_STUDY_VERBOSITY = 1
    return settings


def write_config(tmp_path, oed):
    path = tmp_path / "run.json"
    path.write_text(
        json.dumps(
            {"surrogates": [SURROGATE], "measurement_scenarios": [UNIT_SPEC], "oed": oed}
        ),
        encoding="utf8",
    )
    return str(path)


def read_rows(path):
    with path.open(newline="", encoding="utf8") as csv_file:
        return list(csv.DictReader(csv_file))


def test_oed_surrogate(tmp_path, caplog):
    config = write_config(
        tmp_path,
        {
            "mixture": "line",
            "design": {"rows": [[0.5]]},
            "measurement_scenario": UNIT_SPEC,
        },
    )
    call_command("oed", f"--config={config}")

    out = tmp_path / "out"
    (row,) = read_rows(out / "oed_design.csv")
    assert list(row) == ["u_dimless", "criterion_value_dimless", "start_index_count"]
    assert float(row["u_dimless"]) == pytest.approx(0.0, abs=1e-3)
    assert float(row["criterion_value_dimless"]) == pytest.approx(9.0, rel=1e-6)

    summary = json.loads((out / "oed_summary.json").read_text(encoding="utf8"))
    assert summary["criterion"] == "A"
    assert summary["criterion_before"] is None
    assert summary["criterion_after"] == pytest.approx(9.0, rel=1e-6)
    assert summary["n_existing"] == 1
    assert summary["n_starts"] == 21
    assert len(summary["u_new"]) == 1

    assert caplog.record_tuples == [("eventsinfo.oed", logging.INFO, "oed done")]
    extra = log_extra(caplog.records[0])
    assert extra["mixture"] == "line"
    assert extra["criterion"] == "A"


def test_oed_two_new_experiments(tmp_path):
    config = write_config(
        tmp_path,
        {
            "mixture": "line",
            "design": {"u": [0.2, 0.7]},
            "measurement_scenario": UNIT_SPEC,
            "criterion": "D",
            "n_new": 2,
            "n_starts": 6,
        },
    )
    call_command("oed", f"--config={config}", "--verbosity=0")
    rows = read_rows(tmp_path / "out" / "oed_design.csv")
    assert len(rows) == 2
    assert rows[0]["criterion_value_dimless"] == rows[1]["criterion_value_dimless"]
    summary = json.loads((tmp_path / "out" / "oed_summary.json").read_text(encoding="utf8"))
    assert summary["criterion"] == "D"
    assert summary["criterion_after"] < summary["criterion_before"]


def test_oed_requires_section(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(
        json.dumps({"surrogates": [SURROGATE], "measurement_scenarios": [UNIT_SPEC]}),
        encoding="utf8",
    )
    with pytest.raises(CommandError) as excinfo:
        call_command("oed", f"--config={path}")
    assert str(excinfo.value) == "Invalid config at $.oed: is required for the oed command"
    assert excinfo.value.returncode == 2


def test_oed_design_outside_bounds(tmp_path):
    config = write_config(
        tmp_path,
        {"mixture": "line", "design": {"rows": [[1.5]]}, "measurement_scenario": UNIT_SPEC},
    )
    with pytest.raises(CommandError) as excinfo:
        call_command("oed", f"--config={config}")
    assert str(excinfo.value) == (
        "Invalid config at $.oed.design: u must lie within [0.0, 1.0]"
    )
