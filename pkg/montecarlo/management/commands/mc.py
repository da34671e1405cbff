"""
Run the parameter estimation Monte Carlo for every selected scenario.

Writes mc_report.csv (one row per scenario), summary_by_theta.csv and
summary_by_reg.csv (ensemble mean and std), and mc_summary.json.
"""

import logging
from typing import Any

from codetiming import Timer

from montecarlo.harness import run_mc
from montecarlo.metrics import summarize_reports
from nrtlstudy.exceptions import ConfigError
from nrtlstudy.management.config_command import ConfigCommand
from nrtlstudy.output import write_csv, write_json_summary
from nrtlstudy.runconfig import RunConfig

error_logger = logging.getLogger("events")


class Command(ConfigCommand):
    help = "Monte Carlo parameter estimation over the scenario matrix."

    def run(self, run_config: RunConfig) -> dict[str, Any]:
        scenarios = self.select(run_config.scenarios(self.seed))
        if not scenarios:
            raise ConfigError("$", f"no scenario matches {self.scenario_glob!r}")

        reports = []
        timers = {}
        for cfg in scenarios:
            with Timer(logger=None) as scenario_timer:
                report = run_mc(
                    cfg,
                    run_config.grids_for(cfg.mixture_label),
                    self.threads,
                    failure_alarm=self.failure_alarm,
                )
            reports.append(report)
            timers[cfg.label] = round(scenario_timer.last, 3)
            if report.failure_alarm and self.verbosity > 0:
                error_logger.error("mc failure alarm", extra=report.log_context())
            self.detail(
                "mc scenario",
                {**report.log_context(), "timers": {"scenario_s": timers[cfg.label]}},
            )

        write_csv(self.out_dir / "mc_report.csv", [r.as_row() for r in reports])
        write_csv(self.out_dir / "summary_by_theta.csv", summarize_reports(reports, "theta"))
        write_csv(self.out_dir / "summary_by_reg.csv", summarize_reports(reports, "reg"))
        summary = {
            "seed": run_config.seed if self.seed is None else self.seed,
            "n_mc": run_config.n_mc,
            "beta": run_config.beta,
            "n_scenarios": len(reports),
            "scenarios": [report.as_row() for report in reports],
            "timers": timers,
        }
        write_json_summary(self.out_dir / "mc_summary.json", summary)
        return {
            "n_scenarios": len(reports),
            "n_failed": sum(report.n_failed for report in reports),
        }
