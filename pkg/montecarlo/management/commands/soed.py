"""
Run the sequential design loop under Monte Carlo replication.

Writes soed_report.csv with one row per (scenario, iteration) and
soed_summary.json.
"""

import logging
from typing import Any

from codetiming import Timer

from montecarlo.soed import run_soed_pe
from nrtlstudy.exceptions import ConfigError
from nrtlstudy.management.config_command import ConfigCommand
from nrtlstudy.output import write_csv, write_json_summary
from nrtlstudy.runconfig import RunConfig

error_logger = logging.getLogger("events")


class Command(ConfigCommand):
    help = "Sequential experimental design and estimation, Monte Carlo replicated."

    def run(self, run_config: RunConfig) -> dict[str, Any]:
        scenarios = self.select(run_config.scenarios(self.seed))
        if not scenarios:
            raise ConfigError("$", f"no scenario matches {self.scenario_glob!r}")
        section = run_config.soed

        rows = []
        timers = {}
        for cfg in scenarios:
            with Timer(logger=None) as scenario_timer:
                reports = run_soed_pe(
                    cfg,
                    run_config.grids_for(cfg.mixture_label),
                    n_iterations=section.n_iterations,
                    criterion=section.criterion,
                    threads=self.threads,
                    n_starts=section.n_starts,
                    failure_alarm=self.failure_alarm,
                )
            timers[cfg.label] = round(scenario_timer.last, 3)
            rows.extend(report.as_row() for report in reports)
            last = reports[-1]
            if last.failure_alarm and self.verbosity > 0:
                error_logger.error("soed failure alarm", extra=last.log_context())
            self.detail(
                "soed scenario",
                {**last.log_context(), "timers": {"scenario_s": timers[cfg.label]}},
            )

        write_csv(self.out_dir / "soed_report.csv", rows)
        summary = {
            "seed": run_config.seed if self.seed is None else self.seed,
            "n_mc": run_config.n_mc,
            "n_iterations": section.n_iterations,
            "criterion": section.criterion.value,
            "n_scenarios": len(scenarios),
            "rows": rows,
            "timers": timers,
        }
        write_json_summary(self.out_dir / "soed_summary.json", summary)
        return {"n_scenarios": len(scenarios), "n_rows": len(rows)}
