"""
Suggest the next experiment(s) for a design.

Writes oed_design.csv with the suggested control rows and oed_summary.json.
"""

from typing import Any

from estimation.oed import criterion_value, design_next
from estimation.sensitivity import sensitivity_matrix
from nrtlstudy.management.config_command import ConfigCommand
from nrtlstudy.output import write_csv, write_json_summary
from nrtlstudy.runconfig import RunConfig, control_columns
from nrtlstudy.exceptions import ConfigError


class Command(ConfigCommand):
    help = "Compute the A/D/E-optimal next experiment for a design."

    def run(self, run_config: RunConfig) -> dict[str, Any]:
        section = run_config.oed
        if section is None:
            raise ConfigError("$.oed", "is required for the oed command")
        entry = run_config.models[section.model]
        names = entry.model.parameter_names
        theta = section.theta if section.theta is not None else entry.theta_true
        mask = tuple(name not in section.fixed for name in names)

        current = criterion_value(
            sensitivity_matrix(section.design, theta, mask, section.spec, entry.model),
            section.spec,
            section.criterion,
        )
        candidate = design_next(
            section.design,
            theta,
            mask,
            section.spec,
            entry.model,
            criterion=section.criterion,
            n_new=section.n_new,
            n_starts=section.n_starts,
            threads=self.threads,
        )

        columns = control_columns(entry.model)
        rows = [
            {
                **dict(zip(columns, row)),
                "criterion_value_dimless": candidate.value,
                "start_index_count": candidate.start_index,
            }
            for row in candidate.u_new
        ]
        write_csv(
            self.out_dir / "oed_design.csv",
            rows,
            [*columns, "criterion_value_dimless", "start_index_count"],
        )
        summary = {
            "mixture": entry.label,
            "measurement_scenario": section.spec.label,
            "criterion": section.criterion.value,
            "fixed": list(section.fixed),
            "n_existing": len(section.design),
            "criterion_before": current,
            "criterion_after": candidate.value,
            "start_index": candidate.start_index,
            "n_starts": section.n_starts,
            "u_new": candidate.u_new,
        }
        write_json_summary(self.out_dir / "oed_summary.json", summary)
        return {
            "mixture": entry.label,
            "criterion": section.criterion.value,
            "value": candidate.value,
        }
