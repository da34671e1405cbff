"""
Estimate parameters from a measured dataset.

Writes fit_parameters.csv (value, absolute and relative confidence interval
per parameter), fit_covariance.csv and fit_correlation.csv (estimated
parameters not pinned at a bound), and fit_summary.json.
"""

import math
from typing import Any

import numpy as np

from estimation.uncertainty import correlation_matrix
from estimation.wls import fit_wls
from nrtlstudy.management.config_command import ConfigCommand
from nrtlstudy.output import write_csv, write_json_summary, write_matrix_csv
from nrtlstudy.runconfig import RunConfig
from nrtlstudy.exceptions import ConfigError

PARAMETER_HEADER = ["parameter", "value", "ci95_abs", "ci95_rel_pct", "fixed"]


class Command(ConfigCommand):
    help = "Fit parameters to a dataset by weighted least squares."

    def run(self, run_config: RunConfig) -> dict[str, Any]:
        section = run_config.fit
        if section is None:
            raise ConfigError("$.fit", "is required for the fit command")
        entry = run_config.models[section.model]
        data = run_config.load_dataset()
        names = entry.model.parameter_names
        theta0 = section.theta0 if section.theta0 is not None else entry.theta_true
        mask = tuple(name not in section.fixed for name in names)

        result = fit_wls(theta0, entry.bounds, mask, data, entry.model)
        half_widths = result.ci_half_widths(section.beta)

        rows = []
        for j, name in enumerate(names):
            value = float(result.theta_hat[j])
            relative = (
                100.0 * half_widths[j] / abs(value)
                if value != 0.0 and math.isfinite(half_widths[j])
                else math.nan
            )
            rows.append(
                {
                    "parameter": name,
                    "value": value,
                    "ci95_abs": half_widths[j],
                    "ci95_rel_pct": relative,
                    "fixed": not mask[j],
                }
            )
        write_csv(self.out_dir / "fit_parameters.csv", rows, PARAMETER_HEADER)

        ci_names = [name for j, name in enumerate(names) if result.ci_mask[j]]
        if result.C is not None:
            write_matrix_csv(self.out_dir / "fit_covariance.csv", ci_names, result.C)
            write_matrix_csv(
                self.out_dir / "fit_correlation.csv",
                ci_names,
                correlation_matrix(result.C),
            )

        variables = data.spec.variables
        summary = {
            "mixture": entry.label,
            "measurement_scenario": data.spec.label,
            "n_experiments": data.n_experiments,
            "theta_hat": dict(zip(names, result.theta_hat)),
            "ci_half_width": dict(zip(names, half_widths)),
            "fixed": list(section.fixed),
            "pinned_at_bound": [
                name
                for j, name in enumerate(names)
                if result.mask[j] and not result.ci_mask[j]
            ],
            "phi": result.phi,
            "dof": result.dof,
            "s_y": dict(zip(variables, result.s_y)),
            "sigma": dict(zip(variables, data.spec.sigma)),
            "beta": section.beta,
            "converged": result.converged,
            "n_iter": result.n_iter,
            "covariance": None if result.C is None else np.asarray(result.C),
            "condition_number": result.condition_number,
        }
        write_json_summary(self.out_dir / "fit_summary.json", summary)
        return {"mixture": entry.label, **result.log_context()}
