"""
Write bubble point curves.

For each mixture of the run config (or the vle section's list), the bubble
point is computed at every (x1L, P) row of the grid and written to
vle_<label>.csv.
"""

from typing import Any

from nrtlstudy.management.config_command import ConfigCommand
from nrtlstudy.output import write_csv
from nrtlstudy.runconfig import RunConfig
from nrtlstudy.exceptions import ModelEvaluationError, NrtlStudyError
from thermo.vle import bubble_point
from montecarlo.scenarios import case_study_one_grid

VLE_HEADER = [
    "x1L_molmol",
    "P_Pa",
    "T_K",
    "x1V_molmol",
    "gamma1_dimless",
    "gamma2_dimless",
]


class Command(ConfigCommand):
    help = "Compute bubble point curves (T, x1V, gamma) over a grid."

    def run(self, run_config: RunConfig) -> dict[str, Any]:
        if run_config.vle is not None:
            labels = run_config.vle.mixtures
            grid = run_config.vle.grid
        else:
            labels = tuple(
                label
                for label, entry in run_config.models.items()
                if entry.mixture is not None
            )
            grid = case_study_one_grid()
        entries = self.select([run_config.models[label] for label in labels])

        files = []
        for entry in entries:
            rows = []
            for index, (x1L, P) in enumerate(grid):
                try:
                    state = bubble_point(float(x1L), float(P), entry.mixture)
                except NrtlStudyError as e:
                    raise ModelEvaluationError(index, e)
                rows.append(
                    {
                        "x1L_molmol": state.x1L,
                        "P_Pa": state.P,
                        "T_K": state.T,
                        "x1V_molmol": state.x1V,
                        "gamma1_dimless": state.gamma1,
                        "gamma2_dimless": state.gamma2,
                    }
                )
            path = write_csv(self.out_dir / f"vle_{entry.label}.csv", rows, VLE_HEADER)
            files.append(path.name)
            self.detail("vle curve", {"mixture": entry.label, "n_points": len(rows)})
        return {"files": files, "n_mixtures": len(files), "n_points": len(grid)}
