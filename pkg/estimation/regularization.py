"""
Subset selection: which active parameters can be estimated from the data.

Every algorithm works on a scaled sensitivity matrix whose columns are the
active parameters. Indices in an IdentifiabilityResult are column indices of
that matrix; identify() maps them back to full parameter indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import itertools
import logging
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .responses import ResponseSpec
from .sensitivity import Scaling, SensitivityMatrix, active_indices, scale_sensitivity
from nrtlstudy.exceptions import DomainError

logger = logging.getLogger("eventsinfo.estimation")

E_EPS = 1e-3
SVD_EPS_COND = 1000.0
FS_EPS = 0.04
GO_MAX_COLUMNS = 20
GO_TIE_TOLERANCE = 1e-12


class RegularizationMethod(str, Enum):
    E = "E"
    SVD = "SVD"
    FS = "FS"
    GO = "GO"


@dataclass(frozen=True)
class RegularizationThresholds:
    e_eps: float = E_EPS
    svd_eps_cond: float = SVD_EPS_COND
    fs_eps: float = FS_EPS

    def __post_init__(self) -> None:
        for name in ("e_eps", "svd_eps_cond", "fs_eps"):
            value = getattr(self, name)
            if not value > 0:
                raise DomainError(name, value, "a threshold > 0")


@dataclass(frozen=True)
class IdentifiabilityResult:
    identifiable: tuple[int, ...]
    fixed: tuple[int, ...]
    ranking: tuple[int, ...]
    diagnostics: np.ndarray = field(compare=False)
    method: str = ""

    def identifiable_mask(self, n: int) -> tuple[bool, ...]:
        chosen = set(self.identifiable)
        return tuple(index in chosen for index in range(n))


def _columns(Sbar: SensitivityMatrix | np.ndarray) -> np.ndarray:
    values = Sbar.values if isinstance(Sbar, SensitivityMatrix) else Sbar
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] < 1:
        raise DomainError("Sbar", values.shape, "at least one column")
    return values


def _result(
    identifiable: Sequence[int],
    ranking: Sequence[int],
    n: int,
    diagnostics: np.ndarray,
    method: RegularizationMethod,
) -> IdentifiabilityResult:
    chosen = set(identifiable)
    return IdentifiabilityResult(
        identifiable=tuple(identifiable),
        fixed=tuple(index for index in range(n) if index not in chosen),
        ranking=tuple(ranking),
        diagnostics=np.asarray(diagnostics, dtype=float),
        method=method.value,
    )


def regularize_e(
    Sbar: SensitivityMatrix | np.ndarray, eps: float = E_EPS
) -> IdentifiabilityResult:
    """
    Drop parameters along the weakest FIM eigen-direction until
    the smallest eigenvalue reaches eps.

    Diagnostics are the eigenvalues of the full FIM, ascending.
    """
    values = _columns(Sbar)
    n = values.shape[1]
    remaining = list(range(n))
    removed: list[int] = []
    diagnostics = np.linalg.eigvalsh(values.T @ values)
    while remaining:
        sub = values[:, remaining]
        eigenvalues, eigenvectors = np.linalg.eigh(sub.T @ sub)
        if eigenvalues[0] >= eps:
            break
        position = int(np.argmax(np.abs(eigenvectors[:, 0])))
        removed.append(remaining.pop(position))
    ranking = remaining + removed[::-1]
    return _result(remaining, ranking, n, diagnostics, RegularizationMethod.E)


def regularize_svd(
    Sbar: SensitivityMatrix | np.ndarray, eps_cond: float = SVD_EPS_COND
) -> IdentifiabilityResult:
    """Rank from the singular value spread, priority from QR with column pivoting."""
    values = _columns(Sbar)
    n = values.shape[1]
    singular_values = linalg.svdvals(values)
    if singular_values.size == 0 or singular_values[0] == 0.0:
        rank = 0
    else:
        with np.errstate(divide="ignore"):
            ratios = singular_values[0] / singular_values
        rank = int(np.sum(ratios <= eps_cond))
    _, _, pivots = linalg.qr(values, pivoting=True, mode="economic")
    ranking = [int(index) for index in pivots]
    return _result(
        ranking[:rank], ranking, n, singular_values, RegularizationMethod.SVD
    )


def regularize_fs(
    Sbar_yao: SensitivityMatrix | np.ndarray, eps: float = FS_EPS
) -> IdentifiabilityResult:
    """
    Greedy forward selection with Gram-Schmidt deflation.

    Diagnostics hold each parameter's deflated column magnitude at the
    moment it was selected, or at termination for unselected parameters.
    """
    values = _columns(Sbar_yao).copy()
    n = values.shape[1]
    remaining = list(range(n))
    selected: list[int] = []
    magnitudes = np.linalg.norm(values, axis=0)
    while remaining:
        norms = np.linalg.norm(values[:, remaining], axis=0)
        magnitudes[remaining] = norms
        position = int(np.argmax(norms))
        if norms[position] < eps:
            break
        chosen = remaining.pop(position)
        selected.append(chosen)
        direction = values[:, chosen] / norms[position]
        for index in remaining:
            values[:, index] -= (direction @ values[:, index]) * direction
    if remaining:
        magnitudes[remaining] = np.linalg.norm(values[:, remaining], axis=0)
    leftovers = sorted(remaining, key=lambda index: (-magnitudes[index], index))
    return _result(
        selected, selected + leftovers, n, magnitudes, RegularizationMethod.FS
    )


def regularize_go(Sbar: SensitivityMatrix | np.ndarray) -> IdentifiabilityResult:
    """
    Exhaustive search for the column subset with the largest det(S_J^T S_J).

    Ties go to the larger subset, then to the lexicographically first one.
    Diagnostics hold the best determinant.
    """
    values = _columns(Sbar)
    n = values.shape[1]
    if n > GO_MAX_COLUMNS:
        raise DomainError("Sbar", n, f"at most {GO_MAX_COLUMNS} columns")
    fim = values.T @ values
    best: tuple[int, ...] = ()
    best_det = -np.inf
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            det = float(np.linalg.det(fim[np.ix_(subset, subset)]))
            scale = max(abs(det), abs(best_det)) if np.isfinite(best_det) else 0.0
            if det > best_det + GO_TIE_TOLERANCE * scale:
                best, best_det = subset, det
            elif abs(det - best_det) <= GO_TIE_TOLERANCE * scale and size > len(best):
                best, best_det = subset, det
    chosen = set(best)
    ranking = list(best) + [index for index in range(n) if index not in chosen]
    return _result(
        best, ranking, n, np.array([best_det]), RegularizationMethod.GO
    )


def identify(
    method: RegularizationMethod,
    S: SensitivityMatrix,
    theta: Sequence[float] | np.ndarray,
    mask: Sequence[bool],
    spec: ResponseSpec,
    y_pred: Optional[np.ndarray] = None,
    thresholds: RegularizationThresholds = RegularizationThresholds(),
) -> IdentifiabilityResult:
    """
    Scale S for the chosen method and run it.

    S holds the columns of the active parameters of mask; theta is the full
    parameter vector. FS needs the predicted responses y_pred for Yao scaling.
    The returned indices are full parameter indices.
    """
    columns = active_indices(mask)
    theta_active = np.asarray(theta, dtype=float)[columns]
    if method == RegularizationMethod.FS:
        if y_pred is None:
            raise DomainError("y_pred", None, "predicted responses for FS scaling")
        scaled = scale_sensitivity(S, theta_active, Scaling.YAO_SCALED, y_pred)
        local = regularize_fs(scaled, thresholds.fs_eps)
    else:
        scaled = scale_sensitivity(S, theta_active, Scaling.NOISE_SCALED, spec.sigma)
        if method == RegularizationMethod.E:
            local = regularize_e(scaled, thresholds.e_eps)
        elif method == RegularizationMethod.SVD:
            local = regularize_svd(scaled, thresholds.svd_eps_cond)
        else:
            local = regularize_go(scaled)

    def to_full(indices: Sequence[int]) -> tuple[int, ...]:
        return tuple(columns[index] for index in indices)

    identifiable = to_full(local.identifiable)
    chosen = set(identifiable)
    logger.debug(
        "identify",
        extra={"method": method.value, "identifiable": list(identifiable)},
    )
    return IdentifiabilityResult(
        identifiable=identifiable,
        fixed=tuple(index for index in columns if index not in chosen),
        ranking=to_full(local.ranking),
        diagnostics=local.diagnostics,
        method=local.method,
    )
