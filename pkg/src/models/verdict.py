from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from src.core.errors import InconsistentSetupError
from src.models.atomic_measure import WeightedMeasure
from src.models.ifs_measure import IFSMeasure
from src.models.series import AsymptoticSeries
from src.models.settings import QuadratureSettings


class TheoremId(str, Enum):
    """Inequalities the lab can check, keyed by their config names."""

    DISCRETE_HARDY = "discrete_hardy"
    FRACTAL_HARDY = "fractal_hardy"
    LOWER_BOUND = "lower_bound"
    LOWER_BOUND_P = "lower_bound_p"
    L2_DENSITY = "l2_density"
    LOWER_BOUND_GAUSSIAN = "lower_bound_gaussian"
    MASS_LOWER_BOUND = "mass_lower_bound"

    @property
    def is_hardy(self) -> bool:
        return self in (TheoremId.DISCRETE_HARDY, TheoremId.FRACTAL_HARDY)

    @property
    def title(self) -> str:
        return _TITLES[self]

    @classmethod
    def parse(cls, text: str) -> "TheoremId":
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = ", ".join(t.value for t in cls)
            raise InconsistentSetupError(f"unknown theorem id {text!r}; expected one of: {names}")


_TITLES = {
    TheoremId.DISCRETE_HARDY: "discrete Hardy inequality (rearranged coefficients vs Besicovitch mean)",
    TheoremId.FRACTAL_HARDY: "fractal Hardy inequality (truncation-mass weights vs ball average)",
    TheoremId.LOWER_BOUND: "L2 lower bound by the ball average with k = n - alpha",
    TheoremId.LOWER_BOUND_P: "L2 lower bound by the p-th ball average with k = n - alpha p/2",
    TheoremId.L2_DENSITY: "L2 density bound with k = n - alpha p/2",
    TheoremId.LOWER_BOUND_GAUSSIAN: "L2 lower bound by the Gaussian-weighted average",
    TheoremId.MASS_LOWER_BOUND: "total-mass lower bound by the spherical-profile average",
}


def range_violations(theorem_id: TheoremId, p: float, n: int, alpha: float) -> List[str]:
    """Preconditions on p, n and alpha that the selected theorem imposes."""
    problems = []
    if theorem_id.is_hardy:
        if not 1.0 <= p <= 2.0:
            problems.append(f"p in [1,2] required, got p = {p:g}")
    else:
        upper = 2.0 * n / alpha if alpha > 0 else float("inf")
        if not 2.0 <= p < upper:
            problems.append(f"p in [2, 2n/alpha) = [2, {upper:.6g}) required, got p = {p:g}")
    if theorem_id is TheoremId.DISCRETE_HARDY:
        if n != 1:
            problems.append("discrete Hardy works on the line only (n = 1)")
    elif not 0.0 < alpha < n:
        problems.append(f"alpha in (0, n) = (0, {n}) required, got alpha = {alpha:g}")
    return problems


@dataclass(frozen=True, eq=False)
class HardySetup:
    """Everything verify_inequality needs for one theorem on one measure.

    `source` is the self-similar measure the atoms discretise, when there is one;
    right-hand sides then use its exact transform whenever the density is constant.
    """

    measure: WeightedMeasure
    p: float
    theorem_id: TheoremId
    L_grid: np.ndarray
    alpha: float
    source: Optional[IFSMeasure] = None
    band_factor: float = 8.0
    ceiling: float = 1e6
    settings: QuadratureSettings = field(default_factory=QuadratureSettings)
    label: str = "measure"

    def __post_init__(self):
        object.__setattr__(self, "L_grid", np.array(self.L_grid, dtype=float).reshape(-1))
        problems = self.violations()
        if problems:
            raise InconsistentSetupError(
                f"{self.theorem_id.value}: " + "; ".join(problems)
            )

    @property
    def dim(self) -> int:
        return self.measure.dim

    def violations(self) -> List[str]:
        problems = range_violations(self.theorem_id, self.p, self.dim, self.alpha)
        if self.L_grid.size == 0 or np.any(self.L_grid <= 0) or np.any(np.diff(self.L_grid) <= 0):
            problems.append("L-grid must be positive and strictly increasing")
        if self.band_factor < 1:
            problems.append("band_factor must be at least 1")
        if np.any(self.measure.base.weights.real < 0) or np.any(self.measure.base.weights.imag != 0):
            if self.theorem_id is not TheoremId.DISCRETE_HARDY:
                problems.append("measure weights must be real and nonnegative")
        return problems


@dataclass(frozen=True, eq=False)
class VerdictReport:
    """Outcome of checking one inequality on one measure."""

    theorem_id: TheoremId
    lhs: float
    rhs_series: AsymptoticSeries
    empirical_C: float
    stable: bool
    notes: str
    p: float = 2.0
    alpha: float = 0.0
    label: str = "measure"
    ceiling: float = 1e6

    @property
    def passed(self) -> bool:
        return bool(self.stable and np.isfinite(self.empirical_C) and self.empirical_C < self.ceiling)

    def to_row(self) -> Dict[str, object]:
        return {
            "theorem": self.theorem_id.value,
            "measure": self.label,
            "p": self.p,
            "alpha": self.alpha,
            "k": self.rhs_series.exponent_k,
            "lhs": self.lhs,
            "rhs_liminf_est": self.rhs_series.liminf_est,
            "rhs_limsup_est": self.rhs_series.limsup_est,
            "band_ratio": self.rhs_series.band_ratio,
            "empirical_C": self.empirical_C,
            "stable": self.stable,
            "passed": self.passed,
        }

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"theorem      : {self.theorem_id.value} -- {self.theorem_id.title}",
            f"measure      : {self.label}",
            f"p / alpha / k: {self.p:g} / {self.alpha:.10g} / {self.rhs_series.exponent_k:.10g}",
            f"lhs          : {self.lhs:.12g}",
            f"rhs band     : [{self.rhs_series.liminf_est:.12g}, {self.rhs_series.limsup_est:.12g}]"
            f" over L in [{self.rhs_series.L_values[0]:g}, {self.rhs_series.L_values[-1]:g}]",
            f"empirical C  : {self.empirical_C:.12g}",
            f"stable       : {self.stable}",
            f"verdict      : {status}",
            "notes:",
        ]
        lines.extend(f"  - {note}" for note in self.notes.splitlines() if note)
        return "\n".join(lines) + "\n"
