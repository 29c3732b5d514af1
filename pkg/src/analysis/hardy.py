import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.asymptotics import AsymptoticSweep
from src.analysis.fourier import AtomicTransform, transform_handle
from src.analysis.geometry import truncation_masses_at_atoms
from src.analysis.quadrature import radial_integral
from src.core.errors import InconsistentSetupError, InvalidMeasureError, QuadratureBudgetError
from src.core.parallel import ordered_map
from src.models.atomic_measure import AtomicMeasure
from src.models.series import AsymptoticSeries, as_grid
from src.models.settings import QuadratureSettings
from src.models.verdict import HardySetup, TheoremId, VerdictReport

logger = logging.getLogger(__name__)

FREQUENCY_MERGE_TOL = 1e-12
MIN_BESICOVITCH_INTERVALS = 64


def nonincreasing_rearrangement(c: Sequence[complex]) -> np.ndarray:
    """|c_k| sorted in descending order."""
    return np.sort(np.abs(np.asarray(c, dtype=complex).reshape(-1)))[::-1]


def _check_hardy_p(p: float) -> None:
    if not 1.0 <= p <= 2.0:
        raise InconsistentSetupError(f"p in [1,2] required, got p = {p:g}")


def hardy_sum(c: Sequence[complex], p: float) -> float:
    """sum_k (c*_k)^p / k^(2 - p) over the nonincreasing rearrangement c*."""
    _check_hardy_p(p)
    return hardy_sum_unrearranged(nonincreasing_rearrangement(c), p)


def hardy_sum_unrearranged(c: Sequence[complex], p: float) -> float:
    """sum_k |c_k|^p / k^(2 - p) in the order given (never above hardy_sum)."""
    _check_hardy_p(p)
    moduli = np.abs(np.asarray(c, dtype=complex).reshape(-1))
    k = np.arange(1, moduli.size + 1, dtype=float)
    return float(np.sum(moduli ** p / k ** (2.0 - p)))


def merge_frequencies(u: AtomicMeasure, tol: float = FREQUENCY_MERGE_TOL) -> AtomicMeasure:
    """Combine coefficients whose frequencies lie within tol of each other."""
    order = np.argsort(u.locations[:, 0], kind="stable")
    freqs = u.locations[order, 0]
    coeffs = u.weights[order]
    starts = np.concatenate([[True], np.diff(freqs) > tol])
    if np.all(starts):
        return AtomicMeasure.on_line(freqs, coeffs)
    logger.warning("merging %d coinciding frequencies before Besicovitch quadrature",
                   int(np.count_nonzero(~starts)))
    labels = np.cumsum(starts) - 1
    merged = np.zeros(int(labels[-1]) + 1, dtype=complex)
    np.add.at(merged, labels, coeffs)
    return AtomicMeasure.on_line(freqs[starts], merged)


def besicovitch_average(u: AtomicMeasure, p: float, L: float, beat_samples: int = 16,
                        sample_cap: int = 2 ** 24) -> float:
    """L^-1 times the integral over [-L, L] of |sum_k c_k e^{i a_k x}|^p."""
    freqs = u.locations[:, 0]
    beat = float(freqs.max() - freqs.min())
    intervals = MIN_BESICOVITCH_INTERVALS
    if beat > 0:
        intervals = max(intervals, int(np.ceil(2.0 * L * beat * beat_samples / (2.0 * np.pi))))
    intervals += intervals % 2
    if intervals + 1 > sample_cap:
        raise QuadratureBudgetError(
            f"Besicovitch quadrature at L = {L:g} needs {intervals + 1} samples, over {sample_cap}"
        )
    x = np.linspace(-L, L, intervals + 1)
    values = np.abs(AtomicTransform(u, sign=1.0)(x)) ** p
    return radial_integral(values, x) / L


def besicovitch_norm(u: AtomicMeasure, p: float, L_grid: Sequence[float],
                     settings: Optional[QuadratureSettings] = None, threads: int = 1,
                     progress_callback: Optional[Callable[[int, int], None]] = None) -> AsymptoticSeries:
    """Series of L^-1 int_{-L}^{L} |u(x)|^p dx for the trigonometric sum u = sum c_k e^{i a_k x}.

    Atom locations are the frequencies a_k and atom weights the coefficients c_k.
    Simpson nodes put beat_samples points on every shortest beat period
    2 pi / max|a_j - a_k|.
    """
    if u.dim != 1:
        raise InvalidMeasureError("Besicovitch norms are computed on the line only (n = 1)")
    if p < 1:
        raise InvalidMeasureError(f"p must be at least 1, got {p}")
    settings = settings or QuadratureSettings()
    merged = merge_frequencies(u)
    grid = as_grid(L_grid)
    values = ordered_map(
        lambda L: besicovitch_average(merged, p, L, settings.beat_samples, settings.sample_cap),
        grid, threads, progress_callback,
    )
    return AsymptoticSeries(1.0, p, grid, values, "besicovitch_mean")


def fractal_hardy_lhs(setup: HardySetup) -> float:
    """sum_i f_i^p w_i / mu(E_{a_i})^(2 - p) over the atoms a_i."""
    base = setup.measure.base
    weights = base.weights.real
    if np.any(weights <= 0):
        raise InvalidMeasureError("fractal Hardy functional needs strictly positive atom weights")
    masses = truncation_masses_at_atoms(base)
    return float(np.sum(setup.measure.density ** setup.p * weights / masses ** (2.0 - setup.p)))


def _rhs_exponent(setup: HardySetup) -> float:
    n, alpha, p = setup.dim, setup.alpha, setup.p
    if setup.theorem_id is TheoremId.DISCRETE_HARDY:
        return 1.0
    if setup.theorem_id in (TheoremId.FRACTAL_HARDY, TheoremId.LOWER_BOUND):
        return n - alpha
    return n - alpha * p / 2.0


def _check_setup(setup: HardySetup) -> None:
    problems = setup.violations()
    if problems:
        raise InconsistentSetupError(f"{setup.theorem_id.value}: " + "; ".join(problems))


def theorem_lhs(setup: HardySetup) -> float:
    """Left-hand side of the selected inequality, a single number."""
    _check_setup(setup)
    theorem, p, measure = setup.theorem_id, setup.p, setup.measure
    if theorem is TheoremId.DISCRETE_HARDY:
        return hardy_sum(measure.effective_weights, p)
    if theorem is TheoremId.FRACTAL_HARDY:
        return fractal_hardy_lhs(setup)
    if theorem is TheoremId.L2_DENSITY:
        return measure.l2_mass() ** (p / 2.0)
    if theorem is TheoremId.MASS_LOWER_BOUND:
        return measure.total_variation() ** p
    return measure.l2_mass()


def rhs_series(setup: HardySetup, threads: int = 1,
               progress_callback: Optional[Callable[[int, int], None]] = None) -> Tuple[AsymptoticSeries, str]:
    """Right-hand series of the selected inequality along the setup's L-grid, with a note on its method."""
    _check_setup(setup)
    theorem = setup.theorem_id
    p, k = setup.p, _rhs_exponent(setup)
    measure = setup.measure
    if theorem is TheoremId.DISCRETE_HARDY:
        series = besicovitch_norm(AtomicMeasure(measure.base.locations, measure.effective_weights), p,
                                  setup.L_grid, setup.settings, threads, progress_callback)
        return series, "rhs uses u(x) = sum c_k exp(+i a_k x)"

    handle = transform_handle(measure, setup.source, setup.settings)
    sweep = AsymptoticSweep(handle, setup.settings, threads, progress_callback)
    if theorem is TheoremId.FRACTAL_HARDY or theorem is TheoremId.L2_DENSITY:
        series = sweep.ball_series(setup.L_grid, p, k)
    elif theorem is TheoremId.LOWER_BOUND:
        series = sweep.ball_series(setup.L_grid, 2.0, k)
    elif theorem is TheoremId.LOWER_BOUND_P:
        series = sweep.ball_series(setup.L_grid, p, k).powered(2.0 / p)
    elif theorem is TheoremId.LOWER_BOUND_GAUSSIAN:
        series = sweep.gaussian_series(setup.L_grid, p, k).powered(2.0 / p)
    else:
        series = sweep.profile_series(setup.L_grid, p, k)
    if isinstance(handle, AtomicTransform):
        return series, f"rhs summed directly over {measure.base.size} atoms"
    return series, "rhs uses the exact self-similar transform"


def verify_inequality(setup: HardySetup, threads: int = 1,
                      progress_callback: Optional[Callable[[int, int], None]] = None,
                      rhs: Optional[Tuple[AsymptoticSeries, str]] = None,
                      extra_notes: Sequence[str] = ()) -> VerdictReport:
    """Compute one theorem's left-hand side and right-hand band and compare them.

    empirical_C = lhs / liminf_est of the right-hand series (lhs / limsup_est for
    the total-mass bound, whose statement controls a limsup). The band is a
    proxy over the tail of the grid, not a limit. A right-hand series computed
    earlier for the same setup can be passed as `rhs`; `extra_notes` are
    appended to the verdict notes as given.
    """
    _check_setup(setup)
    theorem = setup.theorem_id
    lhs = theorem_lhs(setup)
    series, method = rhs if rhs is not None else rhs_series(setup, threads, progress_callback)
    notes: List[str] = [
        "liminf_est / limsup_est are min / max over the last half of the L-grid (band proxies, not limits)",
        f"stable means band max/min <= {setup.band_factor:g} and a positive band minimum",
        method,
        *extra_notes,
    ]

    reference = series.limsup_est if theorem is TheoremId.MASS_LOWER_BOUND else series.liminf_est
    empirical_c = lhs / reference if reference > 0 else float("inf")
    stable = bool(series.liminf_est > 0 and series.band_ratio <= setup.band_factor)
    logger.info("%s on %s: lhs = %.6g, band = [%.6g, %.6g], C = %.6g, stable = %s", theorem.value,
                setup.label, lhs, series.liminf_est, series.limsup_est, empirical_c, stable)
    return VerdictReport(theorem, float(lhs), series, float(empirical_c), stable, "\n".join(notes),
                         setup.p, setup.alpha, setup.label, setup.ceiling)
