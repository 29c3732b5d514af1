import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.analysis.asymptotics import gaussian_sup, lau_B_norm, lau_M_norm, lau_M_sup_norm
from src.analysis.fourier import AtomicTransform, SelfSimilarTransform, mollified_l2
from src.analysis.geometry import (cell_content_ratios, covering_number, minkowski_content, neighborhood_volume,
                                   neighborhood_volume_bounds, packing_number, unit_ball_volume)
from src.analysis.hardy import hardy_sum_unrearranged, rhs_series, theorem_lhs, verify_inequality
from src.analysis.measures import cylinder_approx
from src.core.config_loader import ExperimentConfig
from src.core.parallel import ordered_map, resolve_threads
from src.models.atomic_measure import AtomicMeasure, PointCloud, WeightedMeasure
from src.models.series import AsymptoticSeries
from src.models.verdict import HardySetup, TheoremId, VerdictReport

logger = logging.getLogger(__name__)

COMMANDS = ("dimension", "geometry", "fourier", "asymptotics", "hardy", "verify", "all")
STAGES = ("dimension", "geometry", "fourier", "asymptotics", "hardy", "verify")


@dataclass
class Table:
    """A result table plus the comment header written above it."""

    name: str
    frame: pd.DataFrame
    header: List[str] = field(default_factory=list)


@dataclass
class ExperimentResults:
    command: str
    threads: int
    tables: List[Table] = field(default_factory=list)
    series: Dict[TheoremId, AsymptoticSeries] = field(default_factory=dict)
    verdicts: List[VerdictReport] = field(default_factory=list)
    summary: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if all(report.passed for report in self.verdicts) else 1


class Experiment:
    """Runs the stages a CLI subcommand selects on one configured measure."""

    def __init__(self, config: ExperimentConfig, threads: Optional[int] = None,
                 progress_callback: Optional[Callable[[int, int], None]] = None):
        """
        Args:
            config: Parsed and range-checked experiment configuration
            threads: Explicit thread count; falls back to FFLAB_THREADS, then the config
            progress_callback: Optional callback function(done, total) for long sweeps
        """
        self.config = config
        self.threads = resolve_threads(threads, config.threads)
        self.progress_callback = progress_callback
        self._base: Optional[AtomicMeasure] = None
        self._measure: Optional[WeightedMeasure] = None
        self._rhs: Dict[TheoremId, Tuple[AsymptoticSeries, str]] = {}
        self._cloud_cache: Optional[Tuple[PointCloud, np.ndarray]] = None
        self._ratios: Optional[np.ndarray] = None

    @property
    def base(self) -> AtomicMeasure:
        if self._base is None:
            logger.info("discretising %s at depth %d", self.config.label, self.config.depth)
            self._base = self.config.base_measure()
        return self._base

    @property
    def measure(self) -> WeightedMeasure:
        if self._measure is None:
            self._measure = self.config.weighted_measure(self.base)
        return self._measure

    def header(self, theorem: Optional[str] = None) -> List[str]:
        c = self.config
        theorem = theorem or ", ".join(t.value for t in c.theorems)
        return [f"theorem: {theorem}", f"measure: {c.label} (n = {c.dim}, alpha = {c.alpha:.17g})",
                f"p = {c.p:.17g}, depth = {c.depth}, density = {c.density.describe()}"]

    def run(self, command: str) -> ExperimentResults:
        if command not in COMMANDS:
            raise ValueError(f"unknown command {command!r}")
        stages = STAGES if command == "all" else (command,)
        results = ExperimentResults(command, self.threads)
        logger.info("running %s on %s with %d thread(s)", command, self.config.label, self.threads)
        for stage in stages:
            getattr(self, f"_{stage}")(results)
        return results

    def _dimension(self, results: ExperimentResults) -> None:
        c = self.config
        if c.ifs is None:
            frame = pd.DataFrame({"alpha": [c.alpha], "moran_residual": [np.nan], "maps": [0]})
            results.summary.append(f"dimension: alpha = {c.alpha:.12g} (given for an atomic measure)")
        else:
            frame = pd.DataFrame({"alpha": [c.ifs.dimension_alpha], "moran_residual": [c.ifs.moran_residual],
                                  "maps": [len(c.ifs.maps)]})
            results.summary.append(f"dimension: alpha = {c.ifs.dimension_alpha:.15g}, "
                                   f"residual = {c.ifs.moran_residual:.3g}")
        results.tables.append(Table("dimension", frame, self.header()))

    def _cloud(self) -> Tuple[PointCloud, np.ndarray]:
        if self._cloud_cache is None:
            self._cloud_cache = self.config.geometry_cloud(self.base)
        return self._cloud_cache

    def _cell_ratios(self) -> np.ndarray:
        """Content-to-mass ratios of the grid cells, empty when no epsilon is below the cell side."""
        if self._ratios is None:
            c = self.config
            cloud, weights = self._cloud()
            if np.any(c.epsilons < c.cell):
                self._ratios = cell_content_ratios(cloud, weights, c.alpha, c.cell, c.epsilons)
            else:
                logger.warning("no epsilon below the cell side %g; cell ratios skipped", c.cell)
                self._ratios = np.empty(0)
        return self._ratios

    def _cell_note(self) -> str:
        ratios = self._cell_ratios()
        if ratios.size == 0:
            return f"content hypothesis not checked: no cell of side {self.config.cell:g} has a usable epsilon"
        return (f"content hypothesis checked on {ratios.size} axis-aligned grid cells of side "
                f"{self.config.cell:g} only: ratio min = {ratios.min():.6g}, max = {ratios.max():.6g}")

    def _geometry(self, results: ExperimentResults) -> None:
        c = self.config
        cloud, _ = self._cloud()
        n = cloud.dim
        content = minkowski_content(cloud, c.alpha, c.epsilons, c.grid_fraction, self.threads)
        omega = unit_ball_volume(n)

        def counts(eps: float) -> Tuple[int, int, int, int, float, float, float]:
            h = eps * c.grid_fraction
            return (covering_number(cloud, eps / 2.0), covering_number(cloud, eps),
                    covering_number(cloud, 2.0 * eps), packing_number(cloud, eps),
                    neighborhood_volume(cloud, eps, h), *neighborhood_volume_bounds(cloud, eps, h))

        rows = ordered_map(counts, c.epsilons, self.threads, self.progress_callback)
        half, cover, double, pack, volume, lower, upper = (np.array(column) for column in zip(*rows))
        frame = pd.DataFrame({
            "epsilon": c.epsilons,
            "volume": volume,
            "volume_lower": lower,
            "volume_upper": upper,
            "content": content.values,
            "covering_half": half,
            "covering": cover,
            "covering_double": double,
            "packing": pack,
            "packing_bounds_ok": (double <= pack) & (pack <= half),
            # lower <= |A(eps)| <= upper, so neither check trips on grid error
            "volume_bounds_ok": (omega * pack * c.epsilons ** n <= upper)
                                & (lower <= omega * cover * (2.0 * c.epsilons) ** n),
        })
        results.tables.append(Table("geometry", frame, self.header() + [
            f"cloud: {len(cloud)} points, grid fraction = {c.grid_fraction:.17g}"]))

        ratios = self._cell_ratios()
        results.tables.append(Table("cell_ratios", pd.DataFrame({"cell": np.arange(ratios.size), "ratio": ratios}),
                                    self.header() + [f"cell side = {c.cell:.17g} (grid cells only)"]))
        results.summary.append(f"geometry: content in [{content.lower_est:.6g}, {content.upper_est:.6g}]; "
                               + self._cell_note())

    def _fourier(self, results: ExperimentResults) -> None:
        c = self.config
        xi = c.frequencies
        norms = np.linalg.norm(xi, axis=1)
        atomic = AtomicTransform(self.measure)(xi)
        frame = pd.DataFrame({"xi": norms, "atomic_re": atomic.real, "atomic_im": atomic.imag,
                              "atomic_abs": np.abs(atomic)})
        if c.ifs is not None and c.density.is_constant:
            scale = float(c.density.value)
            exact = scale * SelfSimilarTransform(c.ifs, c.settings.tol, c.settings.max_depth)(xi)
            cylinder = c.ifs.box_diameter * float(np.max(c.ifs.ratios)) ** c.depth
            frame["exact_re"] = exact.real
            frame["exact_im"] = exact.imag
            frame["exact_abs"] = np.abs(exact)
            frame["difference"] = np.abs(exact - atomic)
            # |e^{-i<a,xi>} - e^{-i<b,xi>}| <= |xi| |a - b| inside each cylinder
            frame["bound"] = scale * norms * cylinder + c.settings.tol
            results.summary.append(f"fourier: max |exact - atomic| = {frame['difference'].max():.3g} "
                                   f"(bound satisfied: {bool(np.all(frame['difference'] <= frame['bound']))})")
        else:
            results.summary.append(f"fourier: {xi.shape[0]} frequencies summed over {self.base.size} atoms")
        results.tables.append(Table("fourier", frame, self.header()))

        target = c.ifs if c.ifs is not None and c.density.is_constant else self.measure.as_atomic()
        factor = float(c.density.value) ** 2 if target is c.ifs else 1.0
        values = ordered_map(lambda eps: factor * mollified_l2(target, eps, c.settings.mollifier_cut, c.settings),
                             c.mollifier_epsilons, self.threads)
        eps = np.asarray(c.mollifier_epsilons)
        results.tables.append(Table("mollifier", pd.DataFrame({
            "epsilon": eps,
            "mollified_l2": values,
            "normalised": np.asarray(values) * eps ** (c.dim - c.alpha),
        }), self.header() + [f"mollifier cut = {c.settings.mollifier_cut:.17g}"]))

    def _setups(self) -> List[HardySetup]:
        return self.config.setups(self.measure)

    def _rhs_for(self, setup: HardySetup) -> Tuple[AsymptoticSeries, str]:
        if setup.theorem_id not in self._rhs:
            self._rhs[setup.theorem_id] = rhs_series(setup, self.threads, self.progress_callback)
        return self._rhs[setup.theorem_id]

    def _asymptotics(self, results: ExperimentResults) -> None:
        c = self.config
        for setup in self._setups():
            series, _ = self._rhs_for(setup)
            results.series[setup.theorem_id] = series
            results.summary.append(f"asymptotics: {setup.theorem_id.value} band = "
                                   f"[{series.liminf_est:.6g}, {series.limsup_est:.6g}]")
        if c.theorems == (TheoremId.DISCRETE_HARDY,):
            return

        handle = self.config.ifs if c.ifs is not None and c.density.is_constant else self.measure
        b_norm = lau_B_norm(handle, c.alpha, c.p, c.L_grid, c.settings, self.threads)
        g_sup = gaussian_sup(handle, c.alpha, c.L_grid, c.settings, self.threads)
        if c.density.is_constant:
            b_norm *= float(c.density.value)
            g_sup *= float(c.density.value) ** 2
        coarse = self.measure.as_atomic()
        if c.ifs is not None and c.lau_depth != c.depth:
            coarse = c.weighted_measure(cylinder_approx(c.ifs, c.lau_depth, c.settings.atom_budget)).as_atomic()
        m_norm = lau_M_norm(coarse, c.alpha, c.p, c.deltas, c.settings.sample_cap)
        m_sup = lau_M_sup_norm(coarse, c.alpha, c.deltas, c.settings.sample_cap)
        frame = pd.DataFrame({
            "norm": ["lau_B", "gaussian_sup", "lau_M", "lau_M_sup"],
            "value": [b_norm, g_sup, m_norm, m_sup],
        })
        results.tables.append(Table("norms", frame, self.header() + [
            f"L-grid maxima over {c.L_grid.size} points; cube norms at depth {c.lau_depth}"]))
        results.summary.append(f"asymptotics: lau_B = {b_norm:.6g}, gaussian_sup = {g_sup:.6g}, "
                               f"lau_M = {m_norm:.6g}, lau_M_sup = {m_sup:.6g}")

    def _hardy(self, results: ExperimentResults) -> None:
        rows = []
        for setup in self._setups():
            rows.append({"theorem": setup.theorem_id.value, "functional": "lhs", "value": theorem_lhs(setup)})
            if setup.theorem_id is TheoremId.DISCRETE_HARDY:
                rows.append({"theorem": setup.theorem_id.value, "functional": "unrearranged",
                             "value": hardy_sum_unrearranged(setup.measure.effective_weights, setup.p)})
        frame = pd.DataFrame(rows, columns=["theorem", "functional", "value"])
        results.tables.append(Table("hardy", frame, self.header()))
        results.summary.extend(f"hardy: {row['theorem']} {row['functional']} = {row['value']:.12g}" for row in rows)

    def _verify(self, results: ExperimentResults) -> None:
        for setup in self._setups():
            notes = () if setup.theorem_id is TheoremId.DISCRETE_HARDY else (self._cell_note(),)
            report = verify_inequality(setup, self.threads, self.progress_callback, self._rhs_for(setup), notes)
            results.series[setup.theorem_id] = report.rhs_series
            results.verdicts.append(report)
            results.summary.append(f"verify: {report.theorem_id.value} C = {report.empirical_C:.6g} "
                                   f"{'PASS' if report.passed else 'FAIL'}")
