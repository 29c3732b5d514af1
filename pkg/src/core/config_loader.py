import ast
import dataclasses
import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.analysis.geometry import cloud_resolution
from src.analysis.measures import chaos_game_sample, cylinder_approx
from src.core.errors import AtomBudgetError, ConfigError, InvalidMeasureError, LabError
from src.core.presets import PRESETS, preset
from src.models.atomic_measure import AtomicMeasure, PointCloud, WeightedMeasure
from src.models.ifs_measure import IFSMeasure
from src.models.series import dyadic_grid, epsilon_grid
from src.models.settings import DEFAULT_ATOM_BUDGET, QuadratureSettings
from src.models.similitude import Similitude
from src.models.verdict import HardySetup, TheoremId, range_violations

logger = logging.getLogger(__name__)

AUTO_ATOMS = 4096
LAU_GRID_ATOMS = 1024

KNOWN_KEYS: Dict[str, Tuple[str, ...]] = {
    "measure": ("kind", "preset", "name", "dimension", "weights", "osc", "bounding_box", "maps",
                "locations", "alpha"),
    "measure.maps": ("ratio", "angle", "reflect", "translation"),
    "density": ("kind", "value", "values", "expression"),
    "theorem": ("id", "ids", "p"),
    "grid": ("base", "start", "count"),
    "epsilon": ("base", "start", "count", "grid_fraction"),
    "quadrature": ("depth", "tol", "max_depth", "radial_samples", "samples_per_wavelength",
                   "angular_order", "beat_samples", "gaussian_cutoff", "mollifier_cut", "sample_cap"),
    "verdict": ("band_factor", "ceiling"),
    "output": ("directory",),
    "run": ("seed", "threads", "atom_budget"),
    "fourier": ("xi_min", "xi_max", "count", "direction", "mollifier_epsilons"),
    "geometry": ("samples", "cell"),
    "asymptotics": ("deltas", "lau_depth"),
}

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
              "abs": np.abs, "tanh": np.tanh}
_CONSTANTS = {"pi": np.pi, "e": np.e}
_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
          ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


class _SourceIndex:
    """Maps (table, key) pairs back to line numbers of the TOML text."""

    HEADER = re.compile(r"^\s*\[\[?\s*([A-Za-z0-9_.]+)\s*\]\]?")
    ASSIGN = re.compile(r"^\s*([A-Za-z0-9_]+)\s*=")

    def __init__(self, text: str) -> None:
        self.entries: List[Tuple[str, str, int]] = []
        table = ""
        for number, line in enumerate(text.splitlines(), start=1):
            header = self.HEADER.match(line)
            if header:
                table = header.group(1)
                self.entries.append((table, "", number))
                continue
            assign = self.ASSIGN.match(line)
            if assign:
                self.entries.append((table, assign.group(1), number))

    def line(self, table: str, key: str = "") -> Optional[int]:
        for entry_table, entry_key, number in self.entries:
            if entry_table == table and entry_key == key:
                return number
        if key:
            return self.line(table)
        return None


@dataclass(frozen=True)
class DensitySpec:
    """Density f sampled at the atoms: a constant, a per-atom list or an expression in x0, x1."""

    kind: str = "constant"
    value: float = 1.0
    values: Tuple[float, ...] = ()
    expression: str = ""

    def __post_init__(self):
        if self.kind not in ("constant", "list", "expression"):
            raise ConfigError(f"density kind must be constant, list or expression, got {self.kind!r}")
        if self.kind == "expression":
            _parse_expression(self.expression)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def evaluate(self, locations: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.full(locations.shape[0], float(self.value))
        if self.kind == "list":
            values = np.asarray(self.values, dtype=float)
            if values.size != locations.shape[0]:
                raise ConfigError(f"density list has {values.size} values for {locations.shape[0]} atoms")
            return values
        scope = dict(_FUNCTIONS, **_CONSTANTS)
        for d in range(locations.shape[1]):
            scope[f"x{d}"] = locations[:, d]
        result = eval(compile(_parse_expression(self.expression), "<density>", "eval"),
                      {"__builtins__": {}}, scope)
        return np.broadcast_to(np.asarray(result, dtype=float), (locations.shape[0],)).copy()

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant {self.value:g}"
        if self.kind == "list":
            return f"list of {len(self.values)} values"
        return f"expression {self.expression}"


def _parse_expression(text: str) -> ast.Expression:
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"density expression does not parse: {exc.msg}")
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ConfigError(f"density expression may not use {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in _FUNCTIONS and node.id not in _CONSTANTS \
                and not re.fullmatch(r"x[01]", node.id):
            raise ConfigError(f"unknown name {node.id!r} in density expression")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCTIONS):
            raise ConfigError("density expression may only call sin, cos, exp, log, sqrt, abs, tanh")
    return tree


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A fully parsed and range-checked experiment."""

    label: str
    ifs: Optional[IFSMeasure] = None
    atomic: Optional[AtomicMeasure] = None
    atomic_alpha: Optional[float] = None
    density: DensitySpec = field(default_factory=DensitySpec)
    theorems: Tuple[TheoremId, ...] = (TheoremId.LOWER_BOUND_P,)
    p: float = 2.0
    L_grid: np.ndarray = field(default_factory=lambda: dyadic_grid(2.0, 4, 11))
    epsilons: np.ndarray = field(default_factory=lambda: epsilon_grid(3.0, 4, 7))
    epsilons_explicit: bool = False
    source_epsilons: Optional[np.ndarray] = None
    grid_fraction: float = 0.125
    depth: int = 10
    settings: QuadratureSettings = field(default_factory=QuadratureSettings)
    band_factor: float = 8.0
    ceiling: float = 1e6
    output_dir: Path = Path("out")
    seed: int = 0
    threads: Optional[int] = None
    frequencies: np.ndarray = field(default_factory=lambda: np.geomspace(1.0, 1e5, 200).reshape(-1, 1))
    mollifier_epsilons: Tuple[float, ...] = (0.5, 0.25, 0.125)
    chaos_samples: int = 0
    cell: float = 1.0 / 3.0
    deltas: np.ndarray = field(default_factory=lambda: 2.0 ** -np.arange(2, 9, dtype=float))
    lau_depth: int = 10
    source_text: str = ""

    @property
    def dim(self) -> int:
        return self.ifs.dim if self.ifs is not None else self.atomic.dim

    @property
    def alpha(self) -> float:
        return self.ifs.dimension_alpha if self.ifs is not None else float(self.atomic_alpha)

    def with_overrides(self, output_dir: Optional[Path] = None, threads: Optional[int] = None,
                       seed: Optional[int] = None, atom_budget: Optional[int] = None) -> "ExperimentConfig":
        """Apply command-line overrides on top of the file values."""
        changes: Dict[str, Any] = {}
        if output_dir is not None:
            changes["output_dir"] = Path(output_dir)
        if threads is not None:
            changes["threads"] = threads
        if seed is not None:
            changes["seed"] = seed
        if atom_budget is not None:
            if atom_budget < 1:
                raise ConfigError("--budget must be a positive atom count")
            changes["settings"] = dataclasses.replace(self.settings, atom_budget=atom_budget)
        if not changes:
            return self
        config = dataclasses.replace(self, **changes)
        chaos = self.ifs is not None and self.chaos_samples > 0
        if ("seed" in changes and chaos) or "settings" in changes:
            # a new seed draws a new chaos-game cloud; a new budget may admit the cylinders
            config = config.fit_to_resolution(self.requested_epsilons)
        return config

    @property
    def requested_epsilons(self) -> np.ndarray:
        return self.source_epsilons if self.source_epsilons is not None else self.epsilons

    def check_ranges(self, resolution: Optional[float] = None) -> None:
        """Validate p and alpha against every selected theorem before any computation.

        With a cloud resolution, the smallest epsilon must also lie above it.
        """
        index = _SourceIndex(self.source_text)
        problems = []
        for theorem in self.theorems:
            found = range_violations(theorem, self.p, self.dim, self.alpha)
            problems.extend(f"{theorem.value}: {text}" for text in found)
        if problems:
            raise ConfigError("; ".join(problems), index.line("theorem", "p"))
        if resolution is not None and self.epsilons[-1] <= resolution:
            raise ConfigError(
                f"epsilon {self.epsilons[-1]:g} is not above the cloud resolution {resolution:g} "
                f"of {self.label} at depth {self.depth}; lower epsilon.count or raise the depth",
                index.line("epsilon", "count") or index.line("epsilon", "start"),
            )

    def fit_to_resolution(self, requested: Optional[np.ndarray] = None) -> "ExperimentConfig":
        """Settle the epsilon grid against the resolution of the geometry cloud.

        Default grids are cut to the scales above the resolution; explicit
        grids are checked and rejected with their line when they go below it.
        """
        requested = self.epsilons if requested is None else requested
        try:
            resolution = cloud_resolution(self.geometry_cloud()[0])
        except AtomBudgetError as exc:
            # the run itself reports the budget; the grid stays as requested until then
            logger.warning("epsilon grid not fitted: %s", exc.message)
            return self
        if self.epsilons_explicit:
            config = dataclasses.replace(self, epsilons=requested)
        else:
            fitted = fit_epsilons(requested, resolution)
            if fitted.size < requested.size:
                logger.info("default epsilon grid cut to %d scales above the cloud resolution %.3g",
                            fitted.size, resolution)
            config = dataclasses.replace(self, epsilons=fitted, source_epsilons=requested)
        config.check_ranges(resolution)
        return config

    def base_measure(self) -> AtomicMeasure:
        """Cylinder atoms of the IFS at the configured depth, or the atomic measure itself."""
        if self.ifs is not None:
            return cylinder_approx(self.ifs, self.depth, self.settings.atom_budget)
        return self.atomic

    def geometry_cloud(self, base: Optional[AtomicMeasure] = None) -> Tuple[PointCloud, np.ndarray]:
        """Point cloud of the geometry stage and the mass carried by each point."""
        if self.ifs is not None and self.chaos_samples > 0:
            points = chaos_game_sample(self.ifs, self.chaos_samples, self.seed)
            return PointCloud(points), np.full(points.shape[0], 1.0 / points.shape[0])
        base = base if base is not None else self.base_measure()
        return PointCloud.from_measure(base), base.weights.real

    def weighted_measure(self, base: Optional[AtomicMeasure] = None) -> WeightedMeasure:
        base = base if base is not None else self.base_measure()
        try:
            return WeightedMeasure(base, self.density.evaluate(base.locations))
        except InvalidMeasureError as exc:
            raise ConfigError(exc.message, _SourceIndex(self.source_text).line("density"))

    def setups(self, measure: Optional[WeightedMeasure] = None) -> List[HardySetup]:
        measure = measure if measure is not None else self.weighted_measure()
        source = self.ifs if self.density.is_constant else None
        return [
            HardySetup(measure, self.p, theorem, self.L_grid, self.alpha, source, self.band_factor,
                       self.ceiling, self.settings, self.label)
            for theorem in self.theorems
        ]

    def describe(self) -> List[str]:
        """Resolved configuration as `key = value` lines."""
        s = self.settings
        lines = [f"measure.label = {self.label}"]
        if self.ifs is not None:
            lines.append(f"measure.kind = ifs ({len(self.ifs.maps)} maps, n = {self.ifs.dim})")
            lines.append(f"measure.ratios = {', '.join(f'{r:.17g}' for r in self.ifs.ratios)}")
            lines.append(f"measure.weights = {', '.join(f'{w:.17g}' for w in self.ifs.weights)}")
            lines.append(f"measure.osc_asserted = {self.ifs.osc_asserted}")
        else:
            lines.append(f"measure.kind = atomic ({self.atomic.size} atoms, n = {self.atomic.dim})")
        lines += [
            f"measure.alpha = {self.alpha:.17g}",
            f"density = {self.density.describe()}",
            f"theorem.ids = {', '.join(t.value for t in self.theorems)}",
            f"theorem.p = {self.p:.17g}",
            f"grid.L = {', '.join(f'{L:.17g}' for L in self.L_grid)}",
            f"epsilon.values = {', '.join(f'{e:.17g}' for e in self.epsilons)}",
            f"epsilon.grid_fraction = {self.grid_fraction:.17g}",
            f"quadrature.depth = {self.depth}",
        ]
        lines += [f"quadrature.{f.name} = {getattr(s, f.name)!r}" for f in dataclasses.fields(s)]
        lines += [
            f"verdict.band_factor = {self.band_factor:.17g}",
            f"verdict.ceiling = {self.ceiling:.17g}",
            f"output.directory = {self.output_dir}",
            f"run.seed = {self.seed}",
            f"fourier.count = {self.frequencies.shape[0]}",
            f"fourier.mollifier_epsilons = {', '.join(f'{e:.17g}' for e in self.mollifier_epsilons)}",
            f"geometry.samples = {self.chaos_samples}",
            f"geometry.cell = {self.cell:.17g}",
            f"asymptotics.deltas = {', '.join(f'{d:.17g}' for d in self.deltas)}",
            f"asymptotics.lau_depth = {self.lau_depth}",
        ]
        return lines


class ConfigLoader:
    """Reads a TOML experiment file into an ExperimentConfig, reporting errors by line."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.index = _SourceIndex(text)
        try:
            self.data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            line = getattr(exc, "lineno", None)
            if line is None:
                found = re.search(r"line (\d+)", str(exc))
                line = int(found.group(1)) if found else None
            raise ConfigError(f"invalid TOML: {str(exc).split(' (at')[0]}", line)

    @classmethod
    def from_path(cls, path: Path) -> "ConfigLoader":
        path = Path(path)
        logger.info("loading experiment configuration from %s", path)
        try:
            return cls(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}")

    def _error(self, message: str, table: str, key: str = "") -> ConfigError:
        return ConfigError(message, self.index.line(table, key))

    def _table(self, name: str) -> Dict[str, Any]:
        table = self.data.get(name, {})
        if not isinstance(table, dict):
            raise self._error(f"[{name}] must be a table", name)
        return table

    def _number(self, table: str, key: str, default, kind=float, low=None, high=None):
        raw = self._table(table).get(key, default)
        if raw is None:
            return None
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise self._error(f"{table}.{key} must be a number", table, key)
        if kind is int and float(raw) != int(raw):
            raise self._error(f"{table}.{key} must be an integer", table, key)
        value = kind(raw)
        if (low is not None and value < low) or (high is not None and value > high):
            raise self._error(f"{table}.{key} = {value} outside [{low}, {high}]", table, key)
        return value

    def _check_keys(self) -> None:
        for table, body in self.data.items():
            if table not in KNOWN_KEYS:
                raise self._error(f"unknown table [{table}]", table)
            for key in body:
                if key not in KNOWN_KEYS[table]:
                    raise self._error(f"unknown key {table}.{key}", table, key)
        for entry in self._table("measure").get("maps", []):
            for key in entry:
                if key not in KNOWN_KEYS["measure.maps"]:
                    raise self._error(f"unknown key measure.maps.{key}", "measure.maps", key)

    def load(self) -> ExperimentConfig:
        self._check_keys()
        if "measure" not in self.data:
            raise ConfigError("the [measure] table is required", 1)
        settings = self._settings()
        ifs, atomic, atomic_alpha, label = self._measure()
        n = ifs.dim if ifs is not None else atomic.dim
        m = len(ifs.maps) if ifs is not None else 1

        depth = self._number("quadrature", "depth", None, int, 0)
        if depth is None:
            depth = _auto_depth(m, AUTO_ATOMS) if ifs is not None else 0
        lau_depth = self._number("asymptotics", "lau_depth", None, int, 0)
        if lau_depth is None:
            lau_depth = depth if n == 1 else min(depth, _auto_depth(m, LAU_GRID_ATOMS))

        eps_defaults = (3.0, 4, 7) if n == 1 else (2.0, 3, 5)
        grid_defaults = (2.0, 4, 11) if n == 1 else (2.0, 3, 8)
        config = ExperimentConfig(
            label=label,
            ifs=ifs,
            atomic=atomic,
            atomic_alpha=atomic_alpha,
            density=self._density(),
            theorems=self._theorems(),
            p=self._number("theorem", "p", 2.0, float),
            L_grid=dyadic_grid(self._number("grid", "base", grid_defaults[0], float, 1.0 + 1e-9),
                               self._number("grid", "start", grid_defaults[1], int, 0),
                               self._number("grid", "count", grid_defaults[2], int, 1)),
            epsilons=epsilon_grid(self._number("epsilon", "base", eps_defaults[0], float, 1.0 + 1e-9),
                                  self._number("epsilon", "start", eps_defaults[1], int, 0),
                                  self._number("epsilon", "count", eps_defaults[2], int, 1)),
            epsilons_explicit=any(key in self._table("epsilon") for key in ("base", "start", "count")),
            grid_fraction=self._number("epsilon", "grid_fraction", 0.125, float, 1e-6, 0.25),
            depth=depth,
            settings=settings,
            band_factor=self._number("verdict", "band_factor", 8.0, float, 1.0),
            ceiling=self._number("verdict", "ceiling", 1e6, float, 0.0),
            output_dir=Path(self._table("output").get("directory", "out")),
            seed=self._number("run", "seed", 0, int, 0, 2 ** 64 - 1),
            threads=self._number("run", "threads", None, int, 1),
            frequencies=self._frequencies(n),
            mollifier_epsilons=self._float_list("fourier", "mollifier_epsilons", (0.5, 0.25, 0.125), 0.0, 1.0),
            chaos_samples=self._number("geometry", "samples", 0, int, 0),
            cell=self._number("geometry", "cell", 1.0 / 3.0 if n == 1 else 0.25, float, 1e-12),
            deltas=np.asarray(self._float_list("asymptotics", "deltas",
                                               tuple(2.0 ** -np.arange(2, 9, dtype=float)), 0.0, 1.0)),
            lau_depth=lau_depth,
            source_text=self.text,
        )
        config.check_ranges()
        return config.fit_to_resolution()

    def _settings(self) -> QuadratureSettings:
        q = "quadrature"
        defaults = QuadratureSettings()
        try:
            return QuadratureSettings(
                tol=self._number(q, "tol", defaults.tol, float),
                max_depth=self._number(q, "max_depth", defaults.max_depth, int),
                radial_samples=self._number(q, "radial_samples", defaults.radial_samples, int),
                samples_per_wavelength=self._number(q, "samples_per_wavelength",
                                                    defaults.samples_per_wavelength, int),
                angular_order=self._number(q, "angular_order", defaults.angular_order, int),
                beat_samples=self._number(q, "beat_samples", defaults.beat_samples, int),
                gaussian_cutoff=self._number(q, "gaussian_cutoff", defaults.gaussian_cutoff, float, 1.0),
                mollifier_cut=self._number(q, "mollifier_cut", defaults.mollifier_cut, float, 1e-15, 1.0),
                sample_cap=self._number(q, "sample_cap", defaults.sample_cap, int, 1024),
                atom_budget=self._number("run", "atom_budget", DEFAULT_ATOM_BUDGET, int, 1),
            )
        except ConfigError as exc:
            if exc.line is not None:
                raise
            raise self._error(exc.message, q)

    def _measure(self) -> Tuple[Optional[IFSMeasure], Optional[AtomicMeasure], Optional[float], str]:
        table = self._table("measure")
        kind = table.get("kind", "preset" if "preset" in table else "ifs")
        try:
            if kind == "preset":
                name = table.get("preset", "")
                if name not in PRESETS:
                    raise self._error(f"unknown preset {name!r}; expected one of: {', '.join(sorted(PRESETS))}",
                                      "measure", "preset")
                measure = preset(name)
                return measure, None, None, table.get("name", name)
            if kind == "ifs":
                measure = self._ifs(table)
                return measure, None, None, measure.name
            if kind == "atomic":
                return (None,) + self._atomic(table)
        except InvalidMeasureError as exc:
            raise self._error(exc.message, "measure")
        raise self._error(f"measure.kind must be preset, ifs or atomic, got {kind!r}", "measure", "kind")

    def _ifs(self, table: Dict[str, Any]) -> IFSMeasure:
        n = self._number("measure", "dimension", 1, int, 1, 2)
        entries = table.get("maps", [])
        if len(entries) < 2:
            raise self._error("an IFS needs at least two [[measure.maps]] entries", "measure")
        maps = []
        for entry in entries:
            translation = np.atleast_1d(np.asarray(entry.get("translation", [0.0] * n), dtype=float))
            if translation.shape != (n,):
                raise self._error(f"map translation must have {n} coordinates", "measure.maps", "translation")
            ratio = entry.get("ratio")
            if not isinstance(ratio, (int, float)):
                raise self._error("every map needs a numeric ratio", "measure.maps", "ratio")
            reflect = bool(entry.get("reflect", False))
            if n == 1:
                maps.append(Similitude.on_line(float(ratio), float(translation[0]), reflect))
            else:
                maps.append(Similitude.planar(float(ratio), float(entry.get("angle", 0.0)), translation, reflect))
        box = table.get("bounding_box")
        if box is None:
            raise self._error("measure.bounding_box = [[lo, hi], ...] is required for an IFS", "measure")
        box = np.asarray(box, dtype=float)
        if box.shape != (n, 2):
            raise self._error(f"bounding_box must list {n} [lo, hi] pairs", "measure", "bounding_box")
        return IFSMeasure.from_maps(maps, (box[:, 0], box[:, 1]), table.get("weights"),
                                    bool(table.get("osc", False)), table.get("name", "ifs"))

    def _atomic(self, table: Dict[str, Any]) -> Tuple[AtomicMeasure, float, str]:
        locations = np.asarray(table.get("locations", []), dtype=float)
        if locations.ndim == 1:
            locations = locations.reshape(-1, 1)
        raw = table.get("weights")
        if raw is None:
            weights = np.ones(locations.shape[0], dtype=complex)
        else:
            weights = np.asarray(raw, dtype=float)
            if weights.ndim == 2:
                weights = weights[:, 0] + 1j * weights[:, 1]
        alpha = table.get("alpha")
        if not isinstance(alpha, (int, float)):
            raise self._error("an atomic measure needs a numeric measure.alpha", "measure", "alpha")
        return AtomicMeasure(locations, weights), float(alpha), table.get("name", "atomic")

    def _density(self) -> DensitySpec:
        table = self._table("density")
        try:
            return DensitySpec(
                kind=table.get("kind", "constant"),
                value=self._number("density", "value", 1.0, float, 0.0),
                values=tuple(float(v) for v in table.get("values", ())),
                expression=str(table.get("expression", "")),
            )
        except ConfigError as exc:
            if exc.line is not None:
                raise
            raise self._error(exc.message, "density")

    def _theorems(self) -> Tuple[TheoremId, ...]:
        table = self._table("theorem")
        raw = table.get("ids", table.get("id", TheoremId.LOWER_BOUND_P.value))
        names = [raw] if isinstance(raw, str) else list(raw)
        if not names:
            raise self._error("theorem.ids must name at least one theorem", "theorem", "ids")
        key = "ids" if "ids" in table else "id"
        try:
            return tuple(TheoremId.parse(str(name)) for name in names)
        except ConfigError as exc:
            raise self._error(exc.message, "theorem", key)

    def _float_list(self, table: str, key: str, default, low: float, high: float) -> Tuple[float, ...]:
        raw = self._table(table).get(key, default)
        try:
            values = tuple(float(v) for v in raw)
        except (TypeError, ValueError):
            raise self._error(f"{table}.{key} must be a list of numbers", table, key)
        if not values or any(not low < v <= high for v in values):
            raise self._error(f"{table}.{key} values must lie in ({low:g}, {high:g}]", table, key)
        return values

    def _frequencies(self, n: int) -> np.ndarray:
        lo = self._number("fourier", "xi_min", 1.0, float, 1e-12)
        hi = self._number("fourier", "xi_max", 1e5, float, lo)
        count = self._number("fourier", "count", 200, int, 1)
        direction = np.asarray(self._table("fourier").get("direction", [1.0] + [0.0] * (n - 1)), dtype=float)
        if direction.shape != (n,) or not np.linalg.norm(direction) > 0:
            raise self._error(f"fourier.direction must be a nonzero {n}-vector", "fourier", "direction")
        return np.outer(np.geomspace(lo, hi, count), direction / np.linalg.norm(direction))


def _auto_depth(maps: int, atoms: int) -> int:
    """Largest depth whose maps^depth cylinders stay within the atom target."""
    if maps <= 1:
        return 0
    depth = 0
    while maps ** (depth + 1) <= atoms:
        depth += 1
    return depth


def fit_epsilons(epsilons: np.ndarray, resolution: float) -> np.ndarray:
    """Scales of a default grid that lie strictly above the cloud resolution.

    When fewer than two survive, the grid keeps its length and ratio but is
    moved up to start one ratio step above the resolution.
    """
    kept = epsilons[epsilons > resolution]
    if kept.size >= min(2, epsilons.size):
        return kept
    ratio = epsilons[0] / epsilons[1] if epsilons.size > 1 else 2.0
    return resolution * ratio ** np.arange(epsilons.size, 0, -1, dtype=float)


def load_config(path: Path) -> ExperimentConfig:
    """Parse and validate an experiment file.

    Raises:
        ConfigError: With the offending line when parsing or a range check fails
    """
    try:
        return ConfigLoader.from_path(path).load()
    except LabError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed configuration: {exc}")
