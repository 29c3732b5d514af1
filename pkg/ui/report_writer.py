import logging
from importlib import metadata
from pathlib import Path
from typing import List, Sequence

import pandas as pd

from src import __version__
from src.core.config_loader import ExperimentConfig
from src.core.experiment import ExperimentResults, Table
from src.models.series import AsymptoticSeries
from src.models.verdict import TheoremId, VerdictReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
LIBRARIES = ("numpy", "scipy", "pandas", "click")


class ReportWriter:
    """Writes experiment artifacts under one output directory.

    CSV files start with '#' comment lines and print floats with 17 significant
    digits, so identical results give byte-identical files.
    """

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)

    def _csv(self, path: Path, frame: pd.DataFrame, header: Sequence[str]) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            for line in header:
                handle.write(f"# {line}\n")
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.debug("wrote %s (%d rows)", path, len(frame))
        return path

    def write_table(self, table: Table) -> Path:
        return self._csv(self.out_dir / f"{table.name}.csv", table.frame, table.header)

    def write_series(self, theorem: TheoremId, series: AsymptoticSeries, header: Sequence[str]) -> Path:
        lows, highs = series.running_tail_bands()
        frame = pd.DataFrame({"L": series.L_values, "value": series.values,
                              "running_min_tail": lows, "running_max_tail": highs})
        lines = list(header) + [f"series: {series.name}, k = {series.exponent_k:.17g}, p = {series.p:.17g}"]
        lines[0] = f"theorem: {theorem.value}"
        return self._csv(self.out_dir / theorem.value / "series.csv", frame, lines)

    def write_verdict(self, report: VerdictReport, header: Sequence[str]) -> List[Path]:
        lines = list(header)
        lines[0] = f"theorem: {report.theorem_id.value}"
        folder = self.out_dir / report.theorem_id.value
        csv_path = self._csv(folder / "verdict.csv", pd.DataFrame([report.to_row()]), lines)
        text_path = folder / "verdict.txt"
        text_path.write_text("".join(f"# {line}\n" for line in lines) + report.to_text(), encoding="utf-8")
        return [csv_path, text_path]

    def write_meta(self, config: ExperimentConfig, results: ExperimentResults, header: Sequence[str]) -> Path:
        path = self.out_dir / "meta.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# {line}" for line in header]
        lines += [f"# fractal-fourier-lab {__version__}", f"# command: {results.command}",
                 f"# threads: {results.threads}"]
        lines += [f"# {name} {metadata.version(name)}" for name in LIBRARIES]
        lines += config.describe()
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def write_all(self, config: ExperimentConfig, results: ExperimentResults, header: Sequence[str]) -> List[Path]:
        """Every artifact of one run; returns the written paths."""
        logger.info("writing artifacts to %s", self.out_dir)
        paths = [self.write_table(table) for table in results.tables]
        for theorem, series in results.series.items():
            paths.append(self.write_series(theorem, series, header))
        for report in results.verdicts:
            paths.extend(self.write_verdict(report, header))
        paths.append(self.write_meta(config, results, header))
        return paths
