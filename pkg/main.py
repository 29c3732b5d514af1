"""Command-line entry point of the fractal Fourier lab."""

import functools
import logging
import sys
from pathlib import Path
from typing import Optional

import click

from src import __version__
from src.core.config_loader import ExperimentConfig, load_config
from src.core.errors import LabError
from src.core.experiment import Experiment
from ui.report_writer import ReportWriter
from ui.summary_view import render_summary

logger = logging.getLogger("fflab")


def run_experiment(config: ExperimentConfig, command: str = "verify", threads: Optional[int] = None) -> int:
    """Run one subcommand, write its artifacts and return the process exit code.

    0 when every verdict passed (or none was requested), 1 for an unstable or
    failed verdict. LabError subclasses propagate with their own exit codes.
    """
    experiment = Experiment(config, threads, _log_progress)
    results = experiment.run(command)
    ReportWriter(config.output_dir).write_all(config, results, experiment.header())
    for line in render_summary(results):
        click.echo(line)
    return results.exit_code


def _log_progress(done: int, total: int) -> None:
    logger.debug("progress %d/%d", done, total)


def experiment_options(fn):
    @click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False, path_type=Path),
                  help="TOML experiment configuration")
    @click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
                  help="Output directory (overrides [output] directory)")
    @click.option("--threads", type=click.IntRange(min=1), default=None,
                  help="Worker threads (overrides FFLAB_THREADS and [run] threads)")
    @click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None, help="Random seed (u64)")
    @click.option("--budget", type=click.IntRange(min=1), default=None, help="Maximum number of atoms")
    @functools.wraps(fn)
    def wrapper(config_path, out_dir, threads, seed, budget, **kwargs):
        try:
            config = load_config(config_path).with_overrides(out_dir, None, seed, budget)
            code = run_experiment(config, click.get_current_context().command.name, threads)
        except LabError as exc:
            click.echo(f"error: {exc.message}", err=True)
            sys.exit(exc.exit_code)
        sys.exit(code)

    return wrapper


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Debug logging")
def main(verbose: bool):
    """Fourier asymptotics of self-similar and atomic measures."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


@main.command()
@experiment_options
def dimension():
    """Solve the Moran equation for the similarity dimension."""


@main.command()
@experiment_options
def geometry():
    """Minkowski contents, covering and packing numbers."""


@main.command()
@experiment_options
def fourier():
    """Transform sweep: exact self-similar vs cylinder atoms, plus mollified L2 norms."""


@main.command()
@experiment_options
def asymptotics():
    """Right-hand asymptotic series and sup-type norms only."""


@main.command()
@experiment_options
def hardy():
    """Left-hand Hardy-type functionals only."""


@main.command()
@experiment_options
def verify():
    """Full verdicts for every selected theorem."""


@main.command(name="all")
@experiment_options
def all_():
    """Every stage in order."""


if __name__ == "__main__":
    main()
