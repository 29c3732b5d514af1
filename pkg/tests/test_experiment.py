from pathlib import Path

import pandas as pd
import pytest
from click.testing import CliRunner

from main import main
from src.core.config_loader import ConfigLoader
from src.core.experiment import Experiment

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

CANTOR = """
[measure]
preset = "cantor"

[theorem]
id = "lower_bound_p"
p = 2.5

[quadrature]
depth = 8

[grid]
start = 4
count = 5

[epsilon]
count = 4

[fourier]
count = 20
xi_max = 1000.0
mollifier_epsilons = [0.5]

[asymptotics]
deltas = [0.25, 0.125, 0.0625]
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def cantor_config(tmp_path):
    path = tmp_path / "cantor.toml"
    path.write_text(CANTOR, encoding="utf-8")
    return path


def invoke(runner, *args):
    return runner.invoke(main, [str(arg) for arg in args])


def read_csv(path):
    return pd.read_csv(path, comment="#")


def test_single_atom_verify(runner, tmp_path):
    out = tmp_path / "out"
    result = invoke(runner, "verify", "--config", CONFIG_DIR / "discrete_hardy_single_atom.toml", "--out", out)
    assert result.exit_code == 0, result.output
    verdict = read_csv(out / "discrete_hardy" / "verdict.csv")
    assert verdict["empirical_C"][0] == pytest.approx(0.5)
    assert bool(verdict["passed"][0])
    assert (out / "discrete_hardy" / "verdict.txt").read_text(encoding="utf-8").startswith("# theorem: discrete_hardy")
    assert "✅" in result.output


def test_invalid_p_exits_with_config_error(runner, tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(CANTOR.replace('"lower_bound_p"', '"fractal_hardy"').replace("p = 2.5", "p = 3"),
                    encoding="utf-8")
    result = invoke(runner, "verify", "--config", path, "--out", tmp_path / "out")
    assert result.exit_code == 2
    assert "p in [1,2]" in result.output
    assert not (tmp_path / "out").exists()


def test_missing_config_file(runner, tmp_path):
    result = invoke(runner, "verify", "--config", tmp_path / "absent.toml")
    assert result.exit_code == 2
    assert "cannot read" in result.output


def test_cantor_verify_writes_series(runner, tmp_path, cantor_config):
    out = tmp_path / "out"
    result = invoke(runner, "verify", "--config", cantor_config, "--out", out)
    assert result.exit_code == 0, result.output
    series = read_csv(out / "lower_bound_p" / "series.csv")
    assert list(series.columns) == ["L", "value", "running_min_tail", "running_max_tail"]
    assert len(series) == 5
    assert series["L"].iloc[0] == 16.0
    meta = (out / "meta.txt").read_text(encoding="utf-8")
    assert "# command: verify" in meta and "theorem.p = 2.5" in meta


def test_output_is_thread_independent(runner, tmp_path, cantor_config):
    for threads in (1, 4):
        result = invoke(runner, "verify", "--config", cantor_config, "--out", tmp_path / f"t{threads}",
                        "--threads", threads)
        assert result.exit_code == 0, result.output
    for name in ("series.csv", "verdict.csv"):
        serial = (tmp_path / "t1" / "lower_bound_p" / name).read_bytes()
        threaded = (tmp_path / "t4" / "lower_bound_p" / name).read_bytes()
        assert serial == threaded, f"{name} differs between 1 and 4 threads"


def test_atom_budget_exit_code(runner, tmp_path, cantor_config):
    result = invoke(runner, "verify", "--config", cantor_config, "--out", tmp_path / "out", "--budget", 10)
    assert result.exit_code == 3
    assert "error:" in result.output


def test_dimension_command(runner, tmp_path, cantor_config):
    out = tmp_path / "out"
    result = invoke(runner, "dimension", "--config", cantor_config, "--out", out)
    assert result.exit_code == 0, result.output
    frame = read_csv(out / "dimension.csv")
    assert frame["alpha"][0] == pytest.approx(0.6309297535714574, abs=1e-12)
    assert frame["maps"][0] == 2


def test_threads_from_environment(runner, tmp_path, cantor_config, monkeypatch):
    monkeypatch.setenv("FFLAB_THREADS", "3")
    out = tmp_path / "out"
    result = invoke(runner, "dimension", "--config", cantor_config, "--out", out)
    assert result.exit_code == 0, result.output
    assert "# threads: 3" in (out / "meta.txt").read_text(encoding="utf-8")


def test_flag_beats_environment(runner, tmp_path, cantor_config, monkeypatch):
    monkeypatch.setenv("FFLAB_THREADS", "3")
    out = tmp_path / "out"
    invoke(runner, "dimension", "--config", cantor_config, "--out", out, "--threads", 2)
    assert "# threads: 2" in (out / "meta.txt").read_text(encoding="utf-8")


def test_geometry_command(runner, tmp_path, cantor_config):
    out = tmp_path / "out"
    result = invoke(runner, "geometry", "--config", cantor_config, "--out", out)
    assert result.exit_code == 0, result.output
    frame = read_csv(out / "geometry.csv")
    assert len(frame) == 4
    assert frame["packing_bounds_ok"].all() and frame["volume_bounds_ok"].all()
    assert (read_csv(out / "cell_ratios.csv")["ratio"] > 0).all()


def test_all_stages(runner, tmp_path, cantor_config):
    out = tmp_path / "out"
    result = invoke(runner, "all", "--config", cantor_config, "--out", out)
    assert result.exit_code == 0, result.output
    for name in ("dimension.csv", "geometry.csv", "cell_ratios.csv", "fourier.csv", "mollifier.csv",
                 "norms.csv", "hardy.csv", "lower_bound_p/series.csv", "lower_bound_p/verdict.csv", "meta.txt"):
        assert (out / name).exists(), f"{name} missing after 'all'"
    fourier = read_csv(out / "fourier.csv")
    assert (fourier["difference"] <= fourier["bound"]).all()


def test_experiment_reuses_rhs_between_stages(tmp_path):
    config = ConfigLoader(CANTOR).load().with_overrides(output_dir=tmp_path)
    experiment = Experiment(config, threads=1)
    asymptotic = experiment.run("asymptotics")
    verified = experiment.run("verify")
    assert verified.series[config.theorems[0]] is asymptotic.series[config.theorems[0]]
    assert verified.exit_code == 0


def test_unknown_command_rejected(tmp_path):
    experiment = Experiment(ConfigLoader(CANTOR).load(), threads=1)
    with pytest.raises(ValueError):
        experiment.run("plot")


def test_verify_notes_carry_the_cell_ratios(runner, tmp_path, cantor_config):
    out = tmp_path / "out"
    result = invoke(runner, "verify", "--config", cantor_config, "--out", out)
    assert result.exit_code == 0, result.output
    text = (out / "lower_bound_p" / "verdict.txt").read_text(encoding="utf-8")
    assert "ratio min = " in text and "max = " in text
    assert "cell_ratios.csv" not in text
    assert not (out / "cell_ratios.csv").exists()


def test_meta_starts_with_the_run_header(runner, tmp_path, cantor_config):
    out = tmp_path / "out"
    result = invoke(runner, "dimension", "--config", cantor_config, "--out", out)
    assert result.exit_code == 0, result.output
    lines = (out / "meta.txt").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# theorem: lower_bound_p"
    assert lines[1].startswith("# measure: cantor (n = 1, alpha = ")
    assert lines[2].startswith("# p = 2.5, depth = 8")


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_config_runs_every_stage(runner, tmp_path, path):
    out = tmp_path / "out"
    result = invoke(runner, "all", "--config", path, "--out", out)
    assert result.exit_code == 0, result.output
    for name in ("dimension.csv", "geometry.csv", "cell_ratios.csv", "fourier.csv", "mollifier.csv",
                 "hardy.csv", "meta.txt"):
        assert (out / name).exists(), f"{name} missing after 'all' on {path.name}"
    assert read_csv(out / "geometry.csv")["volume_bounds_ok"].all()
