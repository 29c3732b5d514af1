import threading
from pathlib import Path

import numpy as np
import pytest

from src.core.config_loader import ConfigLoader, DensitySpec, _auto_depth, fit_epsilons, load_config
from src.core.errors import ConfigError
from src.models.verdict import TheoremId

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
LOAD_SECONDS = 60.0

CANTOR = """
[measure]
kind = "preset"
preset = "cantor"

[theorem]
id = "lower_bound_p"
p = 2.5

[quadrature]
depth = 8
"""


def load(text):
    return ConfigLoader(text).load()


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    loaded = []
    worker = threading.Thread(target=lambda: loaded.append(load_config(path)), daemon=True)
    worker.start()
    worker.join(LOAD_SECONDS)
    assert not worker.is_alive(), f"{path.name} did not load within {LOAD_SECONDS:g} s"
    config = loaded[0]
    assert config.theorems
    assert config.L_grid.size >= 2
    assert config.epsilons.size >= 1


def test_defaults_for_a_preset():
    config = load(CANTOR)
    assert config.label == "cantor"
    assert config.theorems == (TheoremId.LOWER_BOUND_P,)
    assert config.alpha == pytest.approx(np.log(2) / np.log(3))
    assert config.L_grid[0] == 16.0 and config.L_grid.size == 11
    assert config.depth == 8
    assert config.base_measure().size == 256


def test_auto_depth_fits_the_atom_target():
    config = load('[measure]\npreset = "four_corner"\n')
    assert config.depth == 6
    assert config.lau_depth == 5


def test_explicit_ifs_and_maps():
    text = """
[measure]
kind = "ifs"
dimension = 1
bounding_box = [[0.0, 1.0]]

[[measure.maps]]
ratio = 0.3333333333333333
translation = [0.0]

[[measure.maps]]
ratio = 0.3333333333333333
translation = [0.6666666666666666]
"""
    config = load(text)
    assert len(config.ifs.maps) == 2
    assert config.alpha == pytest.approx(np.log(2) / np.log(3), abs=1e-12)


def test_syntax_error_has_line():
    with pytest.raises(ConfigError) as info:
        load('[measure]\nkind = \n')
    assert info.value.line == 2
    assert "line 2" in str(info.value)


def test_unknown_key_is_located():
    with pytest.raises(ConfigError) as info:
        load(CANTOR + "\n[grid]\nbase = 2\nsteps = 4\n")
    assert "grid.steps" in info.value.message
    assert info.value.line == CANTOR.count("\n") + 4


def test_hardy_range_checked_before_running():
    text = CANTOR.replace('id = "lower_bound_p"', 'id = "fractal_hardy"').replace("p = 2.5", "p = 3")
    with pytest.raises(ConfigError, match=r"p in \[1,2\]") as info:
        load(text)
    assert info.value.line == text.splitlines().index("p = 3") + 1
    assert info.value.exit_code == 2


def test_lower_bound_range():
    with pytest.raises(ConfigError, match="2n/alpha"):
        load(CANTOR.replace("p = 2.5", "p = 3.5"))


def test_unknown_theorem():
    with pytest.raises(ConfigError, match="unknown theorem"):
        load(CANTOR.replace("lower_bound_p", "riesz"))


def test_unknown_preset_is_located():
    with pytest.raises(ConfigError, match="unknown preset") as info:
        load(CANTOR.replace('"cantor"', '"koch"'))
    assert info.value.line == 4


def test_atomic_complex_weights():
    text = """
[measure]
kind = "atomic"
locations = [1.0, 2.0]
weights = [[1.0, 0.0], [0.0, -2.0]]
alpha = 0.0

[theorem]
id = "discrete_hardy"
p = 2.0
"""
    config = load(text)
    assert config.atomic.weights == pytest.approx([1.0, -2.0j])


def test_density_expression():
    spec = DensitySpec(kind="expression", expression="1 + x0 * x0")
    assert spec.evaluate(np.array([[0.0], [2.0]])) == pytest.approx([1.0, 5.0])
    assert DensitySpec(kind="expression", expression="2").evaluate(np.zeros((3, 1))) == pytest.approx([2.0] * 3)


@pytest.mark.parametrize("expression", ["__import__('os')", "x0.real", "open('f')", "x7", "[x0]"])
def test_density_expression_whitelist(expression):
    with pytest.raises(ConfigError):
        DensitySpec(kind="expression", expression=expression)


def test_density_list_must_match_atoms():
    config = load(CANTOR + '\n[density]\nkind = "list"\nvalues = [1.0, 2.0]\n')
    with pytest.raises(ConfigError, match="density list"):
        config.weighted_measure()


def test_negative_density_is_rejected():
    config = load(CANTOR + '\n[density]\nkind = "expression"\nexpression = "x0 - 0.5"\n')
    with pytest.raises(ConfigError):
        config.weighted_measure()


def test_overrides():
    config = load(CANTOR).with_overrides(Path("elsewhere"), 3, 11, 64)
    assert config.output_dir == Path("elsewhere")
    assert config.threads == 3 and config.seed == 11
    assert config.settings.atom_budget == 64


def test_describe_lists_resolved_values():
    lines = load(CANTOR).describe()
    assert "theorem.p = 2.5" in lines
    assert any(line.startswith("quadrature.tol = ") for line in lines)


def test_missing_measure():
    with pytest.raises(ConfigError, match=r"\[measure\]"):
        load('[theorem]\np = 2.0\n')


def test_auto_depth_of_a_single_map():
    assert _auto_depth(1, 4096) == 0
    assert _auto_depth(2, 4096) == 12
    assert _auto_depth(4, 4096) == 6


def test_atomic_measure_without_depth_loads():
    text = '[measure]\nkind = "atomic"\nlocations = [1.0, 2.0, 3.0]\nalpha = 0.0\n\n[theorem]\nid = "discrete_hardy"\n'
    config = load(text)
    assert config.depth == 0 and config.lau_depth == 0


def test_default_epsilons_stay_above_the_cloud_resolution():
    config = load(CANTOR.replace("depth = 8", "depth = 10"))
    resolution = 2.0 * 3.0 ** -10
    assert config.epsilons[-1] > resolution
    assert config.epsilons == pytest.approx(3.0 ** -np.arange(4, 10, dtype=float))


def test_explicit_epsilons_below_the_resolution_are_located():
    text = CANTOR.replace("depth = 8", "depth = 10") + "\n[epsilon]\ncount = 7\n"
    with pytest.raises(ConfigError, match="cloud resolution") as info:
        load(text)
    assert info.value.line == text.splitlines().index("count = 7") + 1
    assert info.value.exit_code == 2


def test_widely_spaced_atoms_get_epsilons_above_their_gap():
    config = load_config(CONFIG_DIR / "discrete_hardy_harmonic.toml")
    assert config.epsilons.size == 7
    assert config.epsilons[-1] > 1.0
    assert np.all(np.diff(config.epsilons) < 0)


def test_fit_epsilons_keeps_a_fine_enough_grid():
    grid = 3.0 ** -np.arange(4, 11, dtype=float)
    assert fit_epsilons(grid, 0.0) == pytest.approx(grid)
    assert fit_epsilons(grid, 2.0 * 3.0 ** -8).size == 4
