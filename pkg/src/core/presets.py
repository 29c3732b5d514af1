"""Canonical self-similar measures, selectable by name from configs and tests."""

from typing import Callable, Dict

import numpy as np

from src.core.errors import ConfigError
from src.models.ifs_measure import IFSMeasure
from src.models.similitude import Similitude


def cantor() -> IFSMeasure:
    """Middle-thirds Cantor measure: x/3 and x/3 + 2/3 with weights 1/2."""
    maps = [Similitude.on_line(1 / 3, 0.0), Similitude.on_line(1 / 3, 2 / 3)]
    return IFSMeasure.from_maps(maps, ([0.0], [1.0]), osc_asserted=True, name="cantor")


def two_scale_cantor() -> IFSMeasure:
    """Ratios 1/2 and 1/4 on [0, 1], weighted by ratio^alpha."""
    maps = [Similitude.on_line(1 / 2, 0.0), Similitude.on_line(1 / 4, 3 / 4)]
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    # 2^-alpha = golden solves t + t^2 = 1, so the natural weights are (t, t^2)
    return IFSMeasure.from_maps(maps, ([0.0], [1.0]), weights=[golden, 1.0 - golden],
                                osc_asserted=True, name="two_scale_cantor")


def four_corner() -> IFSMeasure:
    """Planar four-corner Cantor dust: ratio 1/4 at the corners of the unit square."""
    corners = [(0.0, 0.0), (0.75, 0.0), (0.0, 0.75), (0.75, 0.75)]
    maps = [Similitude.planar(0.25, 0.0, corner) for corner in corners]
    return IFSMeasure.from_maps(maps, ([0.0, 0.0], [1.0, 1.0]), osc_asserted=True, name="four_corner")


def sierpinski_gasket() -> IFSMeasure:
    height = np.sqrt(3.0) / 2.0
    shifts = [(0.0, 0.0), (0.5, 0.0), (0.25, height / 2.0)]
    maps = [Similitude.planar(0.5, 0.0, shift) for shift in shifts]
    return IFSMeasure.from_maps(maps, ([0.0, 0.0], [1.0, height]), osc_asserted=True,
                                name="sierpinski_gasket")


PRESETS: Dict[str, Callable[[], IFSMeasure]] = {
    "cantor": cantor,
    "two_scale_cantor": two_scale_cantor,
    "four_corner": four_corner,
    "sierpinski_gasket": sierpinski_gasket,
}


def preset(name: str) -> IFSMeasure:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; expected one of: {', '.join(sorted(PRESETS))}")
