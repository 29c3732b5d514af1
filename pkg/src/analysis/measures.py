import logging
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from src.core.errors import AtomBudgetError, InvalidMeasureError
from src.models.atomic_measure import AtomicMeasure
from src.models.ifs_measure import IFSMeasure
from src.models.settings import DEFAULT_ATOM_BUDGET
from src.models.similitude import Similitude

logger = logging.getLogger(__name__)

BURN_IN = 64
DIMENSION_XTOL = 1e-14


def similarity_dimension(maps: Sequence[Similitude]) -> float:
    """Solve the Moran equation sum_j s_j^alpha = 1 by bisection.

    Args:
        maps: At least two similitudes with ratios in (0, 1)

    Returns:
        The unique alpha > 0 balancing the contraction ratios

    Raises:
        InvalidMeasureError: If fewer than two maps are given or a ratio is out of range
    """
    ratios = np.array([s.ratio if isinstance(s, Similitude) else float(s) for s in maps])
    if ratios.size < 2:
        raise InvalidMeasureError("the Moran equation needs at least two maps")
    if np.any(ratios <= 0) or np.any(ratios >= 1):
        raise InvalidMeasureError("every contraction ratio must lie in (0,1)")

    def residual(alpha: float) -> float:
        return float(np.sum(ratios ** alpha) - 1.0)

    # residual(0) = m - 1 > 0 and the residual is strictly decreasing
    upper = 1.0
    while residual(upper) > 0:
        upper *= 2.0
    return bisect(residual, 0.0, upper, xtol=DIMENSION_XTOL, maxiter=500)


def cylinder_approx(measure: IFSMeasure, depth: int,
                    atom_budget: int = DEFAULT_ATOM_BUDGET) -> AtomicMeasure:
    """Discretise an IFS measure at its depth-`depth` cylinders.

    One atom per word w of length depth, placed at S_w(x0) with x0 the fixed
    point of the first map and weighted by the product of the word's weights.
    Words are ordered lexicographically, so block j of level d+1 is level d
    pushed through S_j.

    Raises:
        AtomBudgetError: If m^depth exceeds atom_budget
    """
    if depth < 0:
        raise InvalidMeasureError(f"cylinder depth must be nonnegative, got {depth}")
    m = len(measure.maps)
    if m ** depth > atom_budget:
        raise AtomBudgetError(
            f"depth {depth} needs {m}^{depth} = {m ** depth} atoms, over the budget of {atom_budget};"
            " reduce the depth"
        )
    points = measure.base_point().reshape(1, -1)
    weights = np.ones(1)
    for _ in range(depth):
        points = np.concatenate([s.apply(points) for s in measure.maps])
        weights = np.concatenate([p * weights for p in measure.weights])
    logger.debug("built %d cylinder atoms at depth %d for %s", weights.size, depth, measure.name)
    return AtomicMeasure(points, weights.astype(complex))


def chaos_game_sample(measure: IFSMeasure, count: int, seed: int) -> np.ndarray:
    """Sample the invariant measure with the chaos game.

    The orbit starts at the fixed point of the first map and the first BURN_IN
    iterates are discarded. Output is a (count, n) array determined by seed.
    """
    if count < 1:
        raise InvalidMeasureError("chaos game needs count >= 1")
    rng = np.random.default_rng(int(seed) % 2 ** 64)
    choices = rng.choice(len(measure.maps), size=count + BURN_IN, p=measure.weights)
    linear = np.stack([s.linear_part for s in measure.maps])
    shifts = np.stack([s.translation for s in measure.maps])

    x = measure.base_point()
    samples = np.empty((count, measure.dim))
    for step, j in enumerate(choices):
        x = linear[j] @ x + shifts[j]
        if step >= BURN_IN:
            samples[step - BURN_IN] = x
    return samples


