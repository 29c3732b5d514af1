import logging
from typing import Dict, Optional, Protocol, Tuple, Union

import numpy as np

from src.analysis import mollifier
from src.analysis.quadrature import radial_integral, radial_nodes, sphere_nodes
from src.core.errors import BudgetExceededError, DepthExceededError, InvalidMeasureError
from src.models.atomic_measure import AtomicMeasure, WeightedMeasure
from src.models.ifs_measure import IFSMeasure
from src.models.settings import QuadratureSettings, TransformRequest

logger = logging.getLogger(__name__)

CHUNK_ELEMENTS = 2 ** 22
COMMUTE_TOL = 1e-12
NODE_BUDGET = 2 ** 20
RECURSION_CHUNK = 2048


class FourierHandle(Protocol):
    """Anything that evaluates a measure's transform on an (M, n) frequency array."""

    dim: int
    spread: float

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        ...


def _as_frequencies(xi: np.ndarray, dim: int) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1 and dim == 1:
        xi = xi.reshape(-1, 1)
    if xi.ndim == 1:
        xi = xi.reshape(1, -1)
    if xi.shape[1] != dim:
        raise InvalidMeasureError(f"frequencies must have {dim} coordinates, got {xi.shape[1]}")
    return xi


def _phases(xi: np.ndarray, points: np.ndarray) -> np.ndarray:
    # <xi, a> summed coordinate by coordinate, so every entry is bit-reproducible
    phase = xi[:, None, 0] * points[None, :, 0]
    for d in range(1, xi.shape[1]):
        phase = phase + xi[:, None, d] * points[None, :, d]
    return phase


class AtomicTransform:
    """Direct sum over atoms: sum_k w_k exp(-i <a_k, xi>)."""

    def __init__(self, measure: Union[AtomicMeasure, WeightedMeasure], sign: float = -1.0):
        if isinstance(measure, WeightedMeasure):
            self.locations = measure.base.locations
            self.weights = measure.effective_weights
            self.spread = measure.base.spread
        else:
            self.locations = measure.locations
            self.weights = measure.weights
            self.spread = measure.spread
        self.dim = self.locations.shape[1]
        self.sign = sign

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        xi = _as_frequencies(xi, self.dim)
        out = np.empty(xi.shape[0], dtype=complex)
        rows = max(1, CHUNK_ELEMENTS // self.locations.shape[0])
        for start in range(0, xi.shape[0], rows):
            phase = _phases(xi[start:start + rows], self.locations)
            out[start:start + rows] = np.sum(np.exp(1j * self.sign * phase) * self.weights, axis=1)
        return out


class SelfSimilarTransform:
    """Transform of an IFS measure through mu^(xi) = sum_j p_j e^{-i<b_j, xi>} mu^(s_j R_j^T xi).

    Branches stop once s_w |xi| r <= tol, where r bounds |x| on the attractor,
    and return 1; since |mu^(eta) - 1| <= |eta| r the error is at most tol.
    With one common ratio and rotation the recursion is a product; with
    commuting rotations it is memoised on how often each map was used.
    """

    def __init__(self, measure: IFSMeasure, tol: float = 1e-12, max_depth: int = 200,
                 node_budget: int = NODE_BUDGET):
        if tol <= 0 or max_depth < 1:
            raise InvalidMeasureError("transform needs tol > 0 and max_depth >= 1")
        self.measure = measure
        self.tol = tol
        self.max_depth = max_depth
        self.node_budget = node_budget
        self.dim = measure.dim
        self.spread = measure.box_diameter
        self.radius = max(measure.box_diameter, float(np.max(np.linalg.norm(measure.box_corners, axis=1))))
        self.ratios = measure.ratios
        self.rotations = np.stack([s.rotation for s in measure.maps])
        self.shifts = np.stack([s.translation for s in measure.maps])
        self.weights = measure.weights

        same_ratio = bool(np.all(self.ratios == self.ratios[0]))
        same_rotation = bool(np.all(np.abs(self.rotations - self.rotations[0]) <= COMMUTE_TOL))
        if same_ratio and same_rotation:
            self.mode = "product"
        elif self._rotations_commute():
            self.mode = "memo"
        else:
            self.mode = "tree"
        logger.debug("self-similar transform of %s uses the %s recursion", measure.name, self.mode)

    def _rotations_commute(self) -> bool:
        for a in self.rotations:
            for b in self.rotations:
                if np.max(np.abs(a @ b - b @ a)) > COMMUTE_TOL:
                    return False
        return True

    def _levels_needed(self, norm: float, ratio: float) -> int:
        if norm * self.radius <= self.tol:
            return 0
        return int(np.ceil(np.log(self.tol / (norm * self.radius)) / np.log(ratio)))

    def _multiplier(self, eta: np.ndarray) -> np.ndarray:
        return np.sum(np.exp(-1j * _phases(eta, self.shifts)) * self.weights, axis=1)

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        xi = _as_frequencies(xi, self.dim)
        if xi.shape[0] == 0:
            return np.empty(0, dtype=complex)
        if self.mode == "product":
            return self._product(xi)
        recurse = self._memoised if self.mode == "memo" else self._tree
        return np.concatenate([recurse(xi[start:start + RECURSION_CHUNK])
                               for start in range(0, xi.shape[0], RECURSION_CHUNK)])

    def _threshold(self, xi: np.ndarray) -> float:
        scale = float(np.linalg.norm(xi, axis=1).max()) * self.radius
        return self.tol / scale if scale > 0 else np.inf

    def _product(self, xi: np.ndarray) -> np.ndarray:
        s = float(self.ratios[0])
        rotation = self.rotations[0]
        norms = np.linalg.norm(xi, axis=1)
        levels = self._levels_needed(float(norms.max()), s)
        if levels > self.max_depth:
            raise DepthExceededError(
                f"|xi| = {norms.max():g} needs {levels} levels, over max_depth {self.max_depth}"
            )
        result = np.ones(xi.shape[0], dtype=complex)
        eta = xi.copy()
        scale = norms * self.radius
        for _ in range(levels):
            active = scale > self.tol
            result = np.where(active, result * self._multiplier(eta), result)
            eta = s * (eta @ rotation)
            scale = scale * s
        return result

    def _memoised(self, xi: np.ndarray) -> np.ndarray:
        threshold = self._threshold(xi)
        memo: Dict[Tuple[int, ...], np.ndarray] = {}
        m = len(self.ratios)
        identity = np.eye(self.dim)

        def value(counts: Tuple[int, ...], factor: float, rotation: np.ndarray) -> np.ndarray:
            if counts in memo:
                return memo[counts]
            if factor <= threshold:
                return 1.0
            depth = sum(counts)
            if depth >= self.max_depth:
                raise DepthExceededError(f"recursion reached max_depth {self.max_depth} before converging")
            if len(memo) >= self.node_budget:
                raise BudgetExceededError(f"memoised recursion exceeded {self.node_budget} states")
            eta = factor * (xi @ rotation)
            phases = np.exp(-1j * _phases(eta, self.shifts))
            total = np.zeros(xi.shape[0], dtype=complex)
            for j in range(m):
                child = counts[:j] + (counts[j] + 1,) + counts[j + 1:]
                total = total + self.weights[j] * phases[:, j] * value(
                    child, factor * self.ratios[j], rotation @ self.rotations[j])
            memo[counts] = total
            return total

        return np.broadcast_to(value((0,) * m, 1.0, identity), (xi.shape[0],)).astype(complex)

    def _tree(self, xi: np.ndarray) -> np.ndarray:
        threshold = self._threshold(xi)
        m = len(self.ratios)
        visited = 0

        def value(factor: float, linear: np.ndarray, depth: int) -> np.ndarray:
            nonlocal visited
            if factor <= threshold:
                return 1.0
            if depth >= self.max_depth:
                raise DepthExceededError(f"recursion reached max_depth {self.max_depth} before converging")
            visited += 1
            if visited > self.node_budget:
                raise BudgetExceededError(f"recursion tree exceeded {self.node_budget} nodes")
            eta = xi @ linear
            phases = np.exp(-1j * _phases(eta, self.shifts))
            total = np.zeros(xi.shape[0], dtype=complex)
            for j in range(m):
                step = self.ratios[j] * self.rotations[j]
                total = total + self.weights[j] * phases[:, j] * value(
                    factor * self.ratios[j], linear @ step, depth + 1)
            return total

        return np.broadcast_to(value(1.0, np.eye(self.dim), 0), (xi.shape[0],)).astype(complex)


class ScaledTransform:
    """A transform multiplied by a constant (a constant density on an IFS measure)."""

    def __init__(self, base: FourierHandle, factor: float):
        self.base = base
        self.factor = factor
        self.dim = base.dim
        self.spread = base.spread

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        return self.factor * self.base(xi)


def transform_handle(measure, source: Optional[IFSMeasure] = None,
                     settings: Optional[QuadratureSettings] = None) -> FourierHandle:
    """Pick the transform for a measure.

    A weighted discretisation of `source` with constant density uses the exact
    self-similar transform; every other atomic measure is summed directly.
    """
    settings = settings or QuadratureSettings()
    if isinstance(measure, IFSMeasure):
        return SelfSimilarTransform(measure, settings.tol, settings.max_depth)
    if isinstance(measure, WeightedMeasure) and source is not None:
        density = measure.density
        if np.all(density == density[0]) and measure.base.is_real_nonnegative:
            return ScaledTransform(SelfSimilarTransform(source, settings.tol, settings.max_depth),
                                   float(density[0]) * float(measure.base.total_mass.real))
    return AtomicTransform(measure)


def ft_atomic(measure: Union[AtomicMeasure, WeightedMeasure], xi) -> complex:
    """sum_k f_k c_k exp(-i <a_k, xi>) at a single frequency."""
    handle = AtomicTransform(measure)
    return complex(handle(np.atleast_1d(np.asarray(xi, dtype=float)).reshape(1, -1))[0])


def ft_self_similar(measure: IFSMeasure, req: TransformRequest) -> complex:
    """mu^(xi) of a self-similar measure, accurate to req.tol.

    Raises:
        DepthExceededError: If max_depth is reached before the base case
    """
    handle = SelfSimilarTransform(measure, req.tol, req.max_depth)
    return complex(handle(req.xi.reshape(1, -1))[0])


def mollified_l2(measure: Union[AtomicMeasure, IFSMeasure], epsilon: float, mollifier_width_cut: float = 1e-8,
                 settings: Optional[QuadratureSettings] = None) -> float:
    """||u * chi_eps||_2^2 computed in frequency space.

    (2 pi)^(-n) times the integral of |u^(xi)|^2 |chi^(eps xi)|^2, truncated
    where |chi^(eps xi)| < mollifier_width_cut. An IFS measure is handled
    through its exact transform instead of a cylinder discretisation.

    Raises:
        QuadratureBudgetError: If the truncated domain needs more than sample_cap nodes
    """
    if not 0.0 < epsilon <= 1.0:
        raise InvalidMeasureError(f"epsilon must lie in (0, 1], got {epsilon}")
    settings = settings or QuadratureSettings()
    handle = transform_handle(measure, settings=settings)
    n = handle.dim
    directions, weights = sphere_nodes(n, settings.angular_order)
    upper = mollifier.cutoff(n, mollifier_width_cut) / epsilon
    # |chi^(eps r)|^2 oscillates with period about pi / eps
    nodes = radial_nodes(upper, handle.spread, settings, directions.shape[0], min_wavelength=np.pi / epsilon)

    frequencies = (nodes[:, None, None] * directions[None, :, :]).reshape(-1, n)
    power = np.abs(handle(frequencies)).reshape(nodes.size, -1) ** 2
    sigma = np.sum(power * weights, axis=1)
    integrand = sigma * mollifier.transform(n, epsilon * nodes) ** 2 * nodes ** (n - 1)
    return radial_integral(integrand, nodes) / (2.0 * np.pi) ** n
