"""Multiplicative cascades on dyadic quadrants and their exact spectra.

A four-weight cascade subdivides every cell into quadrants, multiplying
the parent mass by the weights (p1..p4). Its mass exponents have the
closed form

    tau(q)   = -log2(sum_i p_i^q)
    alpha(q) = -(sum_i p_i^q ln p_i) / (sum_i p_i^q * ln 2)
    f(q)     = q * alpha(q) - tau(q)
    D(q)     = tau(q) / (q - 1),    D(1) = alpha(1)

which makes cascades exact ground truth for every estimator here.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DepthTooLarge
from .measures import KIND_SUM, MeasureGrid

DEFAULT_SIDE_CAP = 4096

# quadrant order: NW, NE, SW, SE (row-major in the child grid)
_PERMUTATIONS = np.array(list(itertools.permutations(range(4))), dtype=np.intp)


@dataclass(frozen=True)
class CascadeSpec:
    """Generator parameters: four positive weights summing to one, the
    subdivision depth, optional per-cell weight shuffling, and the seed
    driving it. Same spec => bit-identical grid."""

    weights: tuple
    depth: int
    shuffle: bool = False
    seed: int = 0

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != 4:
            raise ValueError("exactly four weights are required")
        if any(not (0.0 < w < 1.0) for w in weights):
            raise ValueError("weights must lie strictly between 0 and 1")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        object.__setattr__(self, "weights", weights)


def generate_cascade(spec: CascadeSpec, side_cap: int = DEFAULT_SIDE_CAP) -> MeasureGrid:
    """Run `spec.depth` quadrant subdivisions from a unit-mass cell.

    With shuffle=False the weights map fixedly onto (NW, NE, SW, SE).
    With shuffle=True every cell draws a uniform permutation of the four
    weights from a generator seeded by `spec.seed`, so the output is
    deterministic per seed. The result has side 2^depth and total mass 1.
    """
    side = 1 << spec.depth
    if side > side_cap:
        raise DepthTooLarge("depth %d gives side %d > cap %d" % (spec.depth, side, side_cap))
    weights = np.array(spec.weights, dtype=np.float64)
    perm_weights = weights[_PERMUTATIONS]  # (24, 4)
    rng = np.random.default_rng(spec.seed)

    grid = np.ones((1, 1), dtype=np.float64)
    for _ in range(spec.depth):
        n = grid.shape[0]
        if spec.shuffle:
            factors = perm_weights[rng.integers(0, 24, size=(n, n))]
        else:
            factors = np.broadcast_to(weights, (n, n, 4))
        child = np.empty((2 * n, 2 * n), dtype=np.float64)
        child[0::2, 0::2] = grid * factors[:, :, 0]
        child[0::2, 1::2] = grid * factors[:, :, 1]
        child[1::2, 0::2] = grid * factors[:, :, 2]
        child[1::2, 1::2] = grid * factors[:, :, 3]
        grid = child
    return MeasureGrid(grid, kind=KIND_SUM, source_total=1.0)


@dataclass(frozen=True)
class AnalyticSpectrum:
    """Closed-form cascade curves sampled on a q grid."""

    q: np.ndarray
    tau: np.ndarray
    alpha: np.ndarray
    f: np.ndarray
    d: np.ndarray


def analytic_tau_spectrum(weights, q_grid) -> AnalyticSpectrum:
    """Evaluate the closed forms above on `q_grid` (no estimation).

    tau(1) and D(1) are evaluated in their exact limit forms, so
    tau(1) = 0 and f(alpha(1)) = alpha(1) hold exactly.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (4,) or np.any(weights <= 0) or np.any(weights >= 1):
        raise ValueError("weights must be four values strictly between 0 and 1")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must sum to 1 within 1e-12")
    q = np.asarray(q_grid, dtype=np.float64)
    if q.ndim != 1 or not np.all(np.isfinite(q)) or np.any(np.diff(q) <= 0):
        raise ValueError("q grid must be finite and strictly increasing")

    log_w = np.log(weights)
    powers = weights[None, :] ** q[:, None]  # (nq, 4)
    sums = powers.sum(axis=1)
    tau = -np.log2(sums)
    alpha = -(powers @ log_w) / (sums * np.log(2.0))

    at_one = q == 1.0
    tau[at_one] = 0.0
    f = q * alpha - tau

    with np.errstate(divide="ignore", invalid="ignore"):
        d = tau / (q - 1.0)
    d[at_one] = alpha[at_one]
    return AnalyticSpectrum(q=q, tau=tau, alpha=alpha, f=f, d=d)
