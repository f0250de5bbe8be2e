"""Dyadic box counting over binary masks."""

import numpy as np

from ._regression import fit_line


def occupancy_counts(bits: np.ndarray, box_sides) -> np.ndarray:
    """N(s) = number of s x s boxes containing at least one set bit."""
    bits = np.asarray(bits, dtype=bool)
    side = bits.shape[0]
    counts = np.empty(len(box_sides), dtype=np.int64)
    for i, s in enumerate(box_sides):
        n = side // s
        occupied = bits.reshape(n, s, n, s).any(axis=(1, 3))
        counts[i] = int(occupied.sum())
    return counts


def dimension_from_counts(box_sides, counts) -> float:
    """Slope of ln N(s) against ln(1/s)."""
    x = -np.log(np.asarray(box_sides, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    slope, _, _ = fit_line(x, y)
    return slope
