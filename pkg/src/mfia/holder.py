"""Pointwise Holder exponents and the spectra built from them.

The exponent at a pixel is the least-squares slope of ln mu(W(x, s))
against ln(s / side) over a family of centered odd windows W, with
mirror padding at the borders (so a uniform measure gets exponent 2
exactly, everywhere). From the coarse behaviour of the measure follow
two spectra:

* large-deviation: per scale, each box gets a coarse exponent
  ln mu_box / ln delta; f(bin) is the slope of ln N_delta(bin) against
  ln(1/delta), i.e. how the population of a given exponent scales.
* geometric: each exponent bin of the pixel map forms a set whose
  box-counting dimension is f(bin).
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from . import boxcount
from ._regression import fit_line, fit_lines_stacked
from .errors import NoDefinedPixels, NoOccupiedBins, WindowTooLarge
from .formats import rescale_to_u8, write_amf, write_pgm
from .measures import MeasureGrid
from .spectra import (
    EMBEDDING_DIM,
    F_SLACK,
    METHOD_HAUSDORFF,
    METHOD_LARGE_DEVIATION,
    SpectrumCurve,
    check_scales,
    coarse_masses,
    default_scales,
)

DEFAULT_WINDOWS = (1, 3, 5, 7, 9)
DEFAULT_BIN_WIDTH = 0.05
MIN_BIN_PIXEL_FRACTION = 1e-3  # bins below 0.1% of defined pixels are dropped
MIN_SCALES_PER_BIN = 3


@dataclass(frozen=True)
class AlphaMap:
    """Per-pixel exponent estimates; NaN marks undefined pixels (zero
    mass in the smallest window)."""

    alpha: np.ndarray
    r2: np.ndarray
    window_sides: tuple

    @property
    def side(self) -> int:
        return self.alpha.shape[0]

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.alpha)


@dataclass(frozen=True)
class AlphaHistogram:
    """Exponent histogram on shared uniform bins.

    counts has one row per scale (a single row when summarizing a pixel
    map); every row counts boxes/pixels whose exponent falls in each bin.
    """

    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def _window_sum(mass, s):
    if s == 1:
        return mass
    # uniform_filter('reflect') = centered window with mirror padding
    return uniform_filter(mass, size=s, mode="reflect") * float(s * s)


def alpha_map(measure: MeasureGrid, window_sides=DEFAULT_WINDOWS) -> AlphaMap:
    """Estimate the exponent at every pixel from centered window masses.

    Pixels whose smallest-window mass is zero are undefined. Window
    sides must be odd, strictly increasing, and smaller than the grid.
    """
    windows = tuple(int(s) for s in window_sides)
    if len(windows) < 2:
        raise ValueError("at least two window sides are required")
    if any(s < 1 or s % 2 == 0 for s in windows):
        raise ValueError("window sides must be odd positive integers")
    if any(b <= a for a, b in zip(windows, windows[1:])):
        raise ValueError("window sides must be strictly increasing")
    side = measure.side
    if windows[-1] >= side:
        raise WindowTooLarge("window side %d does not fit in grid side %d" % (windows[-1], side))

    sums = np.stack([_window_sum(measure.mass, s) for s in windows])
    defined = sums[0] > 0.0
    x = np.log(np.array(windows, dtype=float) / side)

    n_def = int(defined.sum())
    alpha = np.full((side, side), np.nan)
    r2 = np.full((side, side), np.nan)
    if n_def:
        ys = np.log(sums[:, defined]).T  # (n_def, n_windows); rows are pixels
        slopes, fit_r2 = fit_lines_stacked(x, ys)
        alpha[defined] = slopes
        r2[defined] = fit_r2
    return AlphaMap(alpha=alpha, r2=r2, window_sides=windows)


def _shared_bins(values, bin_width):
    """Uniform bin edges covering [min, max], with the first bin centered
    on the minimum so a degenerate single-value input reports the value
    itself as its bin center."""
    lo = float(values.min())
    hi = float(values.max())
    first = lo - 0.5 * bin_width
    n_bins = max(1, int(np.ceil((hi - first) / bin_width)))
    return first + bin_width * np.arange(n_bins + 1)


def _bin_indices(values, edges):
    """Uniform-bin index per value; -1 when outside [edges[0], edges[-1]].
    The right boundary belongs to the last bin."""
    n_bins = edges.size - 1
    width = edges[1] - edges[0]
    idx = np.floor((values - edges[0]) / width).astype(np.int64)
    idx[values == edges[-1]] = n_bins - 1
    idx[(values < edges[0]) | (values > edges[-1])] = -1
    idx[idx >= n_bins] = n_bins - 1  # float edge rounding
    return idx


def coarse_alpha_histogram(measure: MeasureGrid, scales=None, bin_width=DEFAULT_BIN_WIDTH) -> AlphaHistogram:
    """Histogram coarse box exponents per scale on bins shared across
    scales (bin range fixed at the finest scale)."""
    if bin_width <= 0.0:
        raise ValueError("bin width must be positive")
    scales = check_scales(default_scales(measure.side) if scales is None else scales, measure.side)
    side = measure.side

    per_scale = []
    for s in scales:
        coarse = coarse_masses(measure, s)
        positive = coarse[coarse > 0.0]
        delta = s / side
        per_scale.append(np.log(positive) / np.log(delta))

    edges = _shared_bins(per_scale[0], bin_width)  # finest scale is scales[0]
    counts = np.zeros((len(scales), edges.size - 1), dtype=np.int64)
    for row, alphas in enumerate(per_scale):
        idx = _bin_indices(alphas, edges)
        inside = idx >= 0
        np.add.at(counts[row], idx[inside], 1)
    return AlphaHistogram(bin_edges=edges, counts=counts)


def large_deviation_spectrum(
    measure: MeasureGrid, scales=None, bin_width=DEFAULT_BIN_WIDTH
) -> SpectrumCurve:
    """Statistical spectrum from the scaling of per-bin box populations.

    Only bins occupied at MIN_SCALES_PER_BIN or more scales survive;
    slopes from fewer points would be noise, so those bins are dropped
    rather than extrapolated. Bins whose fitted slope exceeds the
    embedding bound (2 plus slack) are dropped for the same reason:
    unlike box-count slopes they are not capped by subdivision, and a
    value above the embedding dimension is not a dimension estimate.
    """
    scales = check_scales(default_scales(measure.side) if scales is None else scales, measure.side)
    hist = coarse_alpha_histogram(measure, scales, bin_width)
    side = measure.side
    log_inv_delta = np.log(np.array([side / s for s in scales], dtype=float))

    centers = hist.bin_centers
    alphas, fs = [], []
    for b in range(centers.size):
        occupied = hist.counts[:, b] > 0
        if int(occupied.sum()) < MIN_SCALES_PER_BIN:
            continue
        slope, _, _ = fit_line(log_inv_delta[occupied], np.log(hist.counts[occupied, b].astype(float)))
        if slope > EMBEDDING_DIM + F_SLACK:
            continue
        alphas.append(centers[b])
        fs.append(slope)
    if not alphas:
        raise NoOccupiedBins("no exponent bin is occupied at %d scales" % MIN_SCALES_PER_BIN)
    return SpectrumCurve(
        alpha=np.array(alphas), f=np.array(fs), method=METHOD_LARGE_DEVIATION
    )


def hausdorff_spectrum(
    amap: AlphaMap, bin_width=DEFAULT_BIN_WIDTH, box_sides=None
) -> SpectrumCurve:
    """Geometric spectrum: box-counting dimension of each exponent bin's
    pixel set. Bins holding under MIN_BIN_PIXEL_FRACTION of the defined
    pixels are dropped."""
    if bin_width <= 0.0:
        raise ValueError("bin width must be positive")
    defined = amap.defined
    n_def = int(defined.sum())
    if n_def == 0:
        raise NoDefinedPixels("exponent map has no defined pixels")
    side = amap.side
    box_sides = check_scales(default_scales(side) if box_sides is None else box_sides, side)

    values = amap.alpha[defined]
    edges = _shared_bins(values, bin_width)
    idx_map = np.full(amap.alpha.shape, -1, dtype=np.int64)
    idx_map[defined] = _bin_indices(values, edges)

    min_count = max(1, int(np.ceil(MIN_BIN_PIXEL_FRACTION * n_def)))
    centers = 0.5 * (edges[:-1] + edges[1:])
    alphas, dims = [], []
    for b in range(centers.size):
        mask = idx_map == b
        if int(mask.sum()) < min_count:
            continue
        counts = boxcount.occupancy_counts(mask, box_sides)
        dims.append(boxcount.dimension_from_counts(box_sides, counts))
        alphas.append(centers[b])
    if not alphas:
        raise NoOccupiedBins("no exponent bin holds enough pixels")
    return SpectrumCurve(alpha=np.array(alphas), f=np.array(dims), method=METHOD_HAUSDORFF)


def histogram_alpha_map(amap: AlphaMap, bin_width=DEFAULT_BIN_WIDTH) -> AlphaHistogram:
    """One-row histogram summarizing the defined pixels of a map."""
    if bin_width <= 0.0:
        raise ValueError("bin width must be positive")
    values = amap.alpha[amap.defined]
    if values.size == 0:
        raise NoDefinedPixels("exponent map has no defined pixels")
    edges = _shared_bins(values, bin_width)
    counts = np.zeros((1, edges.size - 1), dtype=np.int64)
    np.add.at(counts[0], _bin_indices(values, edges), 1)
    return AlphaHistogram(bin_edges=edges, counts=counts)


def save_alpha_map(amap: AlphaMap, path) -> None:
    """Write the native AMF1 binary grid (undefined pixels as NaN)."""
    with open(path, "wb") as fh:
        fh.write(write_amf(amap.alpha))


def save_alpha_map_preview(amap: AlphaMap, path) -> None:
    """8-bit PGM preview: defined exponents rescaled to [1, 255] so the
    value 0 is reserved for undefined pixels."""
    with open(path, "wb") as fh:
        fh.write(write_pgm(rescale_to_u8(amap.alpha, lo_out=1)))
