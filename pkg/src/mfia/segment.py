"""Inverse multifractal segmentation: select pixels by exponent or by
spectrum value.

Selection never touches the source image or map; it only produces a
mask, so every pixel relation in the original data survives. Edges are
the f ~ 1 sets, smooth regions and textures sit near f ~ 2, and very
irregular contours around f ~ 1.5.
"""

from dataclasses import dataclass

import numpy as np

from . import boxcount
from .errors import EmptyMask, EmptySpectrum
from .formats import write_pgm
from .holder import AlphaMap
from .measures import GrayImage
from .spectra import SpectrumCurve, check_scales, default_scales


@dataclass(frozen=True)
class BitMask:
    """Boolean pixel selection plus the rule that produced it."""

    bits: np.ndarray
    provenance: str

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1]:
            raise ValueError("bits must be a square 2-D array")
        if not self.provenance:
            raise ValueError("provenance must be populated")
        object.__setattr__(self, "bits", bits)

    @property
    def side(self) -> int:
        return self.bits.shape[0]

    @property
    def count(self) -> int:
        return int(self.bits.sum())


def select_by_alpha(amap: AlphaMap, alpha_lo: float, alpha_hi: float) -> BitMask:
    """Select defined pixels whose exponent lies in [alpha_lo, alpha_hi]."""
    if alpha_lo > alpha_hi:
        raise ValueError("alpha_lo must not exceed alpha_hi")
    with np.errstate(invalid="ignore"):
        bits = amap.defined & (amap.alpha >= alpha_lo) & (amap.alpha <= alpha_hi)
    return BitMask(bits=bits, provenance="alpha in [%g, %g]" % (alpha_lo, alpha_hi))


def select_by_f(
    amap: AlphaMap, spectrum: SpectrumCurve, f_target: float, tol: float
) -> BitMask:
    """Select pixels whose exponent maps to a spectrum value within
    `tol` of `f_target`.

    The exponent-to-f lookup interpolates linearly between spectrum
    points sorted by alpha; outside the spectrum's alpha range f counts
    as -inf, so such pixels are never selected (no dimension is
    extrapolated).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if len(spectrum) == 0:
        raise EmptySpectrum("spectrum has no points")
    order = np.argsort(spectrum.alpha, kind="stable")
    xs = spectrum.alpha[order]
    fs = spectrum.f[order]
    with np.errstate(invalid="ignore"):
        f_pix = np.interp(amap.alpha, xs, fs, left=-np.inf, right=-np.inf)
        bits = amap.defined & (np.abs(f_pix - f_target) <= tol)
    return BitMask(
        bits=bits,
        provenance="f within %g of %g (%s spectrum)" % (tol, f_target, spectrum.method),
    )


def box_dimension(mask: BitMask, box_sides=None) -> float:
    """Box-counting dimension of the mask: slope of ln N(s) vs ln(1/s)."""
    if mask.count == 0:
        raise EmptyMask("mask has no set bits")
    box_sides = check_scales(
        default_scales(mask.side) if box_sides is None else box_sides, mask.side
    )
    counts = boxcount.occupancy_counts(mask.bits, box_sides)
    return boxcount.dimension_from_counts(box_sides, counts)


def save_mask_pgm(mask: BitMask, path) -> None:
    """Write the mask as PGM P5: 0 = unselected, 255 = selected."""
    pixels = np.where(mask.bits, 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(write_pgm(pixels))


def save_mask_overlay_pgm(img: GrayImage, mask: BitMask, path) -> None:
    """Overlay preview: source dimmed 50%, selected pixels forced to 255.

    16-bit sources are shifted down to 8 bits first.
    """
    if img.bit_depth == 16:
        base = (img.pixels >> 8).astype(np.uint8)
    else:
        base = img.pixels
    if base.shape != mask.bits.shape:
        raise ValueError("image and mask shapes differ")
    out = (base // 2).astype(np.uint8)
    out[mask.bits] = 255
    with open(path, "wb") as fh:
        fh.write(write_pgm(out))
