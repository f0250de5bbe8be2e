"""Grayscale images and the normalized box measures built from them.

A grayscale grid becomes a measure by normalizing its intensities to a
unit total mass; every spectrum estimator in this package consumes such
a measure on a square power-of-two grid.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import formats
from .errors import AllZeroImage, ImageTooSmall, NonDyadicImage, UnsupportedFormat

KIND_SUM = "sum"
KIND_MAX = "max"
KIND_MIN = "min"
MEASURE_KINDS = (KIND_SUM, KIND_MAX, KIND_MIN)

MASS_TOTAL_TOL = 1e-9


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _freeze(obj, name, array):
    array.flags.writeable = False
    object.__setattr__(obj, name, array)


@dataclass(frozen=True)
class GrayImage:
    """Immutable grayscale raster with a declared bit depth (8 or 16)."""

    pixels: np.ndarray  # 2-D uint8 or uint16, row-major

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if pixels.dtype not in (np.uint8, np.uint16):
            raise ValueError("pixels must be uint8 or uint16")
        _freeze(self, "pixels", pixels.copy())

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def bit_depth(self) -> int:
        return 8 if self.pixels.dtype == np.uint8 else 16


@dataclass(frozen=True)
class MeasureGrid:
    """Non-negative mass on a square power-of-two grid, total mass one.

    `kind` tags how the partition function coarse-grains boxes: "sum"
    adds covered mass, "max"/"min" take the extreme covered value and
    renormalize per scale. The stored mass values are the same for all
    kinds. `source_total` keeps the pre-normalization total for
    provenance.
    """

    mass: np.ndarray
    kind: str = KIND_SUM
    source_total: float = 1.0

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        if mass.ndim != 2 or mass.shape[0] != mass.shape[1]:
            raise ValueError("mass must be a square 2-D array")
        side = mass.shape[0]
        if side < 2 or not _is_pow2(side):
            raise ValueError("measure side must be a power of two >= 2")
        if self.kind not in MEASURE_KINDS:
            raise ValueError("kind must be one of %s" % (MEASURE_KINDS,))
        if not np.all(np.isfinite(mass)) or mass.min() < 0.0:
            raise ValueError("mass values must be finite and non-negative")
        if abs(float(mass.sum()) - 1.0) > MASS_TOTAL_TOL:
            raise ValueError("total mass must be 1 within %g" % MASS_TOTAL_TOL)
        _freeze(self, "mass", mass)

    @property
    def side(self) -> int:
        return self.mass.shape[0]


def load_image(path) -> GrayImage:
    """Decode a PGM (P2/P5, 8- or 16-bit) or 8-bit grayscale PNG file.

    Color inputs raise ColorImageRejected; they are never converted.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    fmt = formats.sniff_format(data)
    if fmt == "pgm":
        pixels, _ = formats.read_pgm(data)
    elif fmt == "png":
        pixels, _ = formats.read_png(data)
    else:
        raise UnsupportedFormat("%s: not an image file" % os.fspath(path))
    return GrayImage(pixels)


def save_pgm(img: GrayImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(formats.write_pgm(img.pixels))


def crop_dyadic(img: GrayImage, min_side: int = 2) -> GrayImage:
    """Centered square crop to the largest power-of-two side that fits.

    Odd margins drop the extra pixel on the right/bottom. Idempotent on
    already-dyadic squares. Raises ImageTooSmall when the image cannot
    provide `min_side` pixels in both directions.
    """
    if min_side < 2:
        raise ValueError("min_side must be >= 2")
    short = min(img.width, img.height)
    if short < min_side:
        raise ImageTooSmall(
            "image %dx%d is smaller than min_side %d" % (img.width, img.height, min_side)
        )
    side = 1 << (short.bit_length() - 1)  # largest 2^J <= short
    if side == img.width and side == img.height:
        return img
    top = (img.height - side) // 2
    left = (img.width - side) // 2
    return GrayImage(img.pixels[top : top + side, left : left + side])


def to_measure(img: GrayImage, kind: str = KIND_SUM) -> MeasureGrid:
    """Normalize a dyadic square image into a unit-mass measure.

    mass(cell) = intensity(cell) / total intensity. The kind tag only
    changes later coarse-graining, never the stored mass.
    """
    if img.width != img.height or not _is_pow2(img.width) or img.width < 2:
        raise NonDyadicImage("image must be square with a power-of-two side >= 2")
    intensities = img.pixels.astype(np.float64)
    total = float(intensities.sum())
    if total == 0.0:
        raise AllZeroImage("cannot normalize an all-zero image")
    return MeasureGrid(intensities / total, kind=kind, source_total=total)


def as_measure(values, kind: str = KIND_SUM) -> MeasureGrid:
    """Build a measure from any non-negative square array by normalizing."""
    values = np.asarray(values, dtype=np.float64)
    total = float(values.sum())
    if total <= 0.0:
        raise AllZeroImage("values sum to zero")
    return MeasureGrid(values / total, kind=kind, source_total=total)


def load_measure(path, kind: str = KIND_SUM) -> MeasureGrid:
    """Read a native MFM1 measure file."""
    with open(path, "rb") as fh:
        mass = formats.read_mfm(fh.read())
    return MeasureGrid(mass, kind=kind, source_total=1.0)


def save_measure(measure: MeasureGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(formats.write_mfm(measure.mass))


def save_measure_preview(measure: MeasureGrid, path) -> None:
    """8-bit PGM preview with mass linearly rescaled to [0, 255].

    Lossy; never re-ingest a preview as a measure.
    """
    with open(path, "wb") as fh:
        fh.write(formats.write_pgm(formats.rescale_to_u8(measure.mass)))
