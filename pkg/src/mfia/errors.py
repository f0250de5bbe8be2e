"""Exception types raised by the mfia library.

Every error that callers are expected to catch has its own class so that
batch drivers can report failures by name without string matching.
"""


class MfiaError(Exception):
    """Base class for all mfia errors."""


# --- image decoding -------------------------------------------------------

class UnsupportedFormat(MfiaError):
    """File is not one of the supported image or measure formats."""


class CorruptFile(MfiaError):
    """File has a recognized magic but the payload is malformed or truncated."""


class ColorImageRejected(MfiaError):
    """Color input; grayscale is required and no silent conversion is done."""


# --- measure construction -------------------------------------------------

class ImageTooSmall(MfiaError):
    """Image is smaller than the requested minimum crop side."""


class AllZeroImage(MfiaError):
    """Every intensity is zero; no measure can be normalized from it."""


class NonDyadicImage(MfiaError):
    """Image is not a square with a power-of-two side."""


# --- synthesis ------------------------------------------------------------

class DepthTooLarge(MfiaError):
    """Cascade depth would exceed the configured grid side cap."""


# --- spectrum estimation --------------------------------------------------

class EmptyMeasure(MfiaError):
    """No box carries positive mass at the requested scale."""


class QGridTooCoarse(MfiaError):
    """Too few q values for a numerical Legendre transform."""


class WindowTooLarge(MfiaError):
    """A pointwise-exponent window does not fit inside the grid."""


class NoOccupiedBins(MfiaError):
    """No exponent bin is occupied at enough scales for a slope fit."""


class NoDefinedPixels(MfiaError):
    """The exponent map has no defined pixels."""


# --- segmentation ---------------------------------------------------------

class EmptySpectrum(MfiaError):
    """Spectrum has no points to map exponents through."""


class EmptyMask(MfiaError):
    """Mask has no set bits; a box dimension is undefined."""


# --- statistics / classification ------------------------------------------

class EmptyCurve(MfiaError):
    """Curve has no points (or too few) for feature extraction."""


class SingularCovariance(MfiaError):
    """Pooled covariance is not positive definite even after the ridge term."""


class DimensionMismatch(MfiaError):
    """Sample dimension does not match the fitted model."""


class SchemaMismatch(MfiaError):
    """Feature CSV does not conform to the expected column schema."""


class EmptyDataset(MfiaError):
    """Input directory yields no readable labeled images."""
