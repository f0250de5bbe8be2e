"""File formats: PGM images, optional grayscale PNG, and the native
binary grids.

Supported inputs
----------------
PGM P2 (ASCII) and P5 (raw), maxval 1..65535. A maxval above 255 declares
a 16-bit image with big-endian sample pairs, per the PNM convention.
Header ``#`` comments are honored. PPM magics (P3/P6) are rejected as
color input; other PNM magics are unsupported.

PNG is accepted only in 8-bit grayscale (mode ``L``); color or palette
PNGs are rejected, not converted.

Native binary grids
-------------------
``MFM1`` (measure): magic ``MFM1``, u32 little-endian side, then side^2
float64 little-endian mass values, row-major.

``AMF1`` (exponent map): magic ``AMF1``, u32 little-endian side, then
side^2 float32 little-endian values, row-major, quiet NaN where the
exponent is undefined.
"""

import struct

import numpy as np

from .errors import ColorImageRejected, CorruptFile, UnsupportedFormat

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_COLOR_PNM = {b"P3", b"P6"}
_OTHER_PNM = {b"P1", b"P4"}


def sniff_format(data: bytes) -> str:
    """Classify a file head as 'pgm', 'png', 'mfm', or 'amf'."""
    if data[:4] == b"MFM1":
        return "mfm"
    if data[:4] == b"AMF1":
        return "amf"
    if data[:8] == _PNG_MAGIC:
        return "png"
    magic = data[:2]
    if magic in (b"P2", b"P5"):
        return "pgm"
    if magic in _COLOR_PNM:
        raise ColorImageRejected("PPM magic %s is a color format" % magic.decode("ascii", "replace"))
    if magic in _OTHER_PNM:
        raise UnsupportedFormat("PNM bitmap magic %s is not supported" % magic.decode("ascii", "replace"))
    raise UnsupportedFormat("unrecognized file magic")


# --------------------------------------------------------------------------
# PGM
# --------------------------------------------------------------------------

def _pnm_header_tokens(data, count):
    """Read `count` whitespace-separated header tokens after the magic,
    skipping '#' comments. Returns (tokens, offset past the single
    whitespace byte that terminates the header)."""
    tokens = []
    i = 2  # past the 2-byte magic
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise CorruptFile("truncated PGM header")
        tokens.append(data[start:i])
    if i >= n:
        raise CorruptFile("PGM header ends before payload")
    i += 1  # exactly one whitespace byte separates header from payload
    return tokens, i


def read_pgm(data: bytes):
    """Decode a P2/P5 PGM byte string to (pixels, maxval).

    pixels is a uint8 or uint16 ndarray depending on maxval.
    """
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormat("not a PGM file")
    tokens, offset = _pnm_header_tokens(data, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise CorruptFile("non-numeric PGM header field") from None
    if width < 1 or height < 1:
        raise CorruptFile("non-positive PGM dimensions")
    if not 1 <= maxval <= 65535:
        raise CorruptFile("PGM maxval %d out of range" % maxval)
    wide = maxval > 255
    dtype = np.uint16 if wide else np.uint8

    if magic == b"P5":
        count = width * height
        if wide:
            payload = data[offset : offset + 2 * count]
            if len(payload) < 2 * count:
                raise CorruptFile("truncated P5 payload")
            pixels = np.frombuffer(payload, dtype=">u2").astype(np.uint16)
        else:
            payload = data[offset : offset + count]
            if len(payload) < count:
                raise CorruptFile("truncated P5 payload")
            pixels = np.frombuffer(payload, dtype=np.uint8).copy()
    else:
        fields = data[offset:].split()
        if len(fields) < width * height:
            raise CorruptFile("truncated P2 payload")
        try:
            values = [int(f) for f in fields[: width * height]]
        except ValueError:
            raise CorruptFile("non-numeric P2 sample") from None
        pixels = np.asarray(values, dtype=np.int64)
        if pixels.min() < 0:
            raise CorruptFile("negative P2 sample")
        pixels = pixels.astype(dtype)

    pixels = pixels.reshape(height, width)
    if int(pixels.max(initial=0)) > maxval:
        raise CorruptFile("PGM sample exceeds declared maxval")
    return pixels, maxval


def write_pgm(pixels: np.ndarray, comments=()) -> bytes:
    """Encode a uint8/uint16 grid as binary P5 bytes (maxval 255 or 65535).

    Optional comment lines are embedded in the header.
    """
    pixels = np.asarray(pixels)
    if pixels.dtype == np.uint8:
        maxval, payload = 255, pixels.tobytes()
    elif pixels.dtype == np.uint16:
        maxval, payload = 65535, pixels.astype(">u2").tobytes()
    else:
        raise ValueError("write_pgm expects uint8 or uint16 pixels")
    height, width = pixels.shape
    comment_block = b"".join(b"# %s\n" % c.encode("utf-8") for c in comments)
    header = b"P5\n" + comment_block + b"%d %d\n%d\n" % (width, height, maxval)
    return header + payload


# --------------------------------------------------------------------------
# PNG (via Pillow, 8-bit grayscale only)
# --------------------------------------------------------------------------

def read_png(data: bytes):
    """Decode an 8-bit grayscale PNG to (pixels, maxval=255)."""
    import io

    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode in ("RGB", "RGBA", "P", "PA", "CMYK", "YCbCr"):
                raise ColorImageRejected("PNG mode %s is not grayscale" % mode)
            if mode != "L":
                raise UnsupportedFormat("PNG mode %s is not 8-bit grayscale" % mode)
            pixels = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise CorruptFile("undecodable PNG: %s" % exc) from exc
    return pixels, 255


# --------------------------------------------------------------------------
# Native binary grids
# --------------------------------------------------------------------------

def _read_grid(data, magic, dtype, what):
    if data[:4] != magic:
        raise UnsupportedFormat("not a %s file" % magic.decode())
    if len(data) < 8:
        raise CorruptFile("truncated %s header" % what)
    (side,) = struct.unpack("<I", data[4:8])
    if side < 2 or side & (side - 1):
        raise CorruptFile("%s side %d is not a power of two >= 2" % (what, side))
    itemsize = np.dtype(dtype).itemsize
    need = side * side * itemsize
    payload = data[8 : 8 + need]
    if len(payload) < need:
        raise CorruptFile("truncated %s payload" % what)
    return np.frombuffer(payload, dtype=dtype).reshape(side, side)


def read_mfm(data: bytes) -> np.ndarray:
    """Decode MFM1 bytes to a float64 mass grid (validated non-negative,
    finite, total within 1e-9 of one)."""
    mass = _read_grid(data, b"MFM1", "<f8", "measure").astype(np.float64)
    if not np.all(np.isfinite(mass)) or mass.min() < 0.0:
        raise CorruptFile("measure mass values must be finite and non-negative")
    if abs(mass.sum() - 1.0) > 1e-9:
        raise CorruptFile("measure mass does not sum to 1")
    return mass


def write_mfm(mass: np.ndarray) -> bytes:
    mass = np.ascontiguousarray(mass, dtype=np.float64)
    side = mass.shape[0]
    return b"MFM1" + struct.pack("<I", side) + mass.astype("<f8").tobytes()


def read_amf(data: bytes) -> np.ndarray:
    """Decode AMF1 bytes to a float64 exponent grid (NaN = undefined)."""
    return _read_grid(data, b"AMF1", "<f4", "exponent map").astype(np.float64)


def write_amf(alpha: np.ndarray) -> bytes:
    alpha = np.ascontiguousarray(alpha)
    side = alpha.shape[0]
    return b"AMF1" + struct.pack("<I", side) + alpha.astype("<f4").tobytes()


# --------------------------------------------------------------------------
# 8-bit previews (lossy, for visual inspection only)
# --------------------------------------------------------------------------

def rescale_to_u8(values: np.ndarray, lo_out: int = 0) -> np.ndarray:
    """Linear rescale of finite values onto [lo_out, 255]; NaN maps to 0.

    A degenerate (constant) range maps to lo_out.
    """
    values = np.asarray(values, dtype=float)
    out = np.zeros(values.shape, dtype=np.uint8)
    defined = np.isfinite(values)
    if not defined.any():
        return out
    lo = values[defined].min()
    hi = values[defined].max()
    if hi > lo:
        scaled = (values[defined] - lo) / (hi - lo) * (255 - lo_out) + lo_out
    else:
        scaled = np.full(int(defined.sum()), lo_out, dtype=float)
    out[defined] = np.rint(scaled).astype(np.uint8)
    return out
