import io

import numpy as np
import pytest

from mfia import formats, measures
from mfia.errors import (
    AllZeroImage,
    ColorImageRejected,
    CorruptFile,
    ImageTooSmall,
    NonDyadicImage,
    UnsupportedFormat,
)


def write_tmp(tmp_path, name, data):
    path = tmp_path / name
    path.write_bytes(data)
    return path


# --- PGM decoding -----------------------------------------------------------

def test_p2_identity_decode(tmp_path):
    body = "P2\n4 4\n255\n" + " ".join(["100"] * 16) + "\n"
    img = measures.load_image(write_tmp(tmp_path, "a.pgm", body.encode()))
    assert img.width == 4 and img.height == 4
    assert img.bit_depth == 8
    assert np.all(img.pixels == 100)


def test_p2_comments_and_whitespace(tmp_path):
    body = "P2 # magic\n# a comment line\n2   2\n# another\n10\n1 2\n3 4\n"
    img = measures.load_image(write_tmp(tmp_path, "c.pgm", body.encode()))
    assert img.pixels.tolist() == [[1, 2], [3, 4]]


def test_p5_16bit_big_endian(tmp_path):
    payload = bytes([0x01, 0x00, 0x00, 0x02, 0xFF, 0xFF, 0x00, 0x00])
    img = measures.load_image(write_tmp(tmp_path, "w.pgm", b"P5\n2 2\n65535\n" + payload))
    assert img.bit_depth == 16
    assert img.pixels.tolist() == [[256, 2], [65535, 0]]


def test_p5_8bit(tmp_path):
    img = measures.load_image(write_tmp(tmp_path, "b.pgm", b"P5\n2 2\n255\n\x00\x10\x20\xff"))
    assert img.bit_depth == 8
    assert img.pixels.tolist() == [[0, 16], [32, 255]]


def test_truncated_p5_payload(tmp_path):
    with pytest.raises(CorruptFile):
        measures.load_image(write_tmp(tmp_path, "t.pgm", b"P5\n4 4\n255\n\x00\x01"))


def test_truncated_p2_payload(tmp_path):
    with pytest.raises(CorruptFile):
        measures.load_image(write_tmp(tmp_path, "t2.pgm", b"P2\n4 4\n255\n1 2 3\n"))


def test_p2_sample_above_maxval(tmp_path):
    with pytest.raises(CorruptFile):
        measures.load_image(write_tmp(tmp_path, "m.pgm", b"P2\n2 1\n10\n5 11\n"))


def test_bad_maxval(tmp_path):
    with pytest.raises(CorruptFile):
        measures.load_image(write_tmp(tmp_path, "z.pgm", b"P2\n2 1\n0\n0 0\n"))
    with pytest.raises(CorruptFile):
        measures.load_image(write_tmp(tmp_path, "z2.pgm", b"P2\n2 1\n70000\n0 0\n"))


def test_color_ppm_rejected(tmp_path):
    with pytest.raises(ColorImageRejected):
        measures.load_image(write_tmp(tmp_path, "c.ppm", b"P6\n1 1\n255\n\x00\x00\x00"))


def test_unsupported_magic(tmp_path):
    with pytest.raises(UnsupportedFormat):
        measures.load_image(write_tmp(tmp_path, "b.pbm", b"P1\n1 1\n0\n"))
    with pytest.raises(UnsupportedFormat):
        measures.load_image(write_tmp(tmp_path, "x.bin", b"not an image at all"))


def test_pgm_write_read_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    for dtype, hi in ((np.uint8, 256), (np.uint16, 65536)):
        pixels = rng.integers(0, hi, size=(8, 8)).astype(dtype)
        img = measures.GrayImage(pixels)
        path = tmp_path / ("r_%s.pgm" % dtype.__name__)
        measures.save_pgm(img, path)
        back = measures.load_image(path)
        assert np.array_equal(back.pixels, pixels)
        assert back.bit_depth == img.bit_depth


def test_png_grayscale_and_color(tmp_path):
    from PIL import Image

    gray = Image.fromarray(np.arange(64, dtype=np.uint8).reshape(8, 8), mode="L")
    path = tmp_path / "g.png"
    gray.save(path)
    img = measures.load_image(path)
    assert img.bit_depth == 8
    assert np.array_equal(img.pixels, np.arange(64, dtype=np.uint8).reshape(8, 8))

    rgb = Image.new("RGB", (4, 4), (9, 8, 7))
    cpath = tmp_path / "c.png"
    rgb.save(cpath)
    with pytest.raises(ColorImageRejected):
        measures.load_image(cpath)


def test_corrupt_png(tmp_path):
    data = formats._PNG_MAGIC + b"\x00\x01garbage"
    with pytest.raises(CorruptFile):
        measures.load_image(write_tmp(tmp_path, "bad.png", data))


# --- cropping ---------------------------------------------------------------

def test_crop_already_dyadic():
    img = measures.GrayImage(np.ones((512, 512), dtype=np.uint8))
    out = measures.crop_dyadic(img)
    assert out.pixels.shape == (512, 512)
    assert np.array_equal(out.pixels, img.pixels)


def test_crop_640x480_centered():
    pixels = np.arange(640 * 480, dtype=np.uint32).reshape(480, 640) % 251
    img = measures.GrayImage(pixels.astype(np.uint8))
    out = measures.crop_dyadic(img)
    assert out.pixels.shape == (256, 256)
    # margins: rows 480-256=224 -> top 112; cols 640-256=384 -> left 192
    assert np.array_equal(out.pixels, img.pixels[112:368, 192:448])


def test_crop_odd_margin_drops_right_bottom():
    pixels = np.zeros((5, 6), dtype=np.uint8)
    img = measures.GrayImage(pixels)
    out = measures.crop_dyadic(img)
    # side 4; row margin 1 -> top 0 (extra dropped at bottom); col margin 2 -> left 1
    assert out.pixels.shape == (4, 4)


def test_crop_too_small():
    img = measures.GrayImage(np.zeros((3, 3), dtype=np.uint8))
    with pytest.raises(ImageTooSmall):
        measures.crop_dyadic(img, min_side=4)


def test_crop_idempotent():
    rng = np.random.default_rng(1)
    for h, w in ((480, 640), (33, 65), (128, 100)):
        img = measures.GrayImage(rng.integers(0, 255, size=(h, w)).astype(np.uint8))
        once = measures.crop_dyadic(img)
        twice = measures.crop_dyadic(once)
        assert np.array_equal(once.pixels, twice.pixels)


# --- measures ---------------------------------------------------------------

def test_to_measure_uniform():
    img = measures.GrayImage(np.full((4, 4), 100, dtype=np.uint8))
    m = measures.to_measure(img)
    assert np.allclose(m.mass, 1.0 / 16.0)
    assert m.kind == measures.KIND_SUM
    assert m.source_total == 1600.0


def test_to_measure_direct_normalization():
    img = measures.GrayImage(np.array([[1, 1], [0, 0]], dtype=np.uint8))
    m = measures.to_measure(img)
    assert m.mass.tolist() == [[0.5, 0.5], [0.0, 0.0]]


def test_to_measure_all_zero():
    img = measures.GrayImage(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(AllZeroImage):
        measures.to_measure(img)


def test_to_measure_non_dyadic():
    with pytest.raises(NonDyadicImage):
        measures.to_measure(measures.GrayImage(np.ones((4, 8), dtype=np.uint8)))
    with pytest.raises(NonDyadicImage):
        measures.to_measure(measures.GrayImage(np.ones((6, 6), dtype=np.uint8)))


def test_normalization_invariant_random_images():
    rng = np.random.default_rng(2)
    for _ in range(10):
        pixels = rng.integers(0, 65535, size=(32, 32)).astype(np.uint16)
        if not pixels.any():
            continue
        m = measures.to_measure(measures.GrayImage(pixels))
        assert abs(m.mass.sum() - 1.0) <= 1e-9


def test_intensity_scaling_invariance():
    rng = np.random.default_rng(3)
    base = rng.integers(1, 200, size=(16, 16)).astype(np.uint16)
    m1 = measures.to_measure(measures.GrayImage(base))
    m3 = measures.to_measure(measures.GrayImage((base * 3).astype(np.uint16)))
    assert np.max(np.abs(m1.mass - m3.mass)) <= 1e-12


def test_measure_grid_validation():
    with pytest.raises(ValueError):
        measures.MeasureGrid(np.full((3, 3), 1.0 / 9.0))  # non power-of-two side
    with pytest.raises(ValueError):
        measures.MeasureGrid(np.full((2, 4), 0.125))  # not square
    bad = np.full((2, 2), 0.25)
    bad[0, 0] = -0.25
    bad[0, 1] = 0.75
    with pytest.raises(ValueError):
        measures.MeasureGrid(bad)  # negative mass
    with pytest.raises(ValueError):
        measures.MeasureGrid(np.full((2, 2), 0.3))  # sum != 1


def test_grayimage_validation():
    with pytest.raises(ValueError):
        measures.GrayImage(np.zeros((2, 2), dtype=np.float64))
    with pytest.raises(ValueError):
        measures.GrayImage(np.zeros(4, dtype=np.uint8))


def test_values_immutable():
    m = measures.as_measure(np.ones((4, 4)))
    with pytest.raises(ValueError):
        m.mass[0, 0] = 0.5


# --- native measure format ---------------------------------------------------

def test_mfm_roundtrip(tmp_path):
    m = measures.as_measure(np.random.default_rng(4).random((8, 8)) + 0.01)
    path = tmp_path / "m.mfm"
    measures.save_measure(m, path)
    back = measures.load_measure(path)
    assert np.array_equal(back.mass, m.mass)


def test_mfm_corrupt(tmp_path):
    good = formats.write_mfm(measures.as_measure(np.ones((2, 2))).mass)
    with pytest.raises(CorruptFile):
        formats.read_mfm(good[:10])  # truncated payload
    with pytest.raises(UnsupportedFormat):
        formats.read_mfm(b"XXXX" + good[4:])
    # side not a power of two
    import struct

    bad_side = b"MFM1" + struct.pack("<I", 3) + b"\x00" * (9 * 8)
    with pytest.raises(CorruptFile):
        formats.read_mfm(bad_side)
    # mass not summing to one
    bad_sum = formats.write_mfm(np.full((2, 2), 0.3))
    with pytest.raises(CorruptFile):
        formats.read_mfm(bad_sum)


def test_measure_preview_is_pgm(tmp_path):
    m = measures.as_measure(np.random.default_rng(5).random((8, 8)) + 0.01)
    path = tmp_path / "p.pgm"
    measures.save_measure_preview(m, path)
    img = measures.load_image(path)
    assert img.pixels.shape == (8, 8)
    assert img.bit_depth == 8
