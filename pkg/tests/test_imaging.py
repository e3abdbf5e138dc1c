import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from offside.imaging import (
    PPMError,
    bresenham,
    decode_ppm,
    draw_overlay,
    encode_ppm,
    hsv_image,
    hsv_to_rgb,
    new_image,
    read_ppm,
    rgb_to_hsv,
    to_grayscale,
    write_ppm,
)

images = arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 9), st.just(3)))


# --- PPM ---------------------------------------------------------------------

def test_decode_smallest_file():
    img = decode_ppm(b"P6 1 1 255\n" + bytes([0, 255, 0]))
    assert img.shape == (1, 1, 3)
    assert tuple(img[0, 0]) == (0, 255, 0)


def test_decode_rejects_16_bit_maxval():
    with pytest.raises(PPMError, match="unsupported maxval"):
        decode_ppm(b"P6 1 1 65535\n" + bytes(6))


def test_decode_rejects_truncated_payload():
    with pytest.raises(PPMError, match="truncated payload"):
        decode_ppm(b"P6 2 2 255\n" + bytes(11))


@pytest.mark.parametrize("data", [b"P5 1 1 255\n\x00", b"P6 1\n", b"P6 x 1 255\n\x00\x00\x00", b"",
                                  b"P6 0 1 255\n"])
def test_decode_rejects_malformed_header(data):
    with pytest.raises(PPMError, match="malformed header"):
        decode_ppm(data)


def test_decode_rejects_trailing_bytes():
    with pytest.raises(PPMError, match="trailing data"):
        decode_ppm(b"P6 1 1 255\n" + bytes(4))


def test_header_errors_are_distinct():
    msgs = set()
    for data in (b"P6 1 1 65535\n" + bytes(6), b"P6 2 2 255\n" + bytes(11), b"P3 1 1 255\n0 0 0"):
        with pytest.raises(PPMError) as exc:
            decode_ppm(data)
        msgs.add(str(exc.value))
    assert len(msgs) == 3


def test_decode_skips_header_comments():
    data = b"P6\n# made by hand\n2 1 # width then height\n# maxval next\n255\n" + bytes(range(6))
    img = decode_ppm(data)
    assert img.shape == (1, 2, 3)
    assert img.ravel().tolist() == list(range(6))


def test_encode_exact_bytes():
    img = new_image(1, 1, (0, 255, 0))
    assert encode_ppm(img) == b"P6\n1 1\n255\n" + bytes([0, 255, 0])


def test_zero_width_image_rejected():
    with pytest.raises(ValueError):
        encode_ppm(np.zeros((1, 0, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        new_image(0, 4)


def test_random_8x8_round_trip():
    img = np.random.default_rng(0).integers(0, 256, (8, 8, 3), dtype=np.uint8)
    assert np.array_equal(decode_ppm(encode_ppm(img)), img)


@given(images)
def test_round_trip_is_identity(img):
    back = decode_ppm(encode_ppm(img))
    assert back.dtype == np.uint8
    assert np.array_equal(back, img)


def test_file_round_trip(tmp_path):
    img = np.random.default_rng(1).integers(0, 256, (5, 7, 3), dtype=np.uint8)
    write_ppm(tmp_path / "x.ppm", img)
    assert np.array_equal(read_ppm(tmp_path / "x.ppm"), img)


# --- colour ------------------------------------------------------------------

@pytest.mark.parametrize("rgb, hsv", [
    ((255, 0, 0), (0.0, 1.0, 1.0)),
    ((0, 255, 0), (120.0, 1.0, 1.0)),
    ((0, 0, 255), (240.0, 1.0, 1.0)),
    ((128, 128, 128), (0.0, 0.0, 128 / 255)),
    ((0, 0, 0), (0.0, 0.0, 0.0)),
    ((255, 0, 1), (360.0 - 60.0 / 255, 1.0, 1.0)),
])
def test_rgb_to_hsv_examples(rgb, hsv):
    assert rgb_to_hsv(rgb) == pytest.approx(hsv, abs=1e-12)


def test_hsv_round_trip_on_16_step_grid():
    levels = list(range(0, 256, 16)) + [255]
    worst = 0
    for r in levels:
        for g in levels:
            for b in levels:
                h, s, v = rgb_to_hsv((r, g, b))
                assert 0.0 <= h < 360.0 and 0.0 <= s <= 1.0 and 0.0 <= v <= 1.0
                back = hsv_to_rgb((h, s, v))
                worst = max(worst, max(abs(x - y) for x, y in zip(back, (r, g, b))))
    assert worst <= 1


def test_hsv_image_matches_scalar_conversion():
    img = np.random.default_rng(2).integers(0, 256, (24, 31, 3), dtype=np.uint8)
    img[0, :4] = [(0, 0, 0), (255, 255, 255), (9, 9, 9), (255, 0, 1)]
    hsv = hsv_image(img)
    for y in range(img.shape[0]):
        for x in range(img.shape[1]):
            assert tuple(hsv[y, x]) == pytest.approx(rgb_to_hsv(img[y, x]), abs=1e-9)


# --- grayscale ---------------------------------------------------------------

@pytest.mark.parametrize("rgb, expected", [((255, 255, 255), 255), ((255, 0, 0), 76), ((0, 0, 255), 29),
                                           ((0, 255, 0), 150), ((0, 0, 0), 0)])
def test_grayscale_examples(rgb, expected):
    assert to_grayscale(new_image(3, 2, rgb)).tolist() == [[expected] * 3] * 2


def test_grayscale_matches_rounded_weights():
    img = np.random.default_rng(3).integers(0, 256, (16, 16, 3), dtype=np.uint8)
    g = to_grayscale(img)
    for (y, x), v in np.ndenumerate(g):
        r, gg, b = (int(c) for c in img[y, x])
        assert v == math.floor(0.299 * r + 0.587 * gg + 0.114 * b + 0.5)


@given(images, st.floats(0.0, 1.0))
def test_grayscale_monotone_under_dimming(img, k):
    dim = np.floor(img.astype(np.float64) * k + 0.5).astype(np.uint8)
    assert np.all(to_grayscale(dim) <= to_grayscale(img))


# --- drawing -----------------------------------------------------------------

def test_bresenham_endpoints_and_connectivity():
    pts = bresenham(2, 3, 11, 7)
    assert pts[0] == (2, 3) and pts[-1] == (11, 7)
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        assert max(abs(x1 - x0), abs(y1 - y0)) == 1


def test_empty_overlay_is_identity_copy():
    img = np.random.default_rng(4).integers(0, 256, (6, 6, 3), dtype=np.uint8)
    out = draw_overlay(img, [], [])
    assert np.array_equal(out, img)
    assert out is not img


def test_horizontal_segment_pixels():
    img = new_image(10, 10)
    out = draw_overlay(img, [], [((0, 5), (9, 5), (255, 255, 0), 1)])
    changed = np.argwhere(np.any(out != img, axis=2))
    assert sorted(map(tuple, changed)) == [(5, x) for x in range(10)]
    assert np.all(img == 0)


def test_box_outline_and_outside_box():
    img = new_image(10, 10)
    out = draw_overlay(img, [((2, 3, 5, 6), (9, 9, 9))], [])
    on = {(x, y) for y, x in np.argwhere(out[..., 0] == 9)}
    expect = {(x, y) for x in range(2, 6) for y in range(3, 7) if x in (2, 5) or y in (3, 6)}
    assert on == expect
    assert np.array_equal(draw_overlay(img, [((20, 20, 30, 30), (9, 9, 9))], []), img)
    assert np.array_equal(draw_overlay(img, [((-9, -9, -2, -3), (9, 9, 9))], []), img)


def _dist_to_segment(px, py, p0, p1):
    (x0, y0), (x1, y1) = p0, p1
    dx, dy = x1 - x0, y1 - y0
    n2 = dx * dx + dy * dy
    t = 0.0 if n2 == 0 else max(0.0, min(1.0, ((px - x0) * dx + (py - y0) * dy) / n2))
    return math.hypot(px - x0 - t * dx, py - y0 - t * dy)


coord = st.floats(-60, 60, allow_nan=False)


@settings(max_examples=80)
@given(coord, coord, coord, coord, st.integers(1, 3))
def test_segments_never_wrap_or_stray(x0, y0, x1, y1, thick):
    # negative indices would silently wrap in numpy; every written pixel
    # must sit next to the continuous segment
    img = new_image(17, 13)
    out = draw_overlay(img, [], [((x0, y0), (x1, y1), (255, 0, 0), thick)])
    for y, x in np.argwhere(out[..., 0] == 255):
        assert _dist_to_segment(x, y, (x0, y0), (x1, y1)) <= thick + 1.0


@settings(max_examples=60)
@given(st.tuples(coord, coord, coord, coord))
def test_boxes_never_wrap(b):
    x0, y0, x1, y1 = min(b[0], b[2]), min(b[1], b[3]), max(b[0], b[2]), max(b[1], b[3])
    img = new_image(17, 13)
    out = draw_overlay(img, [((x0, y0, x1, y1), (255, 0, 0))], [])
    for y, x in np.argwhere(out[..., 0] == 255):
        assert x0 - 1 <= x <= x1 + 1 and y0 - 1 <= y <= y1 + 1
