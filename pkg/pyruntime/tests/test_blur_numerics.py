"""Numerics of the Gaussian blur and the other grid transforms.

The convolution oracle here is written straight from the definition —
build the kernel from the Gaussian formula, walk every pixel, clamp
indices at the borders — independent of the library implementation.
"""

from __future__ import annotations

import math
import random

import pytest

from pyruntime.gridio import (
    GridImage,
    MalformedGrid,
    blur,
    calibrate,
    flag,
    format_grid,
    gaussian_kernel,
    parse_grid,
)

SIGMA = 1.5


def oracle_kernel() -> list[list[float]]:
    weights = [[math.exp(-(dx * dx + dy * dy) / (2.0 * SIGMA * SIGMA))
                for dx in (-1, 0, 1)] for dy in (-1, 0, 1)]
    total = sum(sum(row) for row in weights)
    return [[w / total for w in row] for row in weights]


def oracle_convolve(img: GridImage) -> list[float]:
    kernel = oracle_kernel()
    h, w = img.height, img.width
    out = []
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    acc += kernel[dy + 1][dx + 1] * img.pixels[yy * w + xx]
            out.append(acc)
    return out


def rand_grid(rng: random.Random, h: int = 8, w: int = 8) -> GridImage:
    return GridImage(h, w, [rng.uniform(-100.0, 100.0) for _ in range(h * w)])


def max_delta(a: list[float], b: list[float]) -> float:
    return max(abs(x - y) for x, y in zip(a, b))


# --- kernel -------------------------------------------------------------------


def test_kernel_sums_to_one():
    total = sum(sum(row) for row in gaussian_kernel())
    assert abs(total - 1.0) < 1e-12


def test_kernel_ratios_follow_gaussian_formula():
    kernel = gaussian_kernel()
    center, edge, corner = kernel[1][1], kernel[0][1], kernel[0][0]
    assert abs(edge / center - math.exp(-1.0 / (2 * SIGMA * SIGMA))) < 1e-12
    assert abs(corner / center - math.exp(-2.0 / (2 * SIGMA * SIGMA))) < 1e-12
    # symmetry: all four edges equal, all four corners equal
    assert kernel[0][1] == kernel[1][0] == kernel[1][2] == kernel[2][1]
    assert kernel[0][0] == kernel[0][2] == kernel[2][0] == kernel[2][2]


# --- blur ---------------------------------------------------------------------


def test_constant_grid_is_invariant():
    img = GridImage(5, 7, [42.5] * 35)
    out = blur(img)
    assert max(abs(v - 42.5) for v in out.pixels) < 1e-9


def test_blur_matches_direct_convolution_oracle():
    rng = random.Random(31415)
    for _ in range(30):
        img = rand_grid(rng, rng.randint(1, 10), rng.randint(1, 10))
        assert max_delta(blur(img).pixels, oracle_convolve(img)) < 1e-9


def test_blur_linearity_on_random_pairs():
    rng = random.Random(2718)
    for _ in range(50):
        x, y = rand_grid(rng), rand_grid(rng)
        a, b = rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)
        mixed = GridImage(8, 8, [a * u + b * v for u, v in zip(x.pixels, y.pixels)])
        lhs = blur(mixed).pixels
        rhs = [a * u + b * v for u, v in zip(blur(x).pixels, blur(y).pixels)]
        assert max_delta(lhs, rhs) < 1e-9


def test_single_pixel_spread_is_the_kernel():
    img = GridImage(5, 5, [0.0] * 25)
    img.pixels[2 * 5 + 2] = 1.0
    out = blur(img)
    kernel = oracle_kernel()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            assert abs(out.at(2 + dy, 2 + dx) - kernel[dy + 1][dx + 1]) < 1e-12


# --- criterion gate -------------------------------------------------------------


def test_criterion_8_blur_numerics(record_criterion):
    label = ("criterion 8: kernel sum 1e-12, constant invariance, oracle "
             "match on random 8x8, linearity on 50 pairs")
    with record_criterion(label):
        assert abs(sum(sum(r) for r in gaussian_kernel()) - 1.0) < 1e-12

        constant = GridImage(8, 8, [7.25] * 64)
        assert max(abs(v - 7.25) for v in blur(constant).pixels) < 1e-9

        rng = random.Random(20260819)
        img = rand_grid(rng)
        assert max_delta(blur(img).pixels, oracle_convolve(img)) < 1e-9

        for _ in range(50):
            x, y = rand_grid(rng), rand_grid(rng)
            a, b = rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)
            mixed = GridImage(8, 8, [a * u + b * v
                                     for u, v in zip(x.pixels, y.pixels)])
            rhs = [a * u + b * v
                   for u, v in zip(blur(x).pixels, blur(y).pixels)]
            assert max_delta(blur(mixed).pixels, rhs) < 1e-9


# --- other transforms ------------------------------------------------------------


def test_flag_is_idempotent_exactly():
    rng = random.Random(99)
    img = rand_grid(rng)
    once = flag(img, 40.0)
    twice = flag(once, 40.0)
    assert twice.pixels == once.pixels


def test_flag_keeps_values_at_threshold():
    img = GridImage(1, 3, [40.0, -40.0, 40.0001])
    assert flag(img, 40.0).pixels == [40.0, -40.0, 0.0]


def test_calibrate_composition():
    rng = random.Random(7)
    img = rand_grid(rng)
    left = calibrate(calibrate(img, 1.3), 0.7)
    right = calibrate(img, 1.3 * 0.7)
    assert max_delta(left.pixels, right.pixels) < 1e-9


# --- file format -----------------------------------------------------------------


def test_format_parse_round_trip_is_byte_stable():
    rng = random.Random(5)
    img = rand_grid(rng, 4, 6)
    text = format_grid(img)
    again = parse_grid(text)
    assert again.pixels == img.pixels
    assert format_grid(again) == text


@pytest.mark.parametrize("text", [
    "",
    "GRID 1\n2 2\n1 2\n3 4\n",
    "FGRID 1\n",
    "FGRID 1\ntwo two\n",
    "FGRID 1\n2\n1 2\n",
    "FGRID 1\n2 2\n1 2\n",
    "FGRID 1\n2 2\n1 2 3\n4 5 6\n",
    "FGRID 1\n1 2\n1 banana\n",
    "FGRID 1\n1 1\nnan\n",
    "FGRID 1\n0 4\n",
])
def test_malformed_grids_rejected(text):
    with pytest.raises(MalformedGrid):
        parse_grid(text)
