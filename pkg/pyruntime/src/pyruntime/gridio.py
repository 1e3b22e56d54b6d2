"""FGRID text images and the numeric transforms the science handlers use.

The on-disk format is fixed so any runtime can exchange files: UTF-8 text,
first line ``FGRID 1``, second line ``<height> <width>``, then one line per
row holding ``width`` space-separated decimal numbers. Values are written
with ``repr`` so serialize/parse round trips preserve every bit.

This module is self-contained on purpose: the external runtime must not
depend on the platform package, only on the file format and wire protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

MAGIC = "FGRID 1"

GRID_CONTENT_TYPE = "application/x-fgrid"

DEFAULT_SIGMA = 1.5


class MalformedGrid(Exception):
    """Raised when text does not parse as a well-formed FGRID image."""


@dataclass
class GridImage:
    height: int
    width: int
    pixels: list[float]  # row-major

    def at(self, y: int, x: int) -> float:
        return self.pixels[y * self.width + x]

    def check(self) -> None:
        if self.height <= 0 or self.width <= 0:
            raise MalformedGrid(
                f"grid dimensions must be positive, got {self.height}x{self.width}")
        expected = self.height * self.width
        if len(self.pixels) != expected:
            raise MalformedGrid(
                f"grid holds {len(self.pixels)} pixels, expected {expected}")
        for value in self.pixels:
            if not math.isfinite(value):
                raise MalformedGrid(f"grid contains non-finite value {value!r}")


def parse_grid(text: str) -> GridImage:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise MalformedGrid(f"first line must be {MAGIC!r}")
    if len(lines) < 2:
        raise MalformedGrid("dimension line is missing")
    dims = lines[1].split()
    try:
        height, width = (int(d) for d in dims)
    except ValueError:
        raise MalformedGrid(f"dimension line {lines[1]!r} is not two integers") from None
    body = lines[2:]
    if len(body) < height:
        raise MalformedGrid(f"expected {height} pixel rows, file has {len(body)}")
    pixels: list[float] = []
    for index in range(height):
        cells = body[index].split()
        if len(cells) != width:
            raise MalformedGrid(
                f"row {index} holds {len(cells)} values, expected {width}")
        for cell in cells:
            try:
                pixels.append(float(cell))
            except ValueError:
                raise MalformedGrid(f"row {index}: {cell!r} is not a number") from None
    image = GridImage(height, width, pixels)
    image.check()
    return image


def format_grid(image: GridImage) -> str:
    image.check()
    out = [MAGIC, f"{image.height} {image.width}"]
    for y in range(image.height):
        start = y * image.width
        out.append(" ".join(repr(v) for v in image.pixels[start:start + image.width]))
    return "\n".join(out) + "\n"


def read_grid(path: Path | str) -> GridImage:
    return parse_grid(Path(path).read_text(encoding="utf-8"))


def write_grid(path: Path | str, image: GridImage) -> None:
    Path(path).write_text(format_grid(image), encoding="utf-8")


def gaussian_kernel(sigma: float = DEFAULT_SIGMA) -> list[list[float]]:
    """3x3 kernel sampled from exp(-(dx^2+dy^2)/(2 sigma^2)), sum normalized to 1."""
    raw = [
        [math.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) for dx in (-1, 0, 1)]
        for dy in (-1, 0, 1)
    ]
    total = sum(sum(row) for row in raw)
    return [[w / total for w in row] for row in raw]


def blur(image: GridImage, sigma: float = DEFAULT_SIGMA) -> GridImage:
    """Convolve with the 3x3 Gaussian kernel; borders replicate edge pixels."""
    kernel = gaussian_kernel(sigma)
    h, w = image.height, image.width

    def clamped(y: int, x: int) -> float:
        if y < 0:
            y = 0
        elif y >= h:
            y = h - 1
        if x < 0:
            x = 0
        elif x >= w:
            x = w - 1
        return image.pixels[y * w + x]

    result = [0.0] * (h * w)
    for y in range(h):
        for x in range(w):
            total = 0.0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    total += kernel[dy + 1][dx + 1] * clamped(y + dy, x + dx)
            result[y * w + x] = total
    return GridImage(h, w, result)


def flag(image: GridImage, threshold: float) -> GridImage:
    """Zero out every pixel whose magnitude exceeds the threshold."""
    return GridImage(
        image.height, image.width,
        [0.0 if abs(v) > threshold else v for v in image.pixels],
    )


def calibrate(image: GridImage, gain: float) -> GridImage:
    """Scale every pixel by the gain factor."""
    return GridImage(image.height, image.width, [v * gain for v in image.pixels])
