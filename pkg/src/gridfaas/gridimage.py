"""Plain-text grid images and the transforms the mock science handlers apply.

File format (bit-exact): UTF-8 text, line 1 ``FGRID 1``, line 2
``<height> <width>``, then ``height`` lines of ``width`` space-separated
decimal numbers. Values are written with ``repr`` so a parse/serialize
round trip is byte-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

MAGIC = "FGRID 1"

GRID_CONTENT_TYPE = "application/x-fgrid"

BLUR_SIGMA = 1.5


class MalformedGrid(Exception):
    """Grid file violates the FGRID format."""


@dataclass
class GridImage:
    height: int
    width: int
    pixels: list[float]  # row-major, len == height * width

    def get(self, y: int, x: int) -> float:
        return self.pixels[y * self.width + x]

    def validate(self) -> None:
        if self.height < 1 or self.width < 1:
            raise MalformedGrid(f"dimensions must be positive, got {self.height}x{self.width}")
        if len(self.pixels) != self.height * self.width:
            raise MalformedGrid(
                f"pixel count {len(self.pixels)} != {self.height}x{self.width}"
            )
        for v in self.pixels:
            if not math.isfinite(v):
                raise MalformedGrid(f"non-finite pixel value {v!r}")


def parse_grid(text: str) -> GridImage:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise MalformedGrid(f"missing {MAGIC!r} header")
    if len(lines) < 2:
        raise MalformedGrid("missing dimension line")
    parts = lines[1].split()
    if len(parts) != 2:
        raise MalformedGrid(f"bad dimension line {lines[1]!r}")
    try:
        height, width = int(parts[0]), int(parts[1])
    except ValueError:
        raise MalformedGrid(f"bad dimension line {lines[1]!r}") from None
    rows = lines[2 : 2 + height]
    if len(rows) < height:
        raise MalformedGrid(f"expected {height} rows, found {len(rows)}")
    pixels: list[float] = []
    for i, row in enumerate(rows):
        values = row.split()
        if len(values) != width:
            raise MalformedGrid(f"row {i} has {len(values)} values, expected {width}")
        try:
            pixels.extend(float(v) for v in values)
        except ValueError:
            raise MalformedGrid(f"row {i} has a non-numeric value") from None
    img = GridImage(height, width, pixels)
    img.validate()
    return img


def format_grid(img: GridImage) -> str:
    img.validate()
    lines = [MAGIC, f"{img.height} {img.width}"]
    for y in range(img.height):
        row = img.pixels[y * img.width : (y + 1) * img.width]
        lines.append(" ".join(repr(v) for v in row))
    return "\n".join(lines) + "\n"


def read_grid(path: Path | str) -> GridImage:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise MalformedGrid(f"cannot read {path}: {exc}") from exc
    return parse_grid(text)


def write_grid(path: Path | str, img: GridImage) -> None:
    Path(path).write_text(format_grid(img), encoding="utf-8")


def gaussian_kernel_1d(sigma: float = BLUR_SIGMA) -> list[float]:
    """Normalized 3-tap kernel sampled at offsets -1, 0, 1."""
    weights = [math.exp(-(d * d) / (2.0 * sigma * sigma)) for d in (-1, 0, 1)]
    total = sum(weights)
    return [w / total for w in weights]


def blur(img: GridImage, sigma: float = BLUR_SIGMA) -> GridImage:
    """3x3 Gaussian convolution with edge replication at the borders."""
    k = gaussian_kernel_1d(sigma)
    h, w = img.height, img.width
    out = [0.0] * (h * w)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in (-1, 0, 1):
                yy = min(max(y + dy, 0), h - 1)
                for dx in (-1, 0, 1):
                    xx = min(max(x + dx, 0), w - 1)
                    acc += k[dy + 1] * k[dx + 1] * img.pixels[yy * w + xx]
            out[y * w + x] = acc
    return GridImage(h, w, out)


def flag(img: GridImage, threshold: float) -> GridImage:
    """Zero every pixel whose magnitude exceeds the threshold."""
    out = [0.0 if abs(v) > threshold else v for v in img.pixels]
    return GridImage(img.height, img.width, out)


def calibrate(img: GridImage, gain: float) -> GridImage:
    """Multiply every pixel by the gain."""
    return GridImage(img.height, img.width, [v * gain for v in img.pixels])
