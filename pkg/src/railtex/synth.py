"""Seeded synthetic rail-image generator for desk-scale benchmarks.

Every image shows a bright vertical rail band on dark ground so the Otsu
masking stage has something real to find. The three classes differ in the
band's texture:

* ``healthy``   - smooth vertical gradient plus low Gaussian noise (sigma 4)
* ``junction``  - healthy plus a dark horizontal gap of 6..10 rows
* ``defective`` - healthy plus 3..8 high-contrast speckle blobs and a
  crack polyline

All randomness derives from (seed, class index, image index), so a given
seed always writes a bit-identical tree.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .image_io import save_pgm
from .util import to_u8

CLASS_NAMES = ("defective", "healthy", "junction")

_GROUND_LEVEL = 32.0
_NOISE_SIGMA = 4.0


def generate_synthetic_dataset(out_dir, per_class: int, seed: int, size: tuple[int, int] = (128, 128)) -> Path:
    """Write ``per_class`` PGM images per class under out_dir/<class>/."""
    if per_class < 2:
        raise InvalidParameterError(f"need at least 2 images per class, got {per_class}")
    w, h = size
    if w < 32 or h < 32:
        raise InvalidParameterError(f"image size must be at least 32x32, got {w}x{h}")
    out = Path(out_dir)
    for ci, cname in enumerate(CLASS_NAMES):
        cdir = out / cname
        cdir.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            rng = np.random.default_rng([seed, ci, i])
            img = _render(cname, rng, w, h)
            save_pgm(img, cdir / f"{cname}_{i:04d}.pgm")
    return out


def _render(class_name: str, rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    band_w = int(rng.integers(w // 2, int(w * 0.75) + 1))
    band_x0 = int(rng.integers(w // 16, w - band_w - w // 16 + 1))
    top = rng.uniform(135.0, 175.0)
    bottom = top + rng.uniform(-25.0, 25.0)

    field = np.full((h, w), _GROUND_LEVEL)
    gradient = np.linspace(top, bottom, h)
    field[:, band_x0 : band_x0 + band_w] = gradient[:, None]

    if class_name == "junction":
        gap_h = int(rng.integers(6, 11))
        gap_y = int(rng.integers(h // 8, h - gap_h - h // 8))
        field[gap_y : gap_y + gap_h, band_x0 : band_x0 + band_w] = rng.uniform(8.0, 20.0)
    elif class_name == "defective":
        _add_speckles(field, rng, band_x0, band_w, h)
        _add_crack(field, rng, band_x0, band_w, h)

    field += rng.normal(0.0, _NOISE_SIGMA, size=(h, w))
    return to_u8(field)


def _add_speckles(field: np.ndarray, rng: np.random.Generator, x0: int, bw: int, h: int) -> None:
    n_blobs = int(rng.integers(3, 9))
    yy, xx = np.mgrid[0 : field.shape[0], 0 : field.shape[1]]
    for _ in range(n_blobs):
        cx = rng.integers(x0 + 3, x0 + bw - 3)
        cy = rng.integers(3, h - 3)
        radius = rng.uniform(2.0, 6.0)
        delta = rng.uniform(60.0, 120.0) * (1 if rng.random() < 0.4 else -1)
        blob = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius
        field[blob] += delta


def _add_crack(field: np.ndarray, rng: np.random.Generator, x0: int, bw: int, h: int) -> None:
    """Dark jagged polyline running down the band."""
    x = float(rng.integers(x0 + bw // 4, x0 + 3 * bw // 4))
    y = float(rng.integers(0, h // 4))
    length = int(rng.integers(h // 2, h - 1 - int(y)))
    shade = rng.uniform(10.0, 40.0)
    for _ in range(length):
        xi, yi = int(round(x)), int(round(y))
        if not (0 <= yi < h and x0 <= xi < x0 + bw):
            break
        field[yi, max(xi - 1, 0) : xi + 1] = shade
        y += 1.0
        x += rng.uniform(-1.2, 1.2)
