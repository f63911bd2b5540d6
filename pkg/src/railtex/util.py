"""Small numeric helpers used by several stages."""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError


def round_half_away(x):
    """Round to nearest integer with halves away from zero.

    Used everywhere a real maps to a pixel value so results are
    reproducible across platforms (numpy's default rounds half to even).
    """
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def to_u8(x) -> np.ndarray:
    """Round (half away from zero) and clamp an array into uint8 range."""
    return np.clip(round_half_away(np.asarray(x, dtype=np.float64)), 0, 255).astype(np.uint8)


def require_gray(img, name: str = "image") -> np.ndarray:
    """Validate a grayscale raster: 2-D uint8 with at least one pixel."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise InvalidParameterError(f"{name} must be uint8, got {arr.dtype}")
    return arr


def require_rgb(img, name: str = "image") -> np.ndarray:
    """Validate an RGB raster: H x W x 3 uint8."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty HxWx3 array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise InvalidParameterError(f"{name} must be uint8, got {arr.dtype}")
    return arr
