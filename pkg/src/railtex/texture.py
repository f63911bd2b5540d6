"""Gray-level co-occurrence matrices and the texture features built on them.

A GLCM counts how often gray-level pairs occur at a fixed pixel
displacement. Features are extracted at the four standard directions
(0, 45, 90, 135 degrees) with distance 1 by default, on rasters quantized
to a reduced number of gray levels, plus six first-order histogram
statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .util import require_gray

ANGLES = (0, 45, 90, 135)
GLCM_FEATURES = ("contrast", "correlation", "energy", "homogeneity", "entropy")
FIRST_ORDER_NAMES = ("fo_mean", "fo_std", "fo_smoothness", "fo_skewness", "fo_uniformity", "fo_entropy")

_DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class Glcm:
    """Co-occurrence counts and probabilities for one displacement.

    Attributes
    ----------
    levels : int
        Number of gray levels G; counts and probs are G x G.
    counts : np.ndarray
        Non-negative int64 pair counts.
    probs : np.ndarray
        counts / counts.sum(); sums to 1.
    offset : tuple[int, int]
        (dx, dy) displacement, y increasing downward.
    symmetric : bool
        True when counts include the transposed pairs.
    """

    levels: int
    counts: np.ndarray
    probs: np.ndarray
    offset: tuple[int, int]
    symmetric: bool


@dataclass(frozen=True)
class FeatureConfig:
    """Feature extraction settings: quantization levels, distances, angle mode."""

    levels: int = 32
    distances: tuple[int, ...] = (1,)
    angle_mode: str = "per-angle"  # or "averaged"

    def validate(self) -> None:
        if not 2 <= self.levels <= 256:
            raise InvalidParameterError(f"levels must be in [2, 256], got {self.levels}")
        if not self.distances or any(d < 1 for d in self.distances):
            raise InvalidParameterError(f"distances must be >= 1, got {self.distances}")
        if self.angle_mode not in ("per-angle", "averaged"):
            raise InvalidParameterError(f"angle_mode must be 'per-angle' or 'averaged', got {self.angle_mode!r}")


@dataclass(frozen=True)
class FeatureVector:
    """Ordered feature values plus their schema for one image."""

    values: np.ndarray
    schema: tuple[str, ...]
    image_id: str = ""

    def __post_init__(self):
        if len(self.values) != len(self.schema):
            raise InvalidParameterError(
                f"values ({len(self.values)}) and schema ({len(self.schema)}) lengths differ"
            )


@dataclass(frozen=True)
class FirstOrderStats:
    """First-order statistics of the 256-bin gray histogram."""

    mean: float
    std: float
    smoothness: float
    skewness: float
    uniformity: float
    entropy: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.mean, self.std, self.smoothness, self.skewness, self.uniformity, self.entropy)


def quantize(img: np.ndarray, levels: int) -> np.ndarray:
    """Map 8-bit values onto 0..levels-1 via v -> floor(v * levels / 256)."""
    gray = require_gray(img)
    if not 2 <= levels <= 256:
        raise InvalidParameterError(f"levels must be in [2, 256], got {levels}")
    return ((gray.astype(np.int64) * levels) >> 8).astype(np.uint8) if levels != 256 else gray.copy()


def angle_to_offset(angle: int, d: int = 1) -> tuple[int, int]:
    """(dx, dy) for one of the four supported directions, y increasing downward."""
    if d < 1:
        raise InvalidParameterError(f"distance must be >= 1, got {d}")
    offsets = {0: (d, 0), 45: (d, -d), 90: (0, -d), 135: (-d, -d)}
    try:
        return offsets[angle]
    except KeyError:
        raise InvalidParameterError(f"unsupported angle {angle}, need one of {ANGLES}") from None


def compute_glcm(q: np.ndarray, dx: int, dy: int, levels: int, symmetric: bool = True) -> Glcm:
    """Count gray-level pairs at displacement (dx, dy) over a quantized raster.

    counts[a][b] is the number of positions (x, y) with q(x, y) = a and
    q(x+dx, y+dy) = b, both in bounds. With ``symmetric`` the transposed
    counts are added, making the matrix equal to its own transpose.
    """
    raster = np.asarray(q)
    if raster.ndim != 2 or raster.size == 0:
        raise InvalidParameterError(f"raster must be 2-D and non-empty, got shape {raster.shape}")
    h, w = raster.shape
    if (dx, dy) == (0, 0):
        raise InvalidParameterError("offset must be nonzero")
    if abs(dx) >= w or abs(dy) >= h:
        raise InvalidParameterError(f"offset ({dx}, {dy}) leaves no valid pairs in a {w}x{h} raster")
    if raster.max() >= levels:
        raise InvalidParameterError(f"raster value {raster.max()} exceeds levels-1 = {levels - 1}")

    x0, x1 = max(0, -dx), w - max(0, dx)
    y0, y1 = max(0, -dy), h - max(0, dy)
    a = raster[y0:y1, x0:x1].astype(np.int64).ravel()
    b = raster[y0 + dy : y1 + dy, x0 + dx : x1 + dx].astype(np.int64).ravel()

    counts = np.zeros((levels, levels), dtype=np.int64)
    np.add.at(counts, (a, b), 1)
    if symmetric:
        counts = counts + counts.T
    probs = counts / counts.sum()
    return Glcm(levels=levels, counts=counts, probs=probs, offset=(dx, dy), symmetric=symmetric)


def _checked_probs(g: Glcm) -> np.ndarray:
    p = g.probs
    total = float(p.sum())
    if g.counts.sum() == 0 or total == 0.0:
        raise InvalidParameterError("empty co-occurrence matrix")
    if abs(total - 1.0) > 1e-9:
        raise InvalidParameterError(f"probabilities sum to {total}, not 1; normalize first")
    return p


def glcm_contrast(g: Glcm) -> float:
    """Sum of (i - j)^2 * p[i, j]; zero only when all mass is diagonal."""
    p = _checked_probs(g)
    idx = np.arange(g.levels, dtype=np.float64)
    diff = idx[:, None] - idx[None, :]
    return float(np.sum(diff * diff * p))


def glcm_correlation(g: Glcm) -> float:
    """Sum of (i - mu)(j - mu) p[i, j] / sigma^2 over the marginal moments.

    Defined for symmetric matrices only, where row and column marginals
    coincide. Returns 0.0 when the marginal variance is degenerate
    (below 1e-12), the documented convention for constant regions.
    """
    if not g.symmetric:
        raise InvalidParameterError("correlation requires a symmetric co-occurrence matrix")
    p = _checked_probs(g)
    idx = np.arange(g.levels, dtype=np.float64)
    marginal = p.sum(axis=1)
    mu = float(np.dot(idx, marginal))
    sigma2 = float(np.dot((idx - mu) ** 2, marginal))
    if sigma2 < _DEGENERATE_EPS:
        return 0.0
    centered = idx - mu
    return float(np.sum(centered[:, None] * centered[None, :] * p) / sigma2)


def glcm_energy(g: Glcm) -> float:
    """Sum of squared probabilities; 1 when the mass sits in a single cell."""
    p = _checked_probs(g)
    return float(np.sum(p * p))


def glcm_homogeneity(g: Glcm) -> float:
    """Sum of p[i, j] / (1 + |i - j|)."""
    p = _checked_probs(g)
    idx = np.arange(g.levels, dtype=np.float64)
    return float(np.sum(p / (1.0 + np.abs(idx[:, None] - idx[None, :]))))


def glcm_entropy(g: Glcm) -> float:
    """Shannon entropy -sum p ln p over nonzero cells, natural log."""
    p = _checked_probs(g)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


_FEATURE_FNS = {
    "contrast": glcm_contrast,
    "correlation": glcm_correlation,
    "energy": glcm_energy,
    "homogeneity": glcm_homogeneity,
    "entropy": glcm_entropy,
}


def first_order_stats(img: np.ndarray) -> FirstOrderStats:
    """Mean, std, smoothness, skewness, uniformity, entropy of the histogram.

    Smoothness is 1 - 1/(1 + variance) with intensities on the 0..255
    scale; skewness is the standardized third moment (0 for constant
    images); entropy uses the natural log.
    """
    gray = require_gray(img)
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    p = hist / hist.sum()
    v = np.arange(256, dtype=np.float64)
    mean = float(np.dot(v, p))
    var = float(np.dot((v - mean) ** 2, p))
    std = math.sqrt(var)
    smoothness = 1.0 - 1.0 / (1.0 + var)
    skewness = float(np.dot(((v - mean) / std) ** 3, p)) if std > 0 else 0.0
    uniformity = float(np.dot(p, p))
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    return FirstOrderStats(mean, std, smoothness, skewness, uniformity, entropy)


def feature_schema(cfg: FeatureConfig) -> tuple[str, ...]:
    """Ordered feature names for a configuration; identical for every image."""
    cfg.validate()
    names: list[str] = []
    for d in cfg.distances:
        suffix = "" if d == 1 else f":d{d}"
        if cfg.angle_mode == "per-angle":
            for angle in ANGLES:
                for feat in GLCM_FEATURES:
                    names.append(f"{feat}@{angle}{suffix}")
        else:
            for feat in GLCM_FEATURES:
                names.append(f"{feat}{suffix}")
    names.extend(FIRST_ORDER_NAMES)
    return tuple(names)


def extract_features(img: np.ndarray, cfg: FeatureConfig, image_id: str = "") -> FeatureVector:
    """Compute the texture feature vector for one preprocessed image.

    For each configured distance and each of the four angles, builds the
    symmetric GLCM and evaluates contrast, correlation, energy,
    homogeneity, and entropy. In "per-angle" mode (default) all four
    angles are emitted separately; "averaged" mode emits their mean. The
    six first-order statistics are appended. Deterministic: identical
    input yields a bit-identical vector.
    """
    cfg.validate()
    gray = require_gray(img)
    q = quantize(gray, cfg.levels)
    values: list[float] = []
    for d in cfg.distances:
        per_angle = np.empty((len(ANGLES), len(GLCM_FEATURES)), dtype=np.float64)
        for ai, angle in enumerate(ANGLES):
            dx, dy = angle_to_offset(angle, d)
            g = compute_glcm(q, dx, dy, cfg.levels, symmetric=True)
            per_angle[ai] = [_FEATURE_FNS[feat](g) for feat in GLCM_FEATURES]
        if cfg.angle_mode == "per-angle":
            values.extend(per_angle.ravel())
        else:
            values.extend(per_angle.mean(axis=0))
    values.extend(first_order_stats(gray).as_tuple())
    return FeatureVector(values=np.array(values, dtype=np.float64), schema=feature_schema(cfg), image_id=image_id)
