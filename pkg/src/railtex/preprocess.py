"""Rail-region masking, filtering, and contrast enhancement.

The full stack, in the order ``preprocess_pipeline`` applies it:
mask + crop, resize to the working dimensions, median filter, Gaussian
blur, Laplacian sharpening, then contrast-limited adaptive histogram
equalization. Every kernel uses clamped edge replication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateImageError,
    DimensionMismatchError,
    EmptyMaskError,
    InvalidParameterError,
    StageError,
)
from .image_io import resize
from .util import require_gray, to_u8


@dataclass(frozen=True)
class FilterConfig:
    """Parameters for the filter stack.

    ``ahe_clip`` is a multiple of the average tile histogram height;
    ``None`` disables clipping. A median window of 1, a Gaussian ksize of
    1, and a sharpen alpha of 0 each make the corresponding stage a no-op.
    """

    median_window: int = 3
    gaussian_sigma: float = 1.0
    gaussian_ksize: int = 5
    sharpen_alpha: float = 0.5
    ahe_tiles: tuple[int, int] = (8, 8)
    ahe_clip: float | None = 2.0

    def validate(self) -> None:
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise InvalidParameterError(f"median_window must be odd and >= 1, got {self.median_window}")
        if self.gaussian_sigma <= 0:
            raise InvalidParameterError(f"gaussian_sigma must be > 0, got {self.gaussian_sigma}")
        if self.gaussian_ksize < 1 or self.gaussian_ksize % 2 == 0:
            raise InvalidParameterError(f"gaussian_ksize must be odd and >= 1, got {self.gaussian_ksize}")
        if self.sharpen_alpha < 0:
            raise InvalidParameterError(f"sharpen_alpha must be >= 0, got {self.sharpen_alpha}")
        tx, ty = self.ahe_tiles
        if tx < 1 or ty < 1:
            raise InvalidParameterError(f"ahe_tiles must be >= 1x1, got {tx}x{ty}")
        if self.ahe_clip is not None and self.ahe_clip < 1:
            raise InvalidParameterError(f"ahe_clip must be >= 1 or None, got {self.ahe_clip}")


def histogram(img: np.ndarray) -> np.ndarray:
    """256-bin gray-level histogram as int64 counts."""
    return np.bincount(require_gray(img).ravel(), minlength=256).astype(np.int64)


def otsu_threshold(img: np.ndarray) -> int:
    """Threshold maximizing between-class variance over the 256-bin histogram.

    Class 0 is pixels <= t, class 1 pixels > t. The score
    w0*w1*(mu0-mu1)^2 is compared in exact integer arithmetic so ties
    break to the smallest t identically on every platform. Raises
    DegenerateImageError when all pixels share one value.
    """
    hist = histogram(img)
    total = int(hist.sum())
    weighted = int(np.dot(hist, np.arange(256, dtype=np.int64)))

    # score(t) = (s0*n1 - s1*n0)^2 / (n0*n1), up to the constant 1/total^2
    best_t = -1
    best_num = 0  # numerator of best score
    best_den = 1
    n0 = 0
    s0 = 0
    for t in range(255):
        n0 += int(hist[t])
        s0 += t * int(hist[t])
        n1 = total - n0
        s1 = weighted - s0
        if n0 == 0 or n1 == 0:
            continue
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_num, best_den, best_t = num, den, t
    if best_t < 0 or best_num == 0:
        raise DegenerateImageError("all pixels share one gray level; no threshold split exists")
    return best_t


def make_mask(img: np.ndarray, mode: str = "otsu", rect: tuple[int, int, int, int] | None = None) -> np.ndarray:
    """Boolean rail-region mask: Otsu foreground (> threshold) or a fixed rectangle."""
    gray = require_gray(img)
    h, w = gray.shape
    if mode == "otsu":
        t = otsu_threshold(gray)
        mask = gray > t
        if not mask.any():
            raise EmptyMaskError("otsu mask has no foreground pixels")
        return mask
    if mode == "fixed":
        if rect is None:
            raise InvalidParameterError("fixed mask mode requires a rectangle")
        x, y, rw, rh = rect
        if rw < 1 or rh < 1 or x < 0 or y < 0 or x + rw > w or y + rh > h:
            raise InvalidParameterError(f"rectangle {rect} does not fit inside {w}x{h} image")
        mask = np.zeros((h, w), dtype=bool)
        mask[y : y + rh, x : x + rw] = True
        return mask
    raise InvalidParameterError(f"unknown mask mode {mode!r}")


def apply_mask(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Crop to the tight bounding box of true pixels; zero false pixels inside it."""
    gray = require_gray(img)
    m = np.asarray(mask, dtype=bool)
    if m.shape != gray.shape:
        raise DimensionMismatchError(f"mask shape {m.shape} != image shape {gray.shape}")
    rows = np.flatnonzero(m.any(axis=1))
    cols = np.flatnonzero(m.any(axis=0))
    if rows.size == 0:
        raise EmptyMaskError("mask has no true pixels")
    r0, r1 = rows[0], rows[-1] + 1
    c0, c1 = cols[0], cols[-1] + 1
    out = gray[r0:r1, c0:c1].copy()
    out[~m[r0:r1, c0:c1]] = 0
    return out


def median_filter(img: np.ndarray, window: int) -> np.ndarray:
    """Median over a window x window neighborhood with clamped edges."""
    gray = require_gray(img)
    if window % 2 == 0 or window < 1:
        raise InvalidParameterError(f"median window must be odd, got {window}")
    if window > min(gray.shape):
        raise InvalidParameterError(f"window {window} exceeds image {gray.shape[1]}x{gray.shape[0]}")
    if window == 1:
        return gray.copy()
    return np.median(_window_stack(gray, window), axis=0).astype(np.uint8)


def gaussian_blur(img: np.ndarray, sigma: float, ksize: int) -> np.ndarray:
    """Separable normalized Gaussian with clamped edge replication."""
    gray = require_gray(img)
    if sigma <= 0 or ksize < 1 or ksize % 2 == 0:
        raise InvalidParameterError(f"invalid kernel: sigma={sigma}, ksize={ksize} (need sigma>0, odd ksize)")
    if ksize == 1:
        return gray.copy()
    half = ksize // 2
    taps = np.exp(-np.arange(-half, half + 1, dtype=np.float64) ** 2 / (2.0 * sigma * sigma))
    taps /= taps.sum()
    blurred = _convolve_separable(gray.astype(np.float64), taps)
    return to_u8(blurred)


_LAPLACIAN = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)


def laplacian_sharpen(img: np.ndarray, alpha: float) -> np.ndarray:
    """out = clamp(img - alpha * laplacian(img)); alpha 0 returns the input."""
    gray = require_gray(img)
    if alpha < 0:
        raise InvalidParameterError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0:
        return gray.copy()
    padded = np.pad(gray.astype(np.float64), 1, mode="edge")
    lap = (
        padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
        - 4.0 * padded[1:-1, 1:-1]
    )
    return to_u8(gray.astype(np.float64) - alpha * lap)


def adaptive_hist_eq(img: np.ndarray, tiles: tuple[int, int] = (8, 8), clip: float | None = 2.0) -> np.ndarray:
    """Tile-wise histogram equalization with clip limiting and bilinear blending.

    Each tile gets the cdf mapping m(v) = 255*(cdf(v)-cdf_min)/(N-cdf_min)
    (identity when the tile holds a single gray level); pixel outputs blend
    the four surrounding tile mappings by distance to the tile centers.
    With a 1x1 grid and no clip this is exactly global histogram
    equalization. ``clip`` >= 1 caps each histogram bin at clip times the
    average bin height, redistributing the excess uniformly.
    """
    gray = require_gray(img)
    tx, ty = tiles
    if tx < 1 or ty < 1:
        raise InvalidParameterError(f"tile grid must be >= 1x1, got {tx}x{ty}")
    if clip is not None and clip < 1:
        raise InvalidParameterError(f"clip must be >= 1 or None, got {clip}")
    h, w = gray.shape
    tx = min(tx, w)  # never more tiles than pixels along an axis
    ty = min(ty, h)

    row_edges = _tile_edges(h, ty)
    col_edges = _tile_edges(w, tx)
    mappings = np.empty((ty, tx, 256), dtype=np.float64)
    for r in range(ty):
        for c in range(tx):
            tile = gray[row_edges[r] : row_edges[r + 1], col_edges[c] : col_edges[c + 1]]
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.int64)
            if clip is not None:
                hist = _clip_histogram(hist, clip)
            mappings[r, c] = _equalization_mapping(hist)

    r0, r1, wy = _blend_coords(h, row_edges)
    c0, c1, wx = _blend_coords(w, col_edges)
    v = gray  # uint8 values index the 256-entry mappings directly
    top = mappings[r0[:, None], c0[None, :], v] * (1.0 - wx)[None, :] + mappings[r0[:, None], c1[None, :], v] * wx[None, :]
    bot = mappings[r1[:, None], c0[None, :], v] * (1.0 - wx)[None, :] + mappings[r1[:, None], c1[None, :], v] * wx[None, :]
    blended = top * (1.0 - wy)[:, None] + bot * wy[:, None]
    return to_u8(blended)


def histogram_match(img: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Monotone gray-level mapping sending img's cdf onto the reference cdf.

    Each level maps to the reference level whose cdf value is closest,
    ties to the lower level.
    """
    gray = require_gray(img)
    ref = require_gray(reference, "reference")
    cdf_img = np.cumsum(histogram(gray)) / gray.size
    cdf_ref = np.cumsum(histogram(ref)) / ref.size
    # argmin returns the first (lowest) level on ties
    mapping = np.argmin(np.abs(cdf_ref[None, :] - cdf_img[:, None]), axis=1).astype(np.uint8)
    return mapping[gray]


def preprocess_pipeline(
    img: np.ndarray,
    cfg: FilterConfig,
    mask_mode: str = "otsu",
    mask_rect: tuple[int, int, int, int] | None = None,
    working_size: tuple[int, int] = (128, 128),
) -> np.ndarray:
    """Run mask+crop, resize, median, Gaussian, sharpen, AHE, in that order.

    When the Otsu mask degenerates (single gray level or empty foreground)
    the stage falls back to the fixed rectangle, or to the full frame when
    none is configured. Stage failures re-raise as StageError naming the
    stage.
    """
    cfg.validate()
    gray = require_gray(img)
    ww, wh = working_size
    if ww < 1 or wh < 1:
        raise InvalidParameterError(f"working size must be >= 1x1, got {ww}x{wh}")

    def stage(name, fn, *args):
        try:
            return fn(*args)
        except Exception as exc:
            raise StageError(name, exc) from exc

    def masked(image):
        if mask_mode == "otsu":
            try:
                return apply_mask(image, make_mask(image, "otsu"))
            except (DegenerateImageError, EmptyMaskError):
                pass  # static camera: fall back to the configured rectangle
        rect = mask_rect
        if rect is None:
            rect = (0, 0, image.shape[1], image.shape[0])
        return apply_mask(image, make_mask(image, "fixed", rect))

    out = stage("mask", masked, gray)
    out = stage("resize", resize, out, ww, wh)
    out = stage("median", median_filter, out, cfg.median_window)
    out = stage("gaussian", gaussian_blur, out, cfg.gaussian_sigma, cfg.gaussian_ksize)
    out = stage("sharpen", laplacian_sharpen, out, cfg.sharpen_alpha)
    out = stage("equalize", adaptive_hist_eq, out, cfg.ahe_tiles, cfg.ahe_clip)
    return out


def _window_stack(gray: np.ndarray, window: int) -> np.ndarray:
    half = window // 2
    padded = np.pad(gray, half, mode="edge")
    h, w = gray.shape
    layers = [
        padded[dy : dy + h, dx : dx + w]
        for dy in range(window)
        for dx in range(window)
    ]
    return np.stack(layers)


def _convolve_separable(f: np.ndarray, taps: np.ndarray) -> np.ndarray:
    half = taps.size // 2
    h, w = f.shape
    padded = np.pad(f, ((0, 0), (half, half)), mode="edge")
    horiz = np.zeros_like(f)
    for i, t in enumerate(taps):
        horiz += t * padded[:, i : i + w]
    padded = np.pad(horiz, ((half, half), (0, 0)), mode="edge")
    out = np.zeros_like(f)
    for i, t in enumerate(taps):
        out += t * padded[i : i + h, :]
    return out


def _tile_edges(extent: int, n_tiles: int) -> np.ndarray:
    return np.round(np.linspace(0, extent, n_tiles + 1)).astype(np.intp)


def _clip_histogram(hist: np.ndarray, clip: float) -> np.ndarray:
    n = int(hist.sum())
    limit = max(1, int(clip * n / 256.0))
    over = hist > limit
    excess = int((hist[over] - limit).sum())
    if excess == 0:
        return hist
    out = hist.copy()
    out[over] = limit
    out += excess // 256
    residual = excess % 256
    if residual:
        step = max(256 // residual, 1)
        out[: residual * step : step] += 1
    return out


def _equalization_mapping(hist: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(hist, dtype=np.int64)
    n = int(cdf[-1])
    occupied = np.flatnonzero(hist)
    cdf_min = int(cdf[occupied[0]])
    if cdf_min == n:
        # single occupied bin: keep the level unchanged
        return np.arange(256, dtype=np.float64)
    return 255.0 * (cdf - cdf_min) / (n - cdf_min)


def _blend_coords(extent: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pixel lower/upper tile indices and blend weight along one axis."""
    centers = (edges[:-1] + edges[1:] - 1) / 2.0
    pos = np.arange(extent, dtype=np.float64)
    upper = np.searchsorted(centers, pos, side="right")
    i1 = np.clip(upper, 0, centers.size - 1)
    i0 = np.clip(upper - 1, 0, centers.size - 1)
    span = centers[i1] - centers[i0]
    with np.errstate(invalid="ignore", divide="ignore"):
        weight = np.where(span > 0, (pos - centers[i0]) / np.where(span > 0, span, 1.0), 0.0)
    return i0.astype(np.intp), i1.astype(np.intp), np.clip(weight, 0.0, 1.0)
