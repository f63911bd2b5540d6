"""Image loading, grayscale conversion, resizing, and PGM/PPM persistence.

Rasters are plain numpy arrays: grayscale images are ``(H, W) uint8``,
RGB images ``(H, W, 3) uint8``. Readers accept PNG, JPEG, binary PGM (P5)
and binary PPM (P6); the writer emits binary PGM/PPM.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageIOError, InvalidParameterError
from .util import require_gray, require_rgb, to_u8

# ITU-R BT.601 luma weights.
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8"


def load_image(path) -> np.ndarray:
    """Decode an image file into an (H, W, 3) uint8 RGB array.

    Grayscale sources are replicated across the three channels. Raises
    ImageIOError with kind "file-missing", "unsupported-format", or
    "corrupt-data".
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        raise ImageIOError("file-missing", path) from None
    except OSError as exc:
        raise ImageIOError("io-failure", path, str(exc)) from exc

    if data.startswith(b"P5") or data.startswith(b"P6"):
        return _decode_pnm(data, path)
    if data.startswith(_PNG_MAGIC) or data.startswith(_JPEG_MAGIC):
        return _decode_with_pillow(data, path)
    raise ImageIOError("unsupported-format", path, "not PNG, JPEG, PGM (P5), or PPM (P6)")


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Convert RGB to 8-bit luminance: round(0.299 r + 0.587 g + 0.114 b)."""
    rgb = require_rgb(img).astype(np.float64)
    luma = _LUMA_R * rgb[..., 0] + _LUMA_G * rgb[..., 1] + _LUMA_B * rgb[..., 2]
    return to_u8(luma)


def resize(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize with edge clamping onto a width x height grid.

    Uses the align-corners mapping, so resizing to the source dimensions
    returns a pixel-identical image.
    """
    src = require_gray(img)
    if width < 1 or height < 1:
        raise InvalidParameterError(f"target dimensions must be >= 1, got {width}x{height}")
    src_h, src_w = src.shape
    if (src_w, src_h) == (width, height):
        return src.copy()

    fx = _source_coords(width, src_w)
    fy = _source_coords(height, src_h)
    x0 = np.floor(fx).astype(np.intp)
    y0 = np.floor(fy).astype(np.intp)
    x1 = np.minimum(x0 + 1, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    tx = fx - x0
    ty = fy - y0

    f = src.astype(np.float64)
    top = f[y0[:, None], x0[None, :]] * (1.0 - tx) + f[y0[:, None], x1[None, :]] * tx
    bot = f[y1[:, None], x0[None, :]] * (1.0 - tx) + f[y1[:, None], x1[None, :]] * tx
    out = top * (1.0 - ty)[:, None] + bot * ty[:, None]
    return to_u8(out)


def _source_coords(n_dst: int, n_src: int) -> np.ndarray:
    if n_dst == 1:
        return np.full(1, (n_src - 1) / 2.0)
    return np.arange(n_dst, dtype=np.float64) * ((n_src - 1) / (n_dst - 1))


def save_pgm(img: np.ndarray, path) -> None:
    """Write a grayscale raster as binary PGM (P5), maxval 255."""
    gray = require_gray(img)
    h, w = gray.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    _write_bytes(path, header + gray.tobytes())


def save_ppm(img: np.ndarray, path) -> None:
    """Write an RGB raster as binary PPM (P6), maxval 255."""
    rgb = require_rgb(img)
    h, w = rgb.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    _write_bytes(path, header + rgb.tobytes())


def _write_bytes(path, payload: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise ImageIOError("io-failure", path, str(exc)) from exc


def _decode_with_pillow(data: bytes, path) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ImageIOError("unsupported-format", path, str(exc)) from exc
    except OSError as exc:
        raise ImageIOError("corrupt-data", path, str(exc)) from exc
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ImageIOError("corrupt-data", path, f"decoded shape {arr.shape}")
    return arr


def _decode_pnm(data: bytes, path) -> np.ndarray:
    magic = data[:2].decode("ascii")
    channels = 1 if magic == "P5" else 3
    try:
        width, height, maxval, offset = _parse_pnm_header(data)
    except ValueError as exc:
        raise ImageIOError("corrupt-data", path, str(exc)) from exc
    if maxval != 255:
        raise ImageIOError("unsupported-format", path, f"maxval {maxval}, only 255 supported")
    expected = width * height * channels
    payload = data[offset : offset + expected]
    if len(payload) < expected:
        raise ImageIOError("corrupt-data", path, f"payload {len(payload)} bytes, expected {expected}")
    arr = np.frombuffer(payload, dtype=np.uint8)
    if channels == 1:
        gray = arr.reshape(height, width)
        return np.repeat(gray[:, :, None], 3, axis=2)
    return arr.reshape(height, width, 3).copy()


def _parse_pnm_header(data: bytes) -> tuple[int, int, int, int]:
    """Return (width, height, maxval, payload offset) for a P5/P6 header."""
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        # skip whitespace and '#' comments
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ValueError(f"bad header token {token!r}")
        fields.append(int(token))
    if pos >= len(data):
        raise ValueError("header ends before payload")
    pos += 1  # exactly one whitespace byte separates header from payload
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ValueError(f"bad dimensions {width}x{height}")
    return width, height, maxval, pos
