"""Flat key=value run configuration.

The file format is one ``key = value`` pair per line; blank lines and
``#`` comments are ignored. Unknown keys are hard errors so typos surface
immediately. Every key has a default; see DEFAULTS.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .preprocess import FilterConfig
from .texture import FeatureConfig


@dataclass(frozen=True)
class RunConfig:
    dataset_root: str = ""
    report_dir: str = "reports"
    model_file: str = "model.json"
    working_width: int = 128
    working_height: int = 128
    mask_mode: str = "otsu"  # "otsu" or "fixed"
    mask_rect: tuple[int, int, int, int] | None = None
    median_window: int = 3
    gaussian_sigma: float = 1.0
    gaussian_ksize: int = 5
    sharpen_alpha: float = 0.5
    ahe_tiles_x: int = 8
    ahe_tiles_y: int = 8
    ahe_clip: float | None = 2.0
    glcm_levels: int = 32
    glcm_distances: tuple[int, ...] = (1,)
    angle_mode: str = "per-angle"
    pca_k: int = 20
    classifier: str = "rf"  # knn | rf | svm | all
    knn_k: int = 5
    rf_trees: int = 100
    rf_max_depth: int = 12
    rf_min_leaf: int = 2
    svm_lambda: float = 1e-3
    svm_epochs: int = 200
    split_ratio: float = 0.7
    seed: int = 42
    workers: int = 1

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            median_window=self.median_window,
            gaussian_sigma=self.gaussian_sigma,
            gaussian_ksize=self.gaussian_ksize,
            sharpen_alpha=self.sharpen_alpha,
            ahe_tiles=(self.ahe_tiles_x, self.ahe_tiles_y),
            ahe_clip=self.ahe_clip,
        )

    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(levels=self.glcm_levels, distances=self.glcm_distances, angle_mode=self.angle_mode)

    def working_size(self) -> tuple[int, int]:
        return (self.working_width, self.working_height)

    def validate(self) -> None:
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError(f"split_ratio must be in (0, 1), got {self.split_ratio}")
        if self.mask_mode not in ("otsu", "fixed"):
            raise ConfigError(f"mask_mode must be 'otsu' or 'fixed', got {self.mask_mode!r}")
        if self.mask_mode == "fixed" and self.mask_rect is None:
            raise ConfigError("mask_mode 'fixed' requires mask_rect = x,y,w,h")
        if self.classifier not in ("knn", "rf", "svm", "all"):
            raise ConfigError(f"classifier must be knn, rf, svm, or all, got {self.classifier!r}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        try:
            self.filter_config().validate()
            self.feature_config().validate()
        except Exception as exc:
            raise ConfigError(str(exc)) from exc


def _parse_bool_none_float(text: str):
    return None if text.lower() in ("none", "off") else float(text)


def _parse_rect(text: str):
    if text.lower() == "none":
        return None
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"expected x,y,w,h, got {text!r}")
    return tuple(int(p) for p in parts)


def _parse_distances(text: str):
    return tuple(int(p.strip()) for p in text.split(",") if p.strip())


_PARSERS = {
    "dataset_root": str,
    "report_dir": str,
    "model_file": str,
    "working_width": int,
    "working_height": int,
    "mask_mode": str,
    "mask_rect": _parse_rect,
    "median_window": int,
    "gaussian_sigma": float,
    "gaussian_ksize": int,
    "sharpen_alpha": float,
    "ahe_tiles_x": int,
    "ahe_tiles_y": int,
    "ahe_clip": _parse_bool_none_float,
    "glcm_levels": int,
    "glcm_distances": _parse_distances,
    "angle_mode": str,
    "pca_k": int,
    "classifier": str,
    "knn_k": int,
    "rf_trees": int,
    "rf_max_depth": int,
    "rf_min_leaf": int,
    "svm_lambda": float,
    "svm_epochs": int,
    "split_ratio": float,
    "seed": int,
    "workers": int,
}


def load_config(path) -> RunConfig:
    """Parse a key = value file into a validated RunConfig."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    overrides = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            overrides[key] = _PARSERS[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    cfg = replace(RunConfig(), **overrides)
    cfg.validate()
    return cfg


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain-JSON view of a config (tuples become lists)."""
    out = {}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def config_from_dict(data: dict) -> RunConfig:
    kwargs = {}
    for f in fields(RunConfig):
        if f.name not in data:
            continue
        value = data[f.name]
        if f.name in ("glcm_distances", "mask_rect") and isinstance(value, list):
            value = tuple(value)
        kwargs[f.name] = value
    cfg = replace(RunConfig(), **kwargs)
    cfg.validate()
    return cfg
