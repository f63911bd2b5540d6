"""Dataset discovery and the stratified train/test split."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError, ImageIOError, InvalidParameterError
from .image_io import load_image

SUPPORTED_EXTENSIONS = (".png", ".jpg", ".jpeg", ".pgm", ".ppm")


@dataclass(frozen=True)
class DatasetIndex:
    """Deterministic listing of (relative path, class index) entries.

    Class indices follow the lexicographic order of the class directory
    names; files are listed in lexicographic order inside each class.
    """

    root: Path
    entries: tuple[tuple[str, int], ...]
    class_names: tuple[str, ...]

    def paths(self) -> list[Path]:
        return [self.root / rel for rel, _ in self.entries]

    def labels(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=np.int64)


def ingest_dataset(root, verify: bool = False) -> DatasetIndex:
    """Index a tree of one subdirectory per class, each holding images.

    With ``verify`` every file is decoded once and all unreadable files
    are reported together.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root missing or not a directory: {root}")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise DatasetError(f"dataset root holds no class directories: {root}")
    class_names = tuple(p.name for p in class_dirs)
    entries: list[tuple[str, int]] = []
    for idx, cdir in enumerate(class_dirs):
        files = sorted(p for p in cdir.iterdir() if p.suffix.lower() in SUPPORTED_EXTENSIONS)
        if not files:
            raise DatasetError(f"class directory holds no supported images: {cdir}")
        entries.extend((str(p.relative_to(root)), idx) for p in files)

    if verify:
        bad = []
        for rel, _ in entries:
            try:
                load_image(root / rel)
            except ImageIOError as exc:
                bad.append(f"{rel}: {exc}")
        if bad:
            raise DatasetError("unreadable images:\n" + "\n".join(bad))
    return DatasetIndex(root=root, entries=tuple(entries), class_names=class_names)


def stratified_split(index: DatasetIndex, ratio: float, seed: int) -> tuple[list[int], list[int]]:
    """Per-class seeded shuffle; the first ceil(ratio * n_c) go to train.

    Returns disjoint, covering lists of entry indices, deterministic for a
    given seed.
    """
    if not 0.0 < ratio < 1.0:
        raise InvalidParameterError(f"split ratio must be in (0, 1), got {ratio}")
    labels = index.labels()
    train: list[int] = []
    test: list[int] = []
    for c in range(len(index.class_names)):
        members = np.flatnonzero(labels == c)
        if members.size < 2:
            raise DatasetError(f"class '{index.class_names[c]}' has {members.size} images; need >= 2 to split")
        perm = np.random.default_rng([seed, c]).permutation(members.size)
        shuffled = members[perm]
        # small negative nudge so exact products like 0.7*10 never round up
        n_train = int(math.ceil(ratio * members.size - 1e-9))
        n_train = min(max(n_train, 1), members.size)
        train.extend(int(i) for i in shuffled[:n_train])
        test.extend(int(i) for i in shuffled[n_train:])
    return sorted(train), sorted(test)
