"""KNN, random forest, and linear SVM over reduced feature vectors.

All three training routines are deterministic given (data, params, seed):
randomness flows from the run seed expanded per-tree / per-epoch through
numpy SeedSequences, never from global state. Tie rules are fixed:
prediction ties resolve to the lowest class index, KNN vote ties to the
nearest neighbor among the tied classes, and split-score ties to the
lowest (feature, threshold) pair. Forest split scores are compared in
exact integer arithmetic so the chosen split never depends on float
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, TooFewSamplesError

_STD_GUARD = 1e-12


@dataclass(frozen=True)
class Standardizer:
    """Per-coordinate means and stds; near-zero stds are stored as 1."""

    means: np.ndarray
    stds: np.ndarray


@dataclass(frozen=True)
class LabeledSet:
    """Feature matrix with class indices and the class-name table."""

    X: np.ndarray
    y: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise InvalidParameterError(f"X {X.shape} and y {y.shape} do not describe one sample per row")
        if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise InvalidParameterError("labels out of range for class_names")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


def fit_standardizer(X: np.ndarray) -> Standardizer:
    """Column means and unbiased (n-1) stds, with the near-zero guard."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewSamplesError(f"standardizer needs >= 2 samples, got shape {X.shape}")
    means = X.mean(axis=0)
    stds = X.std(axis=0, ddof=1)
    stds = np.where(stds < _STD_GUARD, 1.0, stds)
    return Standardizer(means=means, stds=stds)


def apply_standardizer(s: Standardizer, x: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - s.means) / s.stds


# --------------------------------------------------------------------------
# k-nearest neighbors
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int
    n_classes: int


def fit_knn(train: LabeledSet, k: int = 5) -> KnnModel:
    n = train.X.shape[0]
    if n == 0:
        raise TooFewSamplesError("empty training set")
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    if k > n:
        raise InvalidParameterError(f"k = {k} exceeds the training size {n}")
    return KnnModel(X=train.X.copy(), y=train.y.copy(), k=k, n_classes=train.n_classes)


def _knn_neighbors(m: KnnModel, x: np.ndarray) -> np.ndarray:
    d2 = np.sum((m.X - np.asarray(x, dtype=np.float64)) ** 2, axis=1)
    # stable sort: equal distances keep the lower row index first
    return np.argsort(d2, kind="stable")


def knn_vote_counts(m: KnnModel, x: np.ndarray) -> np.ndarray:
    """Class vote counts among the k nearest training rows."""
    order = _knn_neighbors(m, x)
    return np.bincount(m.y[order[: m.k]], minlength=m.n_classes)


def predict_knn(m: KnnModel, x: np.ndarray) -> int:
    """Majority vote; vote ties go to the nearest neighbor among tied classes."""
    order = _knn_neighbors(m, x)
    votes = np.bincount(m.y[order[: m.k]], minlength=m.n_classes)
    best = votes.max()
    tied = np.flatnonzero(votes == best)
    if tied.size == 1:
        return int(tied[0])
    tied_set = set(int(c) for c in tied)
    for idx in order[: m.k]:
        if int(m.y[idx]) in tied_set:
            return int(m.y[idx])
    return int(tied[0])  # unreachable: some tied class appears among the k


# --------------------------------------------------------------------------
# random forest
# --------------------------------------------------------------------------

@dataclass
class TreeNode:
    """Internal node (feature, threshold, children) or leaf (class counts)."""

    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    counts: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.counts is not None


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeNode, ...]
    n_trees: int
    max_depth: int
    min_leaf: int
    mtry: int
    seed: int
    n_classes: int


def default_mtry(d: int) -> int:
    """round(sqrt(d)), at least 1 and at most d."""
    return max(1, min(d, int(math.floor(math.sqrt(d) + 0.5))))


def fit_rf(
    train: LabeledSet,
    n_trees: int = 100,
    max_depth: int = 12,
    min_leaf: int = 2,
    mtry: int | None = None,
    seed: int = 0,
) -> ForestModel:
    """Bagged Gini trees: seeded bootstrap per tree, mtry features per node."""
    n, d = train.X.shape
    if n == 0:
        raise TooFewSamplesError("empty training set")
    if n_trees < 1 or max_depth < 0 or min_leaf < 1:
        raise InvalidParameterError(f"bad forest params: n_trees={n_trees}, max_depth={max_depth}, min_leaf={min_leaf}")
    if mtry is None:
        mtry = default_mtry(d)
    if not 1 <= mtry <= d:
        raise InvalidParameterError(f"mtry must be in [1, {d}], got {mtry}")
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        rows = rng.integers(0, n, size=n)
        trees.append(_build_tree(train.X, train.y, rows, 0, max_depth, min_leaf, mtry, train.n_classes, rng))
    return ForestModel(
        trees=tuple(trees), n_trees=n_trees, max_depth=max_depth,
        min_leaf=min_leaf, mtry=mtry, seed=seed, n_classes=train.n_classes,
    )


def _build_tree(X, y, rows, depth, max_depth, min_leaf, mtry, n_classes, rng) -> TreeNode:
    counts = np.bincount(y[rows], minlength=n_classes).astype(np.int64)
    if depth >= max_depth or counts.max() == rows.size or rows.size < 2 * min_leaf:
        return TreeNode(counts=counts)
    feats = np.sort(rng.choice(X.shape[1], size=mtry, replace=False))
    split = best_gini_split(X, y, rows, feats, min_leaf, n_classes)
    if split is None:
        return TreeNode(counts=counts)
    feature, threshold = split
    go_left = X[rows, feature] <= threshold
    left = _build_tree(X, y, rows[go_left], depth + 1, max_depth, min_leaf, mtry, n_classes, rng)
    right = _build_tree(X, y, rows[~go_left], depth + 1, max_depth, min_leaf, mtry, n_classes, rng)
    return TreeNode(feature=int(feature), threshold=float(threshold), left=left, right=right)


def best_gini_split(X, y, rows, features, min_leaf, n_classes) -> tuple[int, float] | None:
    """Lowest weighted-children Gini over midpoints of sorted distinct values.

    Minimizing nL*gini(L) + nR*gini(R) equals maximizing
    sum(cL^2)/nL + sum(cR^2)/nR, which is compared exactly through integer
    cross-multiplication; score ties break to the lowest (feature,
    threshold). Returns None when no split satisfies min_leaf.
    """
    n = rows.size
    best: tuple[int, int, int, float] | None = None  # (num, den, feature, threshold)
    for f in features:
        col = X[rows, f]
        order = np.argsort(col, kind="stable")
        sorted_vals = col[order]
        onehot = np.zeros((n, n_classes), dtype=np.int64)
        onehot[np.arange(n), y[rows][order]] = 1
        prefix = np.cumsum(onehot, axis=0)
        totals = prefix[-1]

        boundaries = np.flatnonzero(sorted_vals[:-1] < sorted_vals[1:])  # split after index i
        for i in boundaries:
            n_left = int(i) + 1
            n_right = n - n_left
            if n_left < min_leaf or n_right < min_leaf:
                continue
            c_left = prefix[i]
            c_right = totals - c_left
            num = int(np.dot(c_left, c_left)) * n_right + int(np.dot(c_right, c_right)) * n_left
            den = n_left * n_right
            threshold = (float(sorted_vals[i]) + float(sorted_vals[i + 1])) / 2.0
            if best is None or _better_split(num, den, int(f), threshold, best):
                best = (num, den, int(f), threshold)
    if best is None:
        return None
    return best[2], best[3]


def _better_split(num, den, feature, threshold, best) -> bool:
    b_num, b_den, b_feature, b_threshold = best
    lhs = num * b_den
    rhs = b_num * den
    if lhs != rhs:
        return lhs > rhs
    return (feature, threshold) < (b_feature, b_threshold)


def _tree_vote(node: TreeNode, x: np.ndarray) -> int:
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return int(np.argmax(node.counts))  # first max: lowest class index


def rf_vote_counts(m: ForestModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    votes = np.bincount([_tree_vote(t, x) for t in m.trees], minlength=m.n_classes)
    return votes


def predict_rf(m: ForestModel, x: np.ndarray) -> int:
    """Majority vote over the trees' leaf-majority votes, tie to lowest class."""
    return int(np.argmax(rf_vote_counts(m, x)))


# --------------------------------------------------------------------------
# linear SVM (one-vs-rest, stochastic subgradient on the hinge loss)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray  # C x d
    biases: np.ndarray  # C
    lambda_: float
    epochs: int
    seed: int


def fit_svm(train: LabeledSet, lambda_: float = 1e-3, epochs: int = 200, seed: int = 0) -> SvmModel:
    """One linear hinge-loss discriminant per class, trained by SGD.

    Uses the standard primal schedule: at update t the step is
    1/(lambda * t); the whole parameter vector decays by (1 - 1/t) and
    moves along y*x on a margin violation. The bias rides along as an
    augmented constant feature inside the L2 term, which keeps the early
    large steps from pinning it far from the separating midpoint. Sample
    order reshuffles every epoch from a (seed, class, epoch) stream.
    """
    n, d = train.X.shape
    if n == 0:
        raise TooFewSamplesError("empty training set")
    if not np.isfinite(train.X).all():
        raise InvalidParameterError("training matrix contains non-finite values")
    if lambda_ <= 0 or epochs < 1:
        raise InvalidParameterError(f"bad SVM params: lambda={lambda_}, epochs={epochs}")

    C = train.n_classes
    aug = np.hstack([train.X, np.ones((n, 1))])
    W = np.zeros((C, d))
    b = np.zeros(C)
    for c in range(C):
        target = np.where(train.y == c, 1.0, -1.0)
        w = np.zeros(d + 1)
        t = 0
        for epoch in range(epochs):
            order = np.random.default_rng([seed, c, epoch]).permutation(n)
            for i in order:
                t += 1
                eta = 1.0 / (lambda_ * t)
                xi = aug[i]
                decay = 1.0 - eta * lambda_  # equals 1 - 1/t
                if target[i] * (w @ xi) < 1.0:
                    w = decay * w + (eta * target[i]) * xi
                else:
                    w = decay * w
        W[c] = w[:d]
        b[c] = w[d]
    return SvmModel(weights=W, biases=b, lambda_=lambda_, epochs=epochs, seed=seed)


def svm_decision_scores(m: SvmModel, x: np.ndarray) -> np.ndarray:
    return m.weights @ np.asarray(x, dtype=np.float64) + m.biases


def predict_svm(m: SvmModel, x: np.ndarray) -> int:
    """argmax of the per-class decision values, tie to lowest class."""
    return int(np.argmax(svm_decision_scores(m, x)))
