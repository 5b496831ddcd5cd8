"""Native pair classifiers: logistic regression, CART, boosted trees.

Everything is trained full-batch with deterministic tie-breaks, so the
same data order, seed, and hyperparameters always produce the same
serialized model.  Two trivial model kinds round out the menu: a
pass-through threshold on one feature (the rule-based baseline) and a
constant scorer (useful as a pipeline stub).

Model files are JSON with a format tag and version; floats survive the
round trip exactly, so a reloaded model scores bit-identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import (
    DegenerateDataError,
    IoError,
    LayoutMismatchError,
    NonFiniteError,
    ParseError,
)
from .features import LabeledPair

FORMAT_TAG = "kgextend-model"
FORMAT_VERSION = 1


def _matrixize(data: Sequence[LabeledPair]) -> tuple[np.ndarray, np.ndarray]:
    if not data:
        raise DegenerateDataError("empty training set")
    X = np.stack([p.features for p in data]).astype(np.float64)
    labels = [p.label for p in data]
    if any(l not in (0, 1) for l in labels):
        raise DegenerateDataError("training rows must carry 0/1 labels")
    y = np.array(labels, dtype=np.float64)
    if not np.isfinite(X).all():
        raise NonFiniteError("training features contain non-finite values")
    if y.min() == y.max():
        raise DegenerateDataError("training data contains a single class")
    return X, y


def _check_layout(fv: np.ndarray, width: int) -> np.ndarray:
    arr = np.asarray(fv, dtype=np.float64).reshape(-1)
    if arr.shape[0] != width:
        raise LayoutMismatchError(f"feature vector has {arr.shape[0]} slots, model wants {width}")
    return arr


def _sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


# ---------------------------------------------------------------------------
# Logistic regression


def logreg_loss_grad(
    weights: np.ndarray,
    bias: float,
    X: np.ndarray,
    y: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, float]:
    """L2-regularized logistic loss and its analytic gradient.

    The loss is the mean of ``log(1+e^z) - y*z`` plus ``l2/2 * |w|^2``;
    the bias is not penalized.
    """
    z = X @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(weights, weights))
    p = _sigmoid(z)
    grad_w = X.T @ (p - y) / len(y) + l2 * weights
    grad_b = float(np.mean(p - y))
    return loss, grad_w, grad_b


@dataclass(frozen=True, slots=True)
class LogisticModel:
    kind = "logreg"
    feature_names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    weights: np.ndarray
    bias: float
    lr: float
    epochs: int
    l2: float
    seed: int

    def score(self, fv: np.ndarray) -> float:
        arr = _check_layout(fv, len(self.feature_names))
        z = (arr - self.mean) / self.std @ self.weights + self.bias
        return float(_sigmoid(z))


def train_logreg(
    data: Sequence[LabeledPair],
    lr: float = 0.1,
    epochs: int = 500,
    l2: float = 1e-4,
    seed: int = 0,
    *,
    feature_names: tuple[str, ...] | None = None,
) -> LogisticModel:
    """Full-batch gradient descent on standardized features.

    A step that would raise the training loss is retried at half the
    learning rate, so the recorded loss sequence is non-increasing.
    """
    X, y = _matrixize(data)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    Xs = (X - mean) / std

    w = np.zeros(X.shape[1])
    b = 0.0
    step = lr
    loss, grad_w, grad_b = logreg_loss_grad(w, b, Xs, y, l2)
    for _ in range(epochs):
        if step < 1e-15:
            break
        w_next = w - step * grad_w
        b_next = b - step * grad_b
        next_loss, next_gw, next_gb = logreg_loss_grad(w_next, b_next, Xs, y, l2)
        if not math.isfinite(next_loss):
            raise NonFiniteError("logistic training diverged to a non-finite loss")
        if next_loss > loss:
            step *= 0.5
            continue
        w, b, loss, grad_w, grad_b = w_next, b_next, next_loss, next_gw, next_gb
    names = feature_names or tuple(f"f{i}" for i in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise LayoutMismatchError("feature_names length does not match the data width")
    return LogisticModel(tuple(names), mean, std, w, float(b), lr, epochs, l2, seed)


# ---------------------------------------------------------------------------
# Decision trees


@dataclass(slots=True)
class TreeNode:
    """Internal node when ``feature >= 0``, leaf otherwise."""

    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0
    n: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    def apply(self, arr: np.ndarray) -> float:
        node = self
        while not node.is_leaf:
            assert node.left is not None and node.right is not None
            node = node.left if arr[node.feature] <= node.threshold else node.right
        return node.value


def _gini(pos: float, n: float) -> float:
    if n <= 0:
        return 0.0
    p = pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(
    X: np.ndarray,
    target: np.ndarray,
    min_leaf: int,
    criterion: str,
) -> tuple[int, float, float] | None:
    """Best (feature, midpoint threshold, score) or None.

    ``criterion`` is ``gini`` (target is 0/1) or ``sse`` (real target).
    The score is the weighted child impurity (lower is better); ties keep
    the lowest feature index, then the lowest threshold.
    """
    n = X.shape[0]
    best: tuple[int, float, float] | None = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ts = target[order]
        boundaries = np.nonzero(xs[1:] > xs[:-1])[0]
        if boundaries.size == 0:
            continue
        csum = np.cumsum(ts)
        if criterion == "sse":
            csum_sq = np.cumsum(ts * ts)
        for i in boundaries:
            left_n = int(i) + 1
            right_n = n - left_n
            if left_n < min_leaf or right_n < min_leaf:
                continue
            if criterion == "gini":
                left_pos = float(csum[i])
                right_pos = float(csum[-1]) - left_pos
                score = left_n * _gini(left_pos, left_n) + right_n * _gini(right_pos, right_n)
            else:
                left_sum = float(csum[i])
                right_sum = float(csum[-1]) - left_sum
                left_sq = float(csum_sq[i])
                right_sq = float(csum_sq[-1]) - left_sq
                score = (left_sq - left_sum * left_sum / left_n) + (
                    right_sq - right_sum * right_sum / right_n
                )
            if best is None or score < best[2]:
                threshold = (float(xs[i]) + float(xs[i + 1])) / 2.0
                best = (j, threshold, score)
    return best


def _grow(
    X: np.ndarray,
    target: np.ndarray,
    depth: int,
    max_depth: int,
    min_leaf: int,
    criterion: str,
    leaf_value,
) -> TreeNode:
    n = X.shape[0]
    if depth >= max_depth or n < 2 * min_leaf or float(target.min()) == float(target.max()):
        return TreeNode(value=leaf_value(target), n=n)
    split = _best_split(X, target, min_leaf, criterion)
    if split is None:
        return TreeNode(value=leaf_value(target), n=n)
    j, threshold, _ = split
    mask = X[:, j] <= threshold
    left = _grow(X[mask], target[mask], depth + 1, max_depth, min_leaf, criterion, leaf_value)
    right = _grow(X[~mask], target[~mask], depth + 1, max_depth, min_leaf, criterion, leaf_value)
    return TreeNode(j, threshold, left, right, n=n)


@dataclass(frozen=True, slots=True)
class TreeModel:
    kind = "tree"
    feature_names: tuple[str, ...]
    root: TreeNode
    max_depth: int
    min_leaf: int
    seed: int

    def score(self, fv: np.ndarray) -> float:
        arr = _check_layout(fv, len(self.feature_names))
        return float(self.root.apply(arr))


def train_tree(
    data: Sequence[LabeledPair],
    max_depth: int = 6,
    min_leaf: int = 5,
    seed: int = 0,
    *,
    feature_names: tuple[str, ...] | None = None,
) -> TreeModel:
    """CART with Gini impurity and midpoint thresholds.

    A zero-gain split is still taken when candidates exist (the XOR
    pattern has no first split with positive marginal gain); growth
    stops at purity, the depth cap, or the min-leaf constraint.
    """
    X, y = _matrixize(data)
    root = _grow(X, y, 0, max_depth, min_leaf, "gini", lambda t: float(t.mean()))
    names = feature_names or tuple(f"f{i}" for i in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise LayoutMismatchError("feature_names length does not match the data width")
    return TreeModel(tuple(names), root, max_depth, min_leaf, seed)


# ---------------------------------------------------------------------------
# Gradient-boosted trees (logistic loss)


@dataclass(frozen=True, slots=True)
class GbtModel:
    kind = "gbt"
    feature_names: tuple[str, ...]
    base: float
    trees: tuple[TreeNode, ...]
    rounds: int
    depth: int
    shrinkage: float
    seed: int

    def raw_score(self, arr: np.ndarray) -> float:
        return self.base + sum(tree.apply(arr) for tree in self.trees)

    def score(self, fv: np.ndarray) -> float:
        arr = _check_layout(fv, len(self.feature_names))
        return float(_sigmoid(self.raw_score(arr)))


def _scale_leaves(node: TreeNode, factor: float) -> None:
    if node.is_leaf:
        node.value *= factor
        return
    assert node.left is not None and node.right is not None
    _scale_leaves(node.left, factor)
    _scale_leaves(node.right, factor)


def _tree_predictions(node: TreeNode, X: np.ndarray) -> np.ndarray:
    return np.array([node.apply(row) for row in X])


def _logistic_loss(F: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, F) - y * F))


def train_gbt(
    data: Sequence[LabeledPair],
    rounds: int = 100,
    depth: int = 3,
    shrinkage: float = 0.1,
    seed: int = 0,
    *,
    feature_names: tuple[str, ...] | None = None,
) -> GbtModel:
    """Boosted regression trees on the logistic-loss gradient.

    Each round fits a squared-error tree to the residual ``y - p`` and
    sets leaf values by a Newton step.  A round that would raise the
    training loss is damped by halving; if four halvings do not help the
    round is dropped and boosting stops, so the loss never increases.
    """
    X, y = _matrixize(data)
    pos = float(y.sum())
    neg = float(len(y) - pos)
    base = math.log(pos / neg)
    F = np.full(len(y), base)
    trees: list[TreeNode] = []
    loss = _logistic_loss(F, y)
    for _ in range(rounds):
        if shrinkage == 0.0:
            break
        p = _sigmoid(F)
        residual = y - p
        hessian = p * (1.0 - p)
        root = _grow_gbt(X, residual, hessian, depth)
        step = _tree_predictions(root, X)
        factor = shrinkage
        accepted = False
        for _ in range(5):
            candidate = F + factor * step
            candidate_loss = _logistic_loss(candidate, y)
            if candidate_loss <= loss:
                _scale_leaves(root, factor)
                trees.append(root)
                F = candidate
                loss = candidate_loss
                accepted = True
                break
            factor *= 0.5
        if not accepted:
            break
    names = feature_names or tuple(f"f{i}" for i in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise LayoutMismatchError("feature_names length does not match the data width")
    return GbtModel(tuple(names), base, tuple(trees), rounds, depth, shrinkage, seed)


def _grow_gbt(X: np.ndarray, residual: np.ndarray, hessian: np.ndarray, max_depth: int) -> TreeNode:
    def build(rows: np.ndarray, depth: int) -> TreeNode:
        res = residual[rows]
        n = len(rows)
        if depth >= max_depth or n < 2 or float(res.min()) == float(res.max()):
            return TreeNode(value=_newton_value(res, hessian[rows]), n=n)
        split = _best_split(X[rows], res, 1, "sse")
        if split is None:
            return TreeNode(value=_newton_value(res, hessian[rows]), n=n)
        j, threshold, _ = split
        mask = X[rows, j] <= threshold
        left = build(rows[mask], depth + 1)
        right = build(rows[~mask], depth + 1)
        return TreeNode(j, threshold, left, right, n=n)

    return build(np.arange(X.shape[0]), 0)


def _newton_value(residual: np.ndarray, hessian: np.ndarray) -> float:
    denom = float(hessian.sum())
    if denom < 1e-12:
        return 0.0
    return float(residual.sum() / denom)


# ---------------------------------------------------------------------------
# Trivial model kinds


@dataclass(frozen=True, slots=True)
class ThresholdModel:
    """Rule-based baseline: the score is one feature, clipped to [0,1]."""

    kind = "threshold"
    feature_names: tuple[str, ...]
    feature: str

    def score(self, fv: np.ndarray) -> float:
        arr = _check_layout(fv, len(self.feature_names))
        try:
            idx = self.feature_names.index(self.feature)
        except ValueError:
            raise LayoutMismatchError(f"model feature {self.feature!r} not in layout") from None
        return float(np.clip(arr[idx], 0.0, 1.0))


@dataclass(frozen=True, slots=True)
class ConstantModel:
    """Scores every pair the same; a stub for pipeline plumbing."""

    kind = "constant"
    feature_names: tuple[str, ...]
    value: float

    def score(self, fv: np.ndarray) -> float:
        _check_layout(fv, len(self.feature_names))
        return float(self.value)


Model = LogisticModel | TreeModel | GbtModel | ThresholdModel | ConstantModel


def predict(m: Model, fv: np.ndarray, cutoff: float = 0.5) -> tuple[int, float]:
    """Score a feature vector; the label is 1 when score >= cutoff."""
    score = m.score(fv)
    return (1 if score >= cutoff else 0, score)


# ---------------------------------------------------------------------------
# Serialization


def _node_to_obj(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"value": node.value, "n": node.n}
    assert node.left is not None and node.right is not None
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "n": node.n,
        "left": _node_to_obj(node.left),
        "right": _node_to_obj(node.right),
    }


def _node_from_obj(obj: dict) -> TreeNode:
    if "feature" not in obj:
        return TreeNode(value=float(obj["value"]), n=int(obj.get("n", 0)))
    return TreeNode(
        int(obj["feature"]),
        float(obj["threshold"]),
        _node_from_obj(obj["left"]),
        _node_from_obj(obj["right"]),
        n=int(obj.get("n", 0)),
    )


def model_to_obj(m: Model) -> dict:
    out: dict = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "kind": m.kind,
        "features": list(m.feature_names),
    }
    if isinstance(m, LogisticModel):
        out["params"] = {
            "mean": list(m.mean),
            "std": list(m.std),
            "weights": list(m.weights),
            "bias": m.bias,
            "lr": m.lr,
            "epochs": m.epochs,
            "l2": m.l2,
            "seed": m.seed,
        }
    elif isinstance(m, TreeModel):
        out["params"] = {
            "root": _node_to_obj(m.root),
            "max_depth": m.max_depth,
            "min_leaf": m.min_leaf,
            "seed": m.seed,
        }
    elif isinstance(m, GbtModel):
        out["params"] = {
            "base": m.base,
            "trees": [_node_to_obj(t) for t in m.trees],
            "rounds": m.rounds,
            "depth": m.depth,
            "shrinkage": m.shrinkage,
            "seed": m.seed,
        }
    elif isinstance(m, ThresholdModel):
        out["params"] = {"feature": m.feature}
    elif isinstance(m, ConstantModel):
        out["params"] = {"value": m.value}
    else:
        raise TypeError(f"unknown model type {type(m).__name__}")
    return out


def model_from_obj(obj: dict) -> Model:
    if obj.get("format") != FORMAT_TAG:
        raise ParseError(1, 1, "not a model file")
    if obj.get("version") != FORMAT_VERSION:
        raise ParseError(1, 1, f"unsupported model version {obj.get('version')!r}")
    names = tuple(str(n) for n in obj.get("features", []))
    kind = obj.get("kind")
    params = obj.get("params", {})
    if kind == "logreg":
        return LogisticModel(
            names,
            np.array(params["mean"], dtype=np.float64),
            np.array(params["std"], dtype=np.float64),
            np.array(params["weights"], dtype=np.float64),
            float(params["bias"]),
            float(params["lr"]),
            int(params["epochs"]),
            float(params["l2"]),
            int(params["seed"]),
        )
    if kind == "tree":
        return TreeModel(
            names,
            _node_from_obj(params["root"]),
            int(params["max_depth"]),
            int(params["min_leaf"]),
            int(params["seed"]),
        )
    if kind == "gbt":
        return GbtModel(
            names,
            float(params["base"]),
            tuple(_node_from_obj(t) for t in params["trees"]),
            int(params["rounds"]),
            int(params["depth"]),
            float(params["shrinkage"]),
            int(params["seed"]),
        )
    if kind == "threshold":
        return ThresholdModel(names, str(params["feature"]))
    if kind == "constant":
        return ConstantModel(names, float(params["value"]))
    raise ParseError(1, 1, f"unknown model kind {kind!r}")


def dump_model(m: Model) -> str:
    return json.dumps(model_to_obj(m), indent=2) + "\n"


def save_model(m: Model, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dump_model(m))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_model(path: str) -> Model:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.colno, exc.msg) from exc
    return model_from_obj(obj)
