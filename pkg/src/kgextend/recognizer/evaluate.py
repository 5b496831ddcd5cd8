"""Confusion counts and F-scores for binary pair predictions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import LengthMismatchError


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Precision, recall, and the three standard F-scores."""

    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f_05: float
    f_1: float
    f_2: float


def f_beta(precision: float, recall: float, beta: float) -> float:
    """Weighted harmonic mean of precision and recall; 0 when undefined."""
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom


def evaluate(predicted: Sequence[int], truth: Sequence[int]) -> EvalReport:
    """Score 0/1 predictions against 0/1 ground truth."""
    if len(predicted) != len(truth):
        raise LengthMismatchError(
            f"{len(predicted)} predictions against {len(truth)} truth labels"
        )
    tp = fp = tn = fn = 0
    for p, t in zip(predicted, truth):
        if p not in (0, 1) or t not in (0, 1):
            raise ValueError("labels must be 0 or 1")
        if p == 1 and t == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif t == 1:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return EvalReport(
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        precision=precision,
        recall=recall,
        f_05=f_beta(precision, recall, 0.5),
        f_1=f_beta(precision, recall, 1.0),
        f_2=f_beta(precision, recall, 2.0),
    )
