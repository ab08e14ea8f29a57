"""Privacy dimension: per-attribute AP, cMAP, relative drops and class weights."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import AttributeScoreTable, PrivlensError, UndefinedMetricError


def ranking_order(scores: Sequence[float], ids: Sequence[str] | None = None) -> list[int]:
    """Indices sorted by descending score, ties broken by ascending id (then position)."""
    if ids is None:
        ids = [""] * len(scores)
    return sorted(range(len(scores)), key=lambda i: (-float(scores[i]), ids[i], i))


def average_precision(scores: Sequence[float], labels: Sequence[int],
                      ids: Sequence[str] | None = None) -> float:
    """All-point average precision of a ranking.

    Items are ranked by descending score with ties broken by ascending ``ids``;
    AP is ``sum_n (R_n - R_{n-1}) * P_n`` over every rank cut-off.

    Raises:
        UndefinedMetricError: if there is no positive label.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D and equal length")
    n_pos = int(np.count_nonzero(labels))
    if n_pos == 0:
        raise UndefinedMetricError("average precision is undefined without positive labels")
    ranked = labels[ranking_order(scores, ids)] != 0
    tp = np.cumsum(ranked)
    precision = tp / np.arange(1, len(ranked) + 1)
    # recall only moves at positives, by 1/n_pos each
    return float(precision[ranked].sum() / n_pos)


@dataclass(frozen=True)
class PrivacyResult:
    per_attribute_ap: dict[str, float]
    cmap: float
    skipped_attributes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"per_attribute_ap": dict(self.per_attribute_ap), "cmap": self.cmap,
                "skipped": list(self.skipped_attributes)}


def cmap(table: AttributeScoreTable) -> PrivacyResult:
    """Class-based mean AP over attributes that have at least one positive."""
    if len(table) == 0:
        raise PrivlensError("score table is empty")
    aps: dict[str, float] = {}
    skipped = []
    for c, name in enumerate(table.attribute_names):
        try:
            aps[name] = average_precision(table.scores[:, c], table.labels[:, c], table.image_ids)
        except UndefinedMetricError:
            skipped.append(name)
    if not aps:
        raise UndefinedMetricError("every attribute lacks positive labels; cMAP undefined")
    return PrivacyResult(aps, float(np.mean(list(aps.values()))), tuple(skipped))


def relative_drop(original: PrivacyResult, anonymized: PrivacyResult) -> dict[str, float | None]:
    """Percent drop of each attribute's AP relative to the original.

    Negative values mean the anonymized AP went up. Attributes whose original
    AP is zero map to None ("undefined drop").
    """
    if set(original.per_attribute_ap) != set(anonymized.per_attribute_ap):
        raise PrivlensError("original and anonymized results cover different attributes")
    out: dict[str, float | None] = {}
    for name, ap0 in original.per_attribute_ap.items():
        if ap0 == 0:
            out[name] = None
        else:
            out[name] = 100.0 * (ap0 - anonymized.per_attribute_ap[name]) / ap0
    return out


def class_weights(table: AttributeScoreTable) -> dict[str, float]:
    """Inverse-frequency loss weights ``N / (N_c * C)`` per attribute."""
    n = len(table)
    c_count = table.n_attributes
    out = {}
    for c, name in enumerate(table.attribute_names):
        n_c = int(np.count_nonzero(table.labels[:, c]))
        if n_c == 0:
            raise PrivlensError(f"attribute {name!r} has no positive labels")
        out[name] = n / (n_c * c_count)
    return out
