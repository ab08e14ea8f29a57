"""Utility dimension: IoU, greedy detection matching, P/R/F1 and PR curves."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .model import BBox, Detection, DetectionSet, GroundTruth, GroundTruthSet, UndefinedMetricError

DEFAULT_IOU = 0.5
DEFAULT_CONF = 0.25


def iou(a: BBox, b: BBox) -> float:
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def detection_order_key(d: Detection):
    return (-d.score, d.image_id, d.box.as_list(), d.class_id)


@dataclass
class MatchResult:
    true_positives: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    false_positives: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    false_negatives: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    matched_pairs: list[tuple[Detection, GroundTruth, float]] = field(default_factory=list)
    # every detection in processing order with its TP flag
    outcomes: list[tuple[Detection, bool]] = field(default_factory=list)

    @property
    def classes(self) -> list[int]:
        return sorted(set(self.true_positives) | set(self.false_positives) | set(self.false_negatives))

    def counts(self, class_id: int) -> tuple[int, int, int]:
        return (self.true_positives.get(class_id, 0), self.false_positives.get(class_id, 0),
                self.false_negatives.get(class_id, 0))


def match_detections(dets: DetectionSet, gts: GroundTruthSet, iou_thresh: float = DEFAULT_IOU) -> MatchResult:
    """Greedy score-ordered matching within each (image, class).

    Detections are visited by descending score (then image id, then box); each
    claims the unmatched same-class ground truth with the highest IoU at or
    above ``iou_thresh``. Leftover detections are false positives and leftover
    ground truths false negatives.
    """
    pool: dict[tuple[str, int], list[GroundTruth]] = defaultdict(list)
    for g in gts:
        pool[(g.image_id, g.class_id)].append(g)
    taken: dict[tuple[str, int], list[bool]] = {k: [False] * len(v) for k, v in pool.items()}

    res = MatchResult()
    for d in sorted(dets, key=detection_order_key):
        key = (d.image_id, d.class_id)
        best, best_iou = -1, iou_thresh
        for j, g in enumerate(pool.get(key, ())):
            if taken[key][j]:
                continue
            v = iou(d.box, g.box)
            if v >= best_iou and (best < 0 or v > best_iou):
                best, best_iou = j, v
        if best >= 0:
            taken[key][best] = True
            res.true_positives[d.class_id] += 1
            res.matched_pairs.append((d, pool[key][best], best_iou))
            res.outcomes.append((d, True))
        else:
            res.false_positives[d.class_id] += 1
            res.outcomes.append((d, False))
    for key, flags in taken.items():
        misses = flags.count(False)
        if misses:
            res.false_negatives[key[1]] += misses
    for c in res.classes:
        # materialize zero entries so every observed class reports all three counts
        res.true_positives[c] += 0
        res.false_positives[c] += 0
        res.false_negatives[c] += 0
    return res


def _safe_ratio(num: int, den: int, fully_empty: bool) -> float:
    if den == 0:
        return 1.0 if fully_empty else 0.0
    return num / den


def prf1_counts(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    empty = tp == 0 and fp == 0 and fn == 0
    p = _safe_ratio(tp, tp + fp, empty)
    r = _safe_ratio(tp, tp + fn, empty)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


@dataclass(frozen=True)
class PRF1:
    per_class: dict[int, tuple[float, float, float]]
    macro: tuple[float, float, float]


def prf1(match: MatchResult) -> PRF1:
    """Precision, recall and F1 per observed class, plus their unweighted means."""
    per = {c: prf1_counts(*match.counts(c)) for c in match.classes}
    if not per:
        return PRF1({}, (1.0, 1.0, 1.0))
    n = len(per)
    macro = tuple(sum(v[i] for v in per.values()) / n for i in range(3))
    return PRF1(per, macro)


@dataclass(frozen=True)
class PRCurve:
    points: tuple[tuple[float, float], ...]
    ap: float


def area_under_pr(points) -> float:
    """All-point area: sum of recall increments times precision at each point."""
    area, prev_r = 0.0, 0.0
    for r, p in points:
        area += (r - prev_r) * p
        prev_r = r
    return area


def pr_curve(dets: DetectionSet, gts: GroundTruthSet, class_id: int,
             iou_thresh: float = DEFAULT_IOU) -> PRCurve:
    """PR curve for one class, one point per distinct detection score.

    Greedy matching is prefix-stable (a higher threshold keeps a prefix of the
    score order), so the full matching is computed once and accumulated.

    Raises:
        UndefinedMetricError: if the class has no ground truth.
    """
    class_gts = GroundTruthSet(tuple(g for g in gts if g.class_id == class_id), gts.class_names)
    n_gt = len(class_gts)
    if n_gt == 0:
        raise UndefinedMetricError(f"class {class_id} has no ground truth; PR curve undefined")
    match = match_detections(dets.for_class(class_id), class_gts, iou_thresh)
    points = []
    tp = fp = 0
    outcomes = match.outcomes
    for i, (d, hit) in enumerate(outcomes):
        tp += hit
        fp += not hit
        if i + 1 == len(outcomes) or outcomes[i + 1][0].score != d.score:
            points.append((tp / n_gt, tp / (tp + fp)))
    return PRCurve(tuple(points), area_under_pr(points))


@dataclass(frozen=True)
class UtilityResult:
    per_class: dict[int, dict[str, float | None]]
    macro: dict[str, float | None]
    iou_thresh: float
    conf_thresh: float
    curves: dict[int, PRCurve]


def evaluate_utility(dets: DetectionSet, gts: GroundTruthSet, iou_thresh: float = DEFAULT_IOU,
                     conf_thresh: float = DEFAULT_CONF) -> UtilityResult:
    """P/R/F1 at ``conf_thresh`` plus threshold-free PR-curve AP for every class seen."""
    stats = prf1(match_detections(dets.above(conf_thresh), gts, iou_thresh))
    classes = sorted(gts.class_ids | dets.class_ids)
    per: dict[int, dict[str, float | None]] = {}
    curves: dict[int, PRCurve] = {}
    for c in classes:
        p, r, f1 = stats.per_class.get(c, prf1_counts(0, 0, 0))
        try:
            curves[c] = pr_curve(dets, gts, c, iou_thresh)
            ap = curves[c].ap
        except UndefinedMetricError:
            ap = None
        per[c] = {"precision": p, "recall": r, "f1": f1, "pr_auc": ap}
    aps = [v["pr_auc"] for v in per.values() if v["pr_auc"] is not None]
    if per:
        macro = {k: sum(v[k] for v in per.values()) / len(per) for k in ("precision", "recall", "f1")}
    else:
        macro = {"precision": 1.0, "recall": 1.0, "f1": 1.0}
    macro["pr_auc"] = sum(aps) / len(aps) if aps else None
    return UtilityResult(per, macro, iou_thresh, conf_thresh, curves)
