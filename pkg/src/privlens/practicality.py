"""Practicality dimension: throughput, robustness, intelligibility and their fusion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .anonymizers import bilinear_resize
from .model import BBox, DetectionSet, EmbeddingSet, PrivlensError, RasterImage, TimingLog
from .utility import detection_order_key, iou

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = (0.01 * 255) ** 2
SSIM_C2 = (0.03 * 255) ** 2

DEFAULT_SSIM_THRESH = 0.99
DEFAULT_MMD_SIGMA = 10.0
DEFAULT_MMD_SCALE = 1000.0
PERSON_CLASS = 0


class PracticalityError(PrivlensError, ValueError):
    pass


# --------------------------------------------------------------------------- #
# Throughput
# --------------------------------------------------------------------------- #


def fps(log: TimingLog) -> float:
    """Frames per second: N over the summed gaps between consecutive completions.

    The sum telescopes, so only N and the first/last timestamps matter.
    """
    ts = log.timestamps
    if len(ts) < 2:
        raise PracticalityError("fps needs at least 2 frames")
    span = ts[-1] - ts[0]
    if not span > 0:
        raise PracticalityError("timestamps must be strictly increasing")
    return len(ts) / span


# --------------------------------------------------------------------------- #
# SSIM
# --------------------------------------------------------------------------- #


def _gauss_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2
    g = np.exp(-(x * x) / (2 * sigma * sigma))
    return g / g.sum()


def _filter(arr: np.ndarray, taps: np.ndarray) -> np.ndarray:
    r = len(taps) // 2
    h, w = arr.shape[:2]
    p = np.pad(arr, ((r, r), (0, 0), (0, 0)), mode="edge")
    tmp = sum(t * p[i:i + h] for i, t in enumerate(taps))
    p = np.pad(tmp, ((0, 0), (r, r), (0, 0)), mode="edge")
    return sum(t * p[:, i:i + w] for i, t in enumerate(taps))


def ssim_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-pixel, per-channel SSIM for float (H, W, C) arrays on the 0..255 scale."""
    taps = _gauss_window()
    mu_a = _filter(a, taps)
    mu_b = _filter(b, taps)
    # identical expression shapes for a and b keep ssim(a, a) exactly 1
    var_a = _filter(a * a, taps) - mu_a * mu_a
    var_b = _filter(b * b, taps) - mu_b * mu_b
    cov = _filter(a * b, taps) - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return num / den


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean SSIM over an 11x11 Gaussian window (sigma 1.5), averaged over RGB channels.

    Borders use edge replication, so every pixel contributes one window.
    """
    if a.shape != b.shape:
        raise PracticalityError(f"SSIM needs equal dimensions, got {a.shape} and {b.shape}")
    m = ssim_map(a.pixels.astype(np.float64), b.pixels.astype(np.float64))
    return float(np.mean([m[..., c].mean() for c in range(m.shape[2])]))


# --------------------------------------------------------------------------- #
# Robustness
# --------------------------------------------------------------------------- #


def _pixel_bounds(box: BBox, height: int, width: int) -> tuple[int, int, int, int] | None:
    x0 = max(0, math.floor(box.x))
    y0 = max(0, math.floor(box.y))
    x1 = min(width, math.ceil(box.x + box.w))
    y1 = min(height, math.ceil(box.y + box.h))
    if x1 <= x0 or y1 <= y0:
        return None
    return y0, x0, y1, x1


def union_box(a: BBox, b: BBox) -> BBox:
    x0, y0 = min(a.x, b.x), min(a.y, b.y)
    x1, y1 = max(a.x + a.w, b.x + b.w), max(a.y + a.h, b.y + b.h)
    return BBox(x0, y0, x1 - x0, y1 - y0)


def crop_similarity(orig: RasterImage, anon: RasterImage, a: BBox, b: BBox) -> float | None:
    """SSIM between the union-box crops of both images; None if the crop is empty."""
    box = union_box(a, b)
    ba = _pixel_bounds(box, *orig.shape)
    bb = _pixel_bounds(box, *anon.shape)
    if ba is None or bb is None:
        return None
    ca = orig.pixels[ba[0]:ba[2], ba[1]:ba[3]].astype(np.float64)
    cb = anon.pixels[bb[0]:bb[2], bb[1]:bb[3]].astype(np.float64)
    h = max(ca.shape[0], cb.shape[0])
    w = max(ca.shape[1], cb.shape[1])
    if ca.shape[:2] != (h, w):
        ca = bilinear_resize(ca, h, w)
    if cb.shape[:2] != (h, w):
        cb = bilinear_resize(cb, h, w)
    m = ssim_map(ca, cb)
    return float(np.mean([m[..., c].mean() for c in range(m.shape[2])]))


def match_people(orig: DetectionSet, anon: DetectionSet, iou_thresh: float = 0.5):
    """Greedy IoU matching of original to anonymized detections on one image.

    Original detections are visited by descending score and take the unmatched
    anonymized detection with highest IoU at or above ``iou_thresh``.
    """
    cands = sorted(anon, key=detection_order_key)
    used = [False] * len(cands)
    pairs = []
    for d in sorted(orig, key=detection_order_key):
        best, best_iou = -1, iou_thresh
        for j, e in enumerate(cands):
            if used[j]:
                continue
            v = iou(d.box, e.box)
            if v >= best_iou and (best < 0 or v > best_iou):
                best, best_iou = j, v
        if best >= 0:
            used[best] = True
            pairs.append((d, cands[best], best_iou))
    return pairs


@dataclass(frozen=True)
class RobustnessResult:
    count: int
    matched: int
    similarities: tuple[tuple[str, float], ...]


def robustness_detail(orig_dets: DetectionSet, anon_dets: DetectionSet,
                      orig_imgs: Mapping[str, RasterImage], anon_imgs: Mapping[str, RasterImage],
                      iou_thresh: float = 0.5, ssim_thresh: float = DEFAULT_SSIM_THRESH,
                      person_class: int | None = PERSON_CLASS) -> RobustnessResult:
    if person_class is not None:
        orig_dets = orig_dets.for_class(person_class)
        anon_dets = anon_dets.for_class(person_class)
    by_img_o: dict[str, list] = {}
    by_img_a: dict[str, list] = {}
    for d in orig_dets:
        by_img_o.setdefault(d.image_id, []).append(d)
    for d in anon_dets:
        by_img_a.setdefault(d.image_id, []).append(d)
    count = matched = 0
    sims = []
    for image_id in sorted(by_img_o):
        pairs = match_people(DetectionSet(tuple(by_img_o[image_id])),
                             DetectionSet(tuple(by_img_a.get(image_id, ()))), iou_thresh)
        if not pairs:
            continue
        if image_id not in orig_imgs or image_id not in anon_imgs:
            raise PracticalityError(f"missing image {image_id!r} for a matched detection pair")
        for d, e, _ in pairs:
            matched += 1
            s = crop_similarity(orig_imgs[image_id], anon_imgs[image_id], d.box, e.box)
            if s is None:
                continue
            sims.append((image_id, s))
            if s >= ssim_thresh:
                count += 1
    return RobustnessResult(count, matched, tuple(sims))


def robustness(orig_dets: DetectionSet, anon_dets: DetectionSet,
               orig_imgs: Mapping[str, RasterImage], anon_imgs: Mapping[str, RasterImage],
               iou_thresh: float = 0.5, ssim_thresh: float = DEFAULT_SSIM_THRESH,
               person_class: int | None = PERSON_CLASS) -> int:
    """Number of IoU-matched person pairs whose crops remain SSIM-similar. Lower is better."""
    return robustness_detail(orig_dets, anon_dets, orig_imgs, anon_imgs, iou_thresh,
                             ssim_thresh, person_class).count


# --------------------------------------------------------------------------- #
# Intelligibility
# --------------------------------------------------------------------------- #


def _unit_rows(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise PracticalityError("cannot unit-normalize a zero embedding")
    return v / norms


def _mean_kernel(x: np.ndarray, y: np.ndarray, sigma: float) -> float:
    total = 0.0
    for row in x:
        d2 = ((y - row) ** 2).sum(axis=1)
        total += float(np.exp(-d2 / (2 * sigma * sigma)).sum())
    return total / (len(x) * len(y))


def mmd(x: EmbeddingSet | np.ndarray, y: EmbeddingSet | np.ndarray,
        sigma: float = DEFAULT_MMD_SIGMA, scale: float = DEFAULT_MMD_SCALE) -> float:
    """Biased (V-statistic) squared MMD with an RBF kernel on unit-normalized rows, times ``scale``."""
    xv = np.asarray(x.vectors if isinstance(x, EmbeddingSet) else x, dtype=np.float64)
    yv = np.asarray(y.vectors if isinstance(y, EmbeddingSet) else y, dtype=np.float64)
    if xv.ndim != 2 or yv.ndim != 2 or xv.shape[1] != yv.shape[1]:
        raise PracticalityError(f"embedding dimensions differ: {xv.shape} vs {yv.shape}")
    if len(xv) == 0 or len(yv) == 0:
        raise PracticalityError("each embedding set needs at least one row")
    xv, yv = _unit_rows(xv), _unit_rows(yv)
    kxx = _mean_kernel(xv, xv, sigma)
    kyy = _mean_kernel(yv, yv, sigma)
    kxy = _mean_kernel(xv, yv, sigma)
    return max(0.0, scale * (kxx + kyy - 2 * kxy))


# --------------------------------------------------------------------------- #
# Normalization and fusion
# --------------------------------------------------------------------------- #


def normalize_invert(values: Mapping[str, float], invert: bool = False) -> dict[str, float]:
    """Min-max scale to [0, 1]; ``invert`` flips so the smallest raw value scores 1.

    If every value is equal each method gets 0.5.
    """
    if not values:
        return {}
    for k, v in values.items():
        if not math.isfinite(v):
            raise PracticalityError(f"non-finite value for {k!r}")
    lo, hi = min(values.values()), max(values.values())
    if hi == lo:
        return {k: 0.5 for k in values}
    span = hi - lo
    if invert:
        return {k: (hi - v) / span for k, v in values.items()}
    return {k: (v - lo) / span for k, v in values.items()}


@dataclass(frozen=True)
class WeightVector:
    w_r: float
    w_i: float
    w_t: float

    def __post_init__(self):
        ws = (self.w_r, self.w_i, self.w_t)
        if any(not math.isfinite(w) or w < 0 for w in ws):
            raise PracticalityError(f"weights must be finite and non-negative, got {ws}")
        if abs(sum(ws) - 1.0) > 1e-9:
            raise PracticalityError(f"weights must sum to 1, got {ws} (sum {sum(ws)})")

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        """Parse ``"a,b,c"``; entries may be fractions such as ``1/3``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise PracticalityError(f"expected 3 comma-separated weights, got {text!r}")
        try:
            fr = [Fraction(p) for p in parts]
        except (ValueError, ZeroDivisionError) as exc:
            raise PracticalityError(f"bad weight list {text!r}") from exc
        if sum(fr) == 1:
            # exact rational sum; pin the float sum to 1 via the last weight
            vals = [float(f) for f in fr]
            if abs(sum(vals) - 1.0) > 1e-12:
                vals[2] = 1.0 - vals[0] - vals[1]
            return cls(*vals)
        return cls(*(float(f) for f in fr))

    def as_tuple(self) -> tuple[float, float, float]:
        return self.w_r, self.w_i, self.w_t

    def __str__(self):
        return ",".join(repr(w) for w in self.as_tuple())


EQUAL_WEIGHTS = WeightVector(1 / 3, 1 / 3, 1 / 3)


@dataclass(frozen=True)
class PracticalityInputs:
    throughput_fps: dict[str, float]
    robustness_count: dict[str, float]
    intelligibility_mmd: dict[str, float]

    def __post_init__(self):
        keys = set(self.throughput_fps)
        if keys != set(self.robustness_count) or keys != set(self.intelligibility_mmd):
            raise PracticalityError("practicality inputs must cover the same methods")
        for name, v in self.throughput_fps.items():
            if not (math.isfinite(v) and v > 0):
                raise PracticalityError(f"fps for {name!r} must be finite and > 0")
        for name, v in self.robustness_count.items():
            if not (math.isfinite(v) and v >= 0):
                raise PracticalityError(f"robustness for {name!r} must be >= 0")
        for name, v in self.intelligibility_mmd.items():
            if not (math.isfinite(v) and v >= 0):
                raise PracticalityError(f"mmd for {name!r} must be >= 0")

    @property
    def methods(self) -> list[str]:
        return sorted(self.throughput_fps)


def normalized_components(inputs: PracticalityInputs) -> dict[str, tuple[float, float, float]]:
    """Per-method ``(R_n, I_n, T_n)``; robustness and MMD are inverted."""
    r = normalize_invert(inputs.robustness_count, invert=True)
    i = normalize_invert(inputs.intelligibility_mmd, invert=True)
    t = normalize_invert(inputs.throughput_fps, invert=False)
    return {m: (r[m], i[m], t[m]) for m in inputs.methods}


def fuse(components: tuple[float, float, float], w: WeightVector) -> float:
    r, i, t = components
    return w.w_r * r + w.w_i * i + w.w_t * t


def practicality(inputs: PracticalityInputs, w: WeightVector) -> dict[str, float]:
    if not inputs.methods:
        raise PracticalityError("practicality needs at least one method")
    return {m: fuse(c, w) for m, c in normalized_components(inputs).items()}
