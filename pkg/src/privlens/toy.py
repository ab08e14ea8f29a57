"""Deterministic desk-scale dataset and scripted models for end-to-end runs.

The "classifier", "detector" and "embedder" here are small hand-written
functions of the pixels, standing in for trained networks so the full
pipeline can run without any model weights:

* each privacy attribute is carried by a low-frequency texture painted into
  the person region; the classifier scores its correlation with that texture,
* the detector localizes known object boxes and scores them by how much
  texture/contrast survives,
* the embedder is an 8x8 average-pooled thumbnail.
"""

from __future__ import annotations

import hashlib
import logging
import time
from pathlib import Path

import numpy as np

from . import anonymizers as anon
from .model import (
    AttributeScoreTable,
    BBox,
    Detection,
    DetectionSet,
    EmbeddingSet,
    GroundTruth,
    GroundTruthSet,
    RasterImage,
    RegionMask,
    TimingLog,
    load_image_dir,
    load_masks,
    write_detections,
    write_embeddings,
    write_ground_truth,
    write_image,
    write_mask,
    write_scores,
    write_timing,
)

log = logging.getLogger(__name__)

CLASS_NAMES = ("person", "bicycle", "car", "motorcycle", "airplane", "bus", "train", "truck", "boat",
               "traffic light")
ATTRIBUTES = ("face", "gender", "clothing", "skin_color")
SIZE = 64
TEXTURE_AMPLITUDE = 45.0
TOY_KEY = bytes(range(16))
TOY_NONCE = bytes(range(16, 32))

# method name -> (operator, k); pixelate uses the fine k=2 grid on purpose
TOY_METHODS = {
    "blur": ("blur", 101),
    "pixelate": ("pixelate", 2),
    "emboss": ("emboss", 3),
    "mask_black": ("mask_black", 0),
    "encrypt": ("encrypt", 0),
    "lowres": ("lowres", 30),
}
# seconds per frame for the scripted timing logs (wall-clock logs are not reproducible)
SCRIPTED_FRAME_COST = {
    "blur": 0.020, "pixelate": 0.004, "emboss": 0.006, "mask_black": 0.001, "encrypt": 0.003, "lowres": 0.005,
}


def _template(attr_index: int, h: int, w: int) -> np.ndarray:
    """Zero-mean texture for one attribute, anchored at the person box origin."""
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    period = 8.0
    if attr_index == 0:
        t = np.sin(2 * np.pi * yy / period)
    elif attr_index == 1:
        t = np.sin(2 * np.pi * xx / period)
    elif attr_index == 2:
        t = np.sin(2 * np.pi * (xx + yy) / period)
    else:
        t = np.sin(2 * np.pi * (xx - yy) / (period * 1.5))
    return t - t.mean()


def _stable_jitter(*parts) -> float:
    """Deterministic pseudo-random value in [-1, 1] from the given keys."""
    digest = hashlib.sha256("|".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2 ** 63 - 1.0


def generate_dataset(n_images: int = 20, seed: int = 0):
    """Return ``(images, masks, labels, ground_truth)`` for a synthetic street scene set."""
    rng = np.random.default_rng(seed)
    images, masks = {}, {}
    label_rows = []
    gts = []
    for idx in range(n_images):
        image_id = f"img{idx:03d}"
        yy, xx = np.mgrid[0:SIZE, 0:SIZE]
        base = rng.uniform(60, 160, size=3)
        px = np.empty((SIZE, SIZE, 3), dtype=np.float64)
        for c in range(3):
            px[..., c] = base[c] + 30 * (xx / SIZE) - 20 * (yy / SIZE)

        # one object in the left strip, the person in the right part
        cls = int(rng.integers(1, len(CLASS_NAMES)))
        ow, oh = int(rng.integers(8, 14)), int(rng.integers(8, 14))
        ox, oy = int(rng.integers(1, 18 - ow + 12)), int(rng.integers(2, SIZE - oh - 2))
        color = rng.uniform(0, 255, size=3)
        px[oy:oy + oh, ox:ox + ow] = color
        gts.append(GroundTruth(image_id, cls, BBox(ox, oy, ow, oh)))

        pw, ph = int(rng.integers(18, 26)), int(rng.integers(28, 40))
        pxo, pyo = int(rng.integers(32, SIZE - pw)), int(rng.integers(2, SIZE - ph - 1))
        bits = np.zeros((SIZE, SIZE), dtype=bool)
        cy, cx = pyo + ph / 2, pxo + pw / 2
        ell = ((yy + 0.5 - cy) / (ph / 2)) ** 2 + ((xx + 0.5 - cx) / (pw / 2)) ** 2 <= 1.0
        bits[ell] = True
        m = RegionMask(bits)
        y0, x0, y1, x1 = m.bounding_box()
        gts.append(GroundTruth(image_id, 0, BBox(x0, y0, x1 - x0, y1 - y0)))

        labels = rng.integers(0, 2, size=len(ATTRIBUTES))
        # fixed pattern keeps every attribute with both positives and negatives
        labels[idx % len(ATTRIBUTES)] = 1
        labels[(idx + 2) % len(ATTRIBUTES)] = 0
        person = np.empty((y1 - y0, x1 - x0, 3))
        person[:] = rng.uniform(90, 170, size=3)
        for a, on in enumerate(labels):
            if on:
                person += TEXTURE_AMPLITUDE * _template(a, y1 - y0, x1 - x0)[..., None]
        region = px[y0:y1, x0:x1]
        sel = bits[y0:y1, x0:x1]
        region[sel] = person[sel]

        images[image_id] = RasterImage(np.clip(np.floor(px + 0.5), 0, 255).astype(np.uint8))
        masks[image_id] = m
        label_rows.append(labels)
    return images, masks, np.array(label_rows), GroundTruthSet(tuple(gts), CLASS_NAMES)


# --------------------------------------------------------------------------- #
# Scripted models
# --------------------------------------------------------------------------- #


def _gray(img: RasterImage) -> np.ndarray:
    return img.pixels.astype(np.float64).mean(axis=2)


def classify(images: dict[str, RasterImage], masks: dict[str, RegionMask], labels: np.ndarray) -> AttributeScoreTable:
    """Score each attribute by texture correlation inside the (original) person mask."""
    ids = sorted(images)
    scores = np.zeros((len(ids), len(ATTRIBUTES)))
    for r, image_id in enumerate(ids):
        m = masks[image_id]
        y0, x0, y1, x1 = m.bounding_box()
        sel = m.bits[y0:y1, x0:x1]
        g = _gray(images[image_id])[y0:y1, x0:x1][sel]
        g = g - g.mean()
        gn = np.linalg.norm(g)
        for a in range(len(ATTRIBUTES)):
            t = _template(a, y1 - y0, x1 - x0)[sel]
            t = t - t.mean()
            corr = 0.0 if gn < 1e-9 else float(g @ t / (gn * np.linalg.norm(t)))
            z = 10.0 * (corr - 0.15) + 0.4 * _stable_jitter(image_id, a)
            scores[r, a] = round(1.0 / (1.0 + np.exp(-z)), 6)
    return AttributeScoreTable(ATTRIBUTES, tuple(ids), scores, labels)


def _contrast(gray: np.ndarray, box: BBox) -> float:
    x0, y0, x1, y1 = int(box.x), int(box.y), int(box.x + box.w), int(box.y + box.h)
    inner = gray[y0:y1, x0:x1]
    ring = gray[max(0, y0 - 2):y1 + 2, max(0, x0 - 2):x1 + 2]
    outer_sum = ring.sum() - inner.sum()
    outer_n = ring.size - inner.size
    if outer_n == 0:
        return 0.0
    return abs(inner.mean() - outer_sum / outer_n)


def detect(images: dict[str, RasterImage], masks: dict[str, RegionMask], gts: GroundTruthSet,
           min_score: float = 0.05) -> DetectionSet:
    """Scripted detector over all classes.

    Objects are found at their true boxes with a contrast-based score; people
    are scored by the texture that survives inside their mask. One spurious
    low-score box per few images keeps precision honest.
    """
    out = []
    for g in gts:
        img = images[g.image_id]
        gray = _gray(img)
        if g.class_id == 0:
            m = masks[g.image_id]
            sel = m.bits
            std = float(gray[sel].std())
            score = min(1.0, std / 25.0)
            dx = round(_stable_jitter(g.image_id, "px"))
            box = BBox(max(0.0, g.box.x + dx), g.box.y, g.box.w, g.box.h)
        else:
            score = min(1.0, _contrast(gray, g.box) / 40.0)
            box = g.box
        score = round(score, 6)
        if score >= min_score:
            out.append(Detection(g.image_id, g.class_id, box, score))
    for k, image_id in enumerate(sorted(images)):
        if k % 4 == 0:
            s = round(0.3 + 0.2 * abs(_stable_jitter(image_id, "fp")), 6)
            out.append(Detection(image_id, 2, BBox(20.0, 50.0, 8.0, 8.0), s))
    return DetectionSet(tuple(out))


def embed(images: dict[str, RasterImage], grid: int = 8) -> EmbeddingSet:
    """Average-pooled ``grid x grid`` RGB thumbnail, centred on mid-gray."""
    ids = sorted(images)
    rows = []
    for image_id in ids:
        px = images[image_id].pixels.astype(np.float64)
        h, w = px.shape[:2]
        pooled = px[: h - h % grid, : w - w % grid].reshape(grid, h // grid, grid, w // grid, 3).mean(axis=(1, 3))
        rows.append(((pooled - 128.0) / 128.0).ravel())
    return EmbeddingSet(tuple(ids), np.array(rows))


def scripted_timing(method: str, n_frames: int) -> TimingLog:
    cost = SCRIPTED_FRAME_COST[method]
    return TimingLog(tuple((i, round((i + 1) * cost, 9)) for i in range(n_frames)))


# --------------------------------------------------------------------------- #
# Pipeline
# --------------------------------------------------------------------------- #


def write_dataset(root: str | Path, n_images: int = 20, seed: int = 0) -> Path:
    """Materialize the synthetic originals, masks, labels and ground truth under ``root``."""
    root = Path(root)
    images, masks, labels, gts = generate_dataset(n_images, seed)
    (root / "original").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    for image_id, img in images.items():
        write_image(root / "original" / f"{image_id}.png", img)
        write_mask(root / "masks" / f"{image_id}.png", masks[image_id])
    write_ground_truth(root / "ground_truth.json", gts)
    return root


def _run_models(tag: str, images, masks, labels, gts, root: Path) -> None:
    table = classify(images, masks, labels)
    write_scores(root / "scores" / f"{tag}.csv", root / "labels.csv", table)
    dets = detect(images, masks, gts)
    write_detections(root / "detections" / f"{tag}.json", dets)
    write_detections(root / "person_detections" / f"{tag}.json", dets.for_class(0))
    write_embeddings(root / "embeddings" / f"{tag}.csv", embed(images))


def run_toy_pipeline(root: str | Path, n_images: int = 20, seed: int = 0, measured_timing: bool = False,
                     formats=("csv", "json", "svg")):
    """Generate data, run all six operators, the scripted models, and the report.

    Returns the trade-off table. With ``measured_timing`` the report uses the
    wall-clock logs from the anonymize runs instead of the scripted ones, which
    makes the throughput column non-reproducible.
    """
    from .report import emit, evaluate_all, load_config

    root = Path(root)
    write_dataset(root, n_images, seed)
    _, _, labels, gts = generate_dataset(n_images, seed)
    for sub in ("scores", "detections", "person_detections", "embeddings", "timing", "timing_measured"):
        (root / sub).mkdir(exist_ok=True)
    masks = load_masks(root / "masks")
    originals = load_image_dir(root / "original")
    _run_models("original", originals, masks, labels, gts, root)

    for name, (kind, k) in TOY_METHODS.items():
        spec = anon.OperatorSpec(kind, k, TOY_KEY if kind == "encrypt" else None,
                                 TOY_NONCE if kind == "encrypt" else None)
        t0 = time.perf_counter()
        measured = anon.run_anonymize_job(spec, root / "original", root / "masks", root / "anonymized" / name)
        log.info("anonymized with %s in %.3fs", name, time.perf_counter() - t0)
        write_timing(root / "timing_measured" / f"{name}.csv", measured)
        write_timing(root / "timing" / f"{name}.csv", scripted_timing(name, n_images))
        _run_models(name, load_image_dir(root / "anonymized" / name), masks, labels, gts, root)

    timing_dir = "timing_measured" if measured_timing else "timing"
    lines = [
        "[evaluation]",
        "weights = 1/3,1/3,1/3",
        "iou = 0.5",
        "conf = 0.25",
        "robust_iou = 0.5",
        "ssim = 0.99",
        "person_class = 0",
        "mmd_sigma = 10",
        "mmd_scale = 1000",
        "ground_truth = ground_truth.json",
        "original_images = original",
        "original_person_detections = person_detections/original.json",
        "original_embeddings = embeddings/original.csv",
        "baseline_scores = scores/original.csv",
        "baseline_labels = labels.csv",
        "",
    ]
    for name, (kind, k) in TOY_METHODS.items():
        lines += [
            f"[method.{name}]",
            f"note = {'LR-only (no super-resolution)' if kind == 'lowres' else anon.OperatorSpec.make(kind, k, TOY_KEY, TOY_NONCE).label}",
            f"scores = scores/{name}.csv",
            "labels = labels.csv",
            f"detections = detections/{name}.json",
            f"person_detections = person_detections/{name}.json",
            f"images = anonymized/{name}",
            f"embeddings = embeddings/{name}.csv",
            f"timing = {timing_dir}/{name}.csv",
            "",
        ]
    (root / "toy.ini").write_text("\n".join(lines))
    table = evaluate_all(load_config(root / "toy.ini"))
    for fmt in formats:
        emit(table, fmt, root / "report" / f"report.{fmt}")
    return table
