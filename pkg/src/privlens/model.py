"""Core domain types and file ingestion.

All loaders are pure given the file-system snapshot and return immutable
values. Every loader error carries the offending image id(s).
"""

from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
EMBEDDING_MAGIC = b"PLEMB1"


class PrivlensError(Exception):
    """Base class for all errors raised by this package."""


class LoadError(PrivlensError, ValueError):
    """An input file violates its type's invariants.

    ``ids`` lists the offending image ids (or file stems) when known.
    """

    def __init__(self, message: str, ids: Sequence[str] = ()):
        super().__init__(message)
        self.ids = list(ids)


class UndefinedMetricError(PrivlensError, ValueError):
    """A metric is undefined for the given input, e.g. AP with no positives."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------- #
# Raster types
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit RGB image stored as a read-only ``(height, width, 3)`` uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) pixels, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255) or np.any(px != np.round(px)):
                raise ValueError("pixel intensities must be integers in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.shape, self.pixels.tobytes()))

    @classmethod
    def from_pil(cls, im: Image.Image) -> "RasterImage":
        return cls(np.asarray(im.convert("RGB"), dtype=np.uint8))

    def to_pil(self) -> Image.Image:
        return Image.fromarray(np.array(self.pixels), mode="RGB")


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Binary human-region mask; ``bits`` is a read-only ``(height, width)`` bool array."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {b.shape}")
        if b.dtype != bool:
            if not np.all((b == 0) | (b == 1)):
                raise ValueError("mask values must be strictly binary")
            b = b.astype(bool)
        object.__setattr__(self, "bits", _frozen(b))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def __eq__(self, other):
        if not isinstance(other, RegionMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.shape, self.bits.tobytes()))

    @classmethod
    def full(cls, height: int, width: int) -> "RegionMask":
        return cls(np.ones((height, width), dtype=bool))

    @classmethod
    def empty(cls, height: int, width: int) -> "RegionMask":
        return cls(np.zeros((height, width), dtype=bool))

    def bounding_box(self) -> tuple[int, int, int, int] | None:
        """Return ``(y0, x0, y1, x1)`` (exclusive ends) of the set bits, or None."""
        ys, xs = np.nonzero(self.bits)
        if ys.size == 0:
            return None
        return int(ys.min()), int(xs.min()), int(ys.max()) + 1, int(xs.max()) + 1


# --------------------------------------------------------------------------- #
# Boxes and detections
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, order=True)
class BBox:
    """Axis-aligned box in COCO ``[x, y, w, h]`` convention."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h)):
            raise ValueError("box coordinates must be finite")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box extent must be positive, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


@dataclass(frozen=True, order=True)
class Detection:
    image_id: str
    class_id: int
    box: BBox
    score: float

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("image_id must be a non-empty string")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True, order=True)
class GroundTruth:
    image_id: str
    class_id: int
    box: BBox


def _detection_key(d: Detection):
    return (d.image_id, d.class_id, d.box.as_list(), d.score)


@dataclass(frozen=True)
class DetectionSet:
    """Scored boxes, kept in a canonical order so equality ignores file order."""

    entries: tuple[Detection, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=_detection_key)))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def for_class(self, class_id: int) -> "DetectionSet":
        return DetectionSet(tuple(d for d in self.entries if d.class_id == class_id))

    def above(self, conf: float) -> "DetectionSet":
        return DetectionSet(tuple(d for d in self.entries if d.score >= conf))

    @property
    def class_ids(self) -> set[int]:
        return {d.class_id for d in self.entries}


@dataclass(frozen=True)
class GroundTruthSet:
    entries: tuple[GroundTruth, ...] = ()
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self,
            "entries",
            tuple(sorted(self.entries, key=lambda g: (g.image_id, g.class_id, g.box.as_list()))),
        )
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if self.class_names:
            bad = sorted({g.image_id for g in self.entries if not 0 <= g.class_id < len(self.class_names)})
            if bad:
                raise LoadError(f"class_id outside class_names for images {bad}", bad)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def class_ids(self) -> set[int]:
        return {g.class_id for g in self.entries}

    def class_name(self, class_id: int) -> str:
        if 0 <= class_id < len(self.class_names):
            return self.class_names[class_id]
        return str(class_id)


# --------------------------------------------------------------------------- #
# Score tables, embeddings, timing
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class AttributeScoreTable:
    """Per-image classifier scores and binary labels over N attributes.

    Rows are sorted by image id; ``scores`` and ``labels`` are ``(rows, N)``.
    """

    attribute_names: tuple[str, ...]
    image_ids: tuple[str, ...]
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        names = tuple(self.attribute_names)
        ids = tuple(self.image_ids)
        scores = np.asarray(self.scores, dtype=np.float64).reshape(len(ids), len(names))
        labels = np.asarray(self.labels).reshape(len(ids), len(names))
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise LoadError(f"duplicate image ids {dup}", dup)
        bad = [ids[r] for r in range(len(ids)) if not np.all(np.isfinite(scores[r]))
               or np.any(scores[r] < 0) or np.any(scores[r] > 1)]
        if bad:
            raise LoadError(f"scores outside [0, 1] for {bad}", bad)
        bad = [ids[r] for r in range(len(ids)) if not np.all((labels[r] == 0) | (labels[r] == 1))]
        if bad:
            raise LoadError(f"non-binary labels for {bad}", bad)
        order = sorted(range(len(ids)), key=lambda r: ids[r])
        object.__setattr__(self, "attribute_names", names)
        object.__setattr__(self, "image_ids", tuple(ids[r] for r in order))
        object.__setattr__(self, "scores", _frozen(scores[order]))
        object.__setattr__(self, "labels", _frozen(labels[order].astype(np.int8)))

    @property
    def n_attributes(self) -> int:
        return len(self.attribute_names)

    def __len__(self):
        return len(self.image_ids)

    def __eq__(self, other):
        if not isinstance(other, AttributeScoreTable):
            return NotImplemented
        return (self.attribute_names == other.attribute_names
                and self.image_ids == other.image_ids
                and np.array_equal(self.scores, other.scores)
                and np.array_equal(self.labels, other.labels))


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """Rows of equal-length finite vectors keyed by image id (sorted)."""

    image_ids: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        ids = tuple(self.image_ids)
        vec = np.asarray(self.vectors, dtype=np.float64)
        if vec.ndim != 2 or vec.shape[0] != len(ids):
            raise ValueError("vectors must be (rows, dim) matching image_ids")
        if vec.shape[1] < 1:
            raise ValueError("embedding dimension must be >= 1")
        bad = [ids[r] for r in range(len(ids)) if not np.all(np.isfinite(vec[r]))]
        if bad:
            raise LoadError(f"non-finite embedding components for {bad}", bad)
        order = sorted(range(len(ids)), key=lambda r: ids[r])
        object.__setattr__(self, "image_ids", tuple(ids[r] for r in order))
        object.__setattr__(self, "vectors", _frozen(vec[order]))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.image_ids)

    def __eq__(self, other):
        if not isinstance(other, EmbeddingSet):
            return NotImplemented
        return self.image_ids == other.image_ids and np.array_equal(self.vectors, other.vectors)


@dataclass(frozen=True)
class TimingLog:
    """Per-frame completion timestamps in seconds."""

    frames: tuple[tuple[int, float], ...]

    def __post_init__(self):
        frames = tuple((int(i), float(t)) for i, t in self.frames)
        object.__setattr__(self, "frames", frames)
        if len(frames) < 2:
            raise ValueError(f"timing log needs at least 2 frames, got {len(frames)}")
        ts = [t for _, t in frames]
        if not all(math.isfinite(t) for t in ts):
            raise ValueError("timestamps must be finite")
        for a, b in zip(ts, ts[1:]):
            if not b > a:
                raise ValueError(f"timestamps must be strictly increasing ({a} -> {b})")

    @property
    def timestamps(self) -> list[float]:
        return [t for _, t in self.frames]

    def __len__(self):
        return len(self.frames)


# --------------------------------------------------------------------------- #
# Loaders
# --------------------------------------------------------------------------- #


def _list_images(path: Path) -> dict[str, Path]:
    if not path.is_dir():
        raise LoadError(f"not a directory: {path}")
    files: dict[str, Path] = {}
    for p in sorted(path.iterdir()):
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES:
            if p.stem in files:
                raise LoadError(f"duplicate image id {p.stem!r} in {path}", [p.stem])
            files[p.stem] = p
    return files


def read_image(path: str | Path) -> RasterImage:
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            return RasterImage.from_pil(im)
    except (OSError, UnidentifiedImageError, SyntaxError) as exc:
        raise LoadError(f"cannot decode image {path.stem!r}: {exc}", [path.stem]) from exc


def load_image_dir(path: str | Path, manifest: Iterable[str] | None = None) -> dict[str, RasterImage]:
    """Decode every PNG/JPEG in ``path``; keys are file stems in sorted order."""
    files = _list_images(Path(path))
    if manifest is not None:
        wanted = list(manifest)
        missing = sorted(set(wanted) - set(files))
        if missing:
            raise LoadError(f"images missing from {path}: {missing}", missing)
        files = {k: files[k] for k in wanted}
    if not files:
        raise LoadError(f"no PNG/JPEG images in {path}")
    return {k: read_image(files[k]) for k in sorted(files)}


def read_mask(path: str | Path) -> RegionMask:
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode not in ("1", "L", "I", "I;16", "P"):
                raise LoadError(f"mask {path.stem!r} must be single-channel, got mode {im.mode}", [path.stem])
            if im.mode == "P":
                raise LoadError(f"mask {path.stem!r} is palette-encoded, expected single-channel", [path.stem])
            arr = np.asarray(im)
    except (OSError, UnidentifiedImageError, SyntaxError) as exc:
        raise LoadError(f"cannot decode mask {path.stem!r}: {exc}", [path.stem]) from exc
    return RegionMask(arr != 0)


def load_masks(path: str | Path) -> dict[str, RegionMask]:
    """Load single-channel PNG masks; any nonzero pixel is a human-region bit."""
    files = _list_images(Path(path))
    return {k: read_mask(files[k]) for k in sorted(files)}


def write_mask(path: str | Path, mask: RegionMask) -> None:
    Image.fromarray(mask.bits.astype(np.uint8) * 255, mode="L").save(path)


def write_image(path: str | Path, img: RasterImage) -> None:
    path = Path(path)
    if path.suffix.lower() in (".jpg", ".jpeg"):
        img.to_pil().save(path, quality=95)
    else:
        img.to_pil().save(path)


def _read_json_array(path: Path) -> list:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read JSON {path}: {exc}") from exc
    if not isinstance(data, list):
        raise LoadError(f"{path}: expected a JSON array")
    return data


def _parse_box(rec: dict, image_id: str) -> BBox:
    try:
        x, y, w, h = (float(v) for v in rec["bbox"])
        return BBox(x, y, w, h)
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"bad bbox for image {image_id!r}: {exc}", [image_id]) from exc


def _record_id(rec) -> str:
    if not isinstance(rec, dict) or "image_id" not in rec:
        raise LoadError(f"record without image_id: {rec!r}")
    image_id = str(rec["image_id"])
    if not image_id:
        raise LoadError("empty image_id", [""])
    return image_id


def load_detections(path: str | Path) -> DetectionSet:
    """Load COCO-results style detections (``image_id, category_id, bbox, score``)."""
    out = []
    for rec in _read_json_array(Path(path)):
        image_id = _record_id(rec)
        box = _parse_box(rec, image_id)
        try:
            score = float(rec["score"])
            class_id = int(rec["category_id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"bad detection for image {image_id!r}: {exc}", [image_id]) from exc
        if not (0.0 <= score <= 1.0):
            raise LoadError(f"score {score} outside [0, 1] for image {image_id!r}", [image_id])
        out.append(Detection(image_id, class_id, box, score))
    return DetectionSet(tuple(out))


def load_ground_truth(path: str | Path, class_names: Sequence[str] | None = None) -> GroundTruthSet:
    """Load ground-truth boxes.

    Accepts either a bare JSON array of records, or an object
    ``{"class_names": [...], "annotations": [...]}``.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read JSON {path}: {exc}") from exc
    names = list(class_names or ())
    if isinstance(data, dict):
        names = list(data.get("class_names", names))
        data = data.get("annotations", [])
    if not isinstance(data, list):
        raise LoadError(f"{path}: expected a JSON array of annotations")
    out = []
    for rec in data:
        image_id = _record_id(rec)
        box = _parse_box(rec, image_id)
        try:
            class_id = int(rec["category_id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"bad annotation for image {image_id!r}: {exc}", [image_id]) from exc
        out.append(GroundTruth(image_id, class_id, box))
    return GroundTruthSet(tuple(out), tuple(names))


def write_detections(path: str | Path, dets: DetectionSet) -> None:
    recs = [{"image_id": d.image_id, "category_id": d.class_id, "bbox": d.box.as_list(), "score": d.score}
            for d in dets]
    Path(path).write_text(json.dumps(recs, indent=1) + "\n")


def write_ground_truth(path: str | Path, gts: GroundTruthSet) -> None:
    recs = [{"image_id": g.image_id, "category_id": g.class_id, "bbox": g.box.as_list()} for g in gts]
    Path(path).write_text(json.dumps({"class_names": list(gts.class_names), "annotations": recs}, indent=1) + "\n")


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise LoadError(f"cannot read CSV {path}: {exc}") from exc
    if not rows:
        raise LoadError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def _csv_matrix(path: Path, kind: str) -> tuple[list[str], dict[str, list[float]]]:
    header, rows = _read_csv(path)
    if not header or header[0] != "image_id":
        raise LoadError(f"{path}: header must start with 'image_id'")
    width = len(header) - 1
    out: dict[str, list[float]] = {}
    for row in rows:
        image_id = row[0]
        if not image_id:
            raise LoadError(f"{path}: empty image_id", [""])
        if len(row) - 1 != width:
            raise LoadError(f"{path}: ragged row for {image_id!r} ({len(row) - 1} of {width} values)", [image_id])
        if image_id in out:
            raise LoadError(f"{path}: duplicate image id {image_id!r}", [image_id])
        try:
            vals = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise LoadError(f"{path}: non-numeric {kind} for {image_id!r}", [image_id]) from exc
        if not all(math.isfinite(v) for v in vals):
            raise LoadError(f"{path}: non-finite {kind} for {image_id!r}", [image_id])
        out[image_id] = vals
    return header[1:], out


def load_scores(scores_path: str | Path, labels_path: str | Path) -> AttributeScoreTable:
    """Load a scores CSV and its parallel labels CSV, aligned by image id."""
    names, scores = _csv_matrix(Path(scores_path), "score")
    label_names, labels = _csv_matrix(Path(labels_path), "label")
    if names != label_names:
        raise LoadError(f"attribute headers differ: {names} vs {label_names}")
    missing = sorted(set(scores) ^ set(labels))
    if missing:
        raise LoadError(f"image ids not present in both scores and labels: {missing}", missing)
    ids = sorted(scores)
    return AttributeScoreTable(tuple(names), tuple(ids),
                               np.array([scores[i] for i in ids], dtype=np.float64).reshape(len(ids), len(names)),
                               np.array([labels[i] for i in ids]).reshape(len(ids), len(names)))


def write_scores(scores_path: str | Path, labels_path: str | Path, table: AttributeScoreTable) -> None:
    for path, mat, fmt in ((scores_path, table.scores, lambda v: repr(float(v))),
                           (labels_path, table.labels, lambda v: str(int(v)))):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["image_id", *table.attribute_names])
            for image_id, row in zip(table.image_ids, mat):
                w.writerow([image_id, *(fmt(v) for v in row)])


def load_embeddings(path: str | Path) -> EmbeddingSet:
    """Load embeddings from CSV (``image_id,v0..``) or the PLEMB1 binary format."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(EMBEDDING_MAGIC))
    if head == EMBEDDING_MAGIC:
        return _load_embeddings_binary(path)
    _, rows = _csv_matrix(path, "component")
    if not rows:
        raise LoadError(f"{path}: no embedding rows")
    ids = sorted(rows)
    return EmbeddingSet(tuple(ids), np.array([rows[i] for i in ids], dtype=np.float64))


def _load_embeddings_binary(path: Path) -> EmbeddingSet:
    data = path.read_bytes()
    off = len(EMBEDDING_MAGIC)
    if len(data) < off + 4:
        raise LoadError(f"{path}: truncated header")
    (dim,) = struct.unpack_from("<I", data, off)
    off += 4
    if dim < 1:
        raise LoadError(f"{path}: embedding dimension must be >= 1")
    ids, rows = [], []
    while off < len(data):
        if off + 4 > len(data):
            raise LoadError(f"{path}: truncated id length after {ids[-1:]}", ids[-1:])
        (n,) = struct.unpack_from("<I", data, off)
        off += 4
        image_id = data[off:off + n].decode("utf-8")
        off += n
        need = 8 * dim
        if off + need > len(data):
            raise LoadError(f"{path}: ragged row for {image_id!r}", [image_id])
        rows.append(struct.unpack_from(f"<{dim}d", data, off))
        off += need
        if image_id in ids:
            raise LoadError(f"{path}: duplicate image id {image_id!r}", [image_id])
        ids.append(image_id)
    if not ids:
        raise LoadError(f"{path}: no embedding rows")
    return EmbeddingSet(tuple(ids), np.array(rows, dtype=np.float64))


def write_embeddings(path: str | Path, emb: EmbeddingSet, binary: bool | None = None) -> None:
    """Write CSV, or PLEMB1 binary when ``binary`` (default: by ``.bin`` suffix)."""
    path = Path(path)
    if binary is None:
        binary = path.suffix.lower() == ".bin"
    if binary:
        parts = [EMBEDDING_MAGIC, struct.pack("<I", emb.dim)]
        for image_id, vec in zip(emb.image_ids, emb.vectors):
            raw = image_id.encode("utf-8")
            parts.append(struct.pack("<I", len(raw)) + raw + struct.pack(f"<{emb.dim}d", *vec))
        path.write_bytes(b"".join(parts))
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["image_id", *(f"v{i}" for i in range(emb.dim))])
        for image_id, vec in zip(emb.image_ids, emb.vectors):
            w.writerow([image_id, *(repr(float(v)) for v in vec)])


def load_timing(path: str | Path) -> TimingLog:
    header, rows = _read_csv(Path(path))
    if [h.strip() for h in header] != ["frame_index", "timestamp_seconds"]:
        raise LoadError(f"{path}: header must be frame_index,timestamp_seconds")
    try:
        return TimingLog(tuple((int(r[0]), float(r[1])) for r in rows))
    except (ValueError, IndexError) as exc:
        raise LoadError(f"{path}: {exc}") from exc


def write_timing(path: str | Path, log: TimingLog) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame_index", "timestamp_seconds"])
        for i, t in log.frames:
            w.writerow([i, repr(t)])


def pair_by_id(left: Mapping[str, object], right: Mapping[str, object], what: str = "inputs") -> list[str]:
    """Return the shared sorted ids, raising if either side lacks any id."""
    missing = sorted(set(left) ^ set(right))
    if missing:
        raise LoadError(f"unpaired {what}: {missing}", missing)
    return sorted(left)


__all__ = [
    "AttributeScoreTable", "BBox", "Detection", "DetectionSet", "EmbeddingSet", "GroundTruth",
    "GroundTruthSet", "LoadError", "PrivlensError", "RasterImage", "RegionMask", "TimingLog",
    "UndefinedMetricError", "load_detections", "load_embeddings", "load_ground_truth",
    "load_image_dir", "load_masks", "load_scores", "load_timing", "pair_by_id", "read_image",
    "read_mask", "write_detections", "write_embeddings", "write_ground_truth", "write_image",
    "write_mask", "write_scores", "write_timing",
]
