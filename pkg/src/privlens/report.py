"""Evaluate many methods, rank them per dimension, and emit CSV/JSON/SVG reports."""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import practicality as prac
from .model import (
    LoadError,
    PrivlensError,
    load_detections,
    load_embeddings,
    load_ground_truth,
    load_image_dir,
    load_scores,
    load_timing,
)
from .privacy import PrivacyResult, cmap, relative_drop
from .utility import DEFAULT_CONF, DEFAULT_IOU, evaluate_utility

log = logging.getLogger(__name__)

METHOD_SECTION = "method."
METHOD_KEYS = ("scores", "labels", "detections", "person_detections", "images", "embeddings", "timing", "note")
SHARED_PATH_KEYS = ("ground_truth", "original_images", "original_person_detections",
                    "original_embeddings", "baseline_scores", "baseline_labels")
DECIMALS = 6


class ReportError(PrivlensError, ValueError):
    pass


# --------------------------------------------------------------------------- #
# Configuration
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class MethodSpec:
    name: str
    paths: dict[str, str] = field(default_factory=dict)
    note: str = ""


@dataclass(frozen=True)
class EvaluationConfig:
    methods: tuple[MethodSpec, ...]
    weights: prac.WeightVector = prac.EQUAL_WEIGHTS
    iou: float = DEFAULT_IOU
    conf: float = DEFAULT_CONF
    robust_iou: float = DEFAULT_IOU
    ssim: float = prac.DEFAULT_SSIM_THRESH
    person_class: int = prac.PERSON_CLASS
    mmd_sigma: float = prac.DEFAULT_MMD_SIGMA
    mmd_scale: float = prac.DEFAULT_MMD_SCALE
    shared: dict[str, str] = field(default_factory=dict)
    base_dir: Path = Path(".")

    def __post_init__(self):
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ReportError(f"duplicate method names: {dup}")

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    def params(self) -> dict[str, Any]:
        """Every threshold and parameter, echoed into reports for provenance."""
        return {
            "weights": list(self.weights.as_tuple()),
            "iou": self.iou,
            "conf": self.conf,
            "robust_iou": self.robust_iou,
            "ssim": self.ssim,
            "person_class": self.person_class,
            "mmd_sigma": self.mmd_sigma,
            "mmd_scale": self.mmd_scale,
            "inputs": dict(sorted(self.shared.items())),
        }


def load_config(path: str | Path) -> EvaluationConfig:
    """Read an INI-style config: an ``[evaluation]`` section and one ``[method.NAME]`` per method.

    Relative paths are resolved against the config file's directory.
    """
    path = Path(path)
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ReportError(f"cannot read config {path}: {exc}") from exc
    ev = cp["evaluation"] if cp.has_section("evaluation") else {}

    def num(key, default, cast=float):
        try:
            return cast(ev.get(key, default))
        except ValueError as exc:
            raise ReportError(f"config key {key!r}: {exc}") from exc

    methods = []
    for section in cp.sections():
        if not section.startswith(METHOD_SECTION):
            continue
        name = section[len(METHOD_SECTION):]
        unknown = sorted(set(cp[section]) - set(METHOD_KEYS))
        if unknown:
            raise ReportError(f"method {name}: unknown keys {unknown}")
        paths = {k: v for k, v in cp[section].items() if k != "note" and v}
        methods.append(MethodSpec(name, paths, cp[section].get("note", "")))
    weights = prac.WeightVector.parse(ev["weights"]) if "weights" in ev else prac.EQUAL_WEIGHTS
    shared = {k: ev[k] for k in SHARED_PATH_KEYS if ev.get(k)}
    return EvaluationConfig(
        methods=tuple(methods), weights=weights,
        iou=num("iou", DEFAULT_IOU), conf=num("conf", DEFAULT_CONF),
        robust_iou=num("robust_iou", DEFAULT_IOU), ssim=num("ssim", prac.DEFAULT_SSIM_THRESH),
        person_class=num("person_class", prac.PERSON_CLASS, int),
        mmd_sigma=num("mmd_sigma", prac.DEFAULT_MMD_SIGMA), mmd_scale=num("mmd_scale", prac.DEFAULT_MMD_SCALE),
        shared=shared, base_dir=path.parent,
    )


# --------------------------------------------------------------------------- #
# Table types
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class MethodReport:
    method_name: str
    note: str = ""
    privacy_cmap: float | None = None
    per_attribute_map: dict[str, float] = field(default_factory=dict)
    skipped_attributes: tuple[str, ...] = ()
    privacy_drop: dict[str, float | None] | None = None
    utility_per_class: dict[str, dict[str, float | None]] = field(default_factory=dict)
    utility_macro: dict[str, float | None] | None = None
    throughput_fps: float | None = None
    robustness_count: int | None = None
    intelligibility_mmd: float | None = None
    components: tuple[float, float, float] | None = None
    practicality: float | None = None

    @property
    def missing(self) -> list[str]:
        out = []
        if self.privacy_cmap is None:
            out.append("privacy")
        if self.utility_macro is None:
            out.append("utility")
        if self.throughput_fps is None:
            out.append("throughput")
        if self.robustness_count is None:
            out.append("robustness")
        if self.intelligibility_mmd is None:
            out.append("intelligibility")
        if self.practicality is None:
            out.append("practicality")
        return out

    @property
    def macro_f1(self) -> float | None:
        return None if self.utility_macro is None else self.utility_macro["f1"]

    @property
    def has_raw_practicality(self) -> bool:
        return None not in (self.throughput_fps, self.robustness_count, self.intelligibility_mmd)


@dataclass(frozen=True)
class TradeoffTable:
    rows: tuple[MethodReport, ...]
    rankings: dict[str, list[str]]
    weights: prac.WeightVector
    params: dict[str, Any] = field(default_factory=dict)

    def row(self, name: str) -> MethodReport:
        for r in self.rows:
            if r.method_name == name:
                return r
        raise KeyError(name)


def rank_rows(rows) -> dict[str, list[str]]:
    """Per-dimension orderings; ties are broken by method name."""
    def order(attr, descending):
        have = [r for r in rows if getattr(r, attr) is not None]
        sign = -1 if descending else 1
        return [r.method_name for r in sorted(have, key=lambda r: (sign * getattr(r, attr), r.method_name))]

    return {
        "privacy": order("privacy_cmap", False),
        "utility": order("macro_f1", True),
        "practicality": order("practicality", True),
    }


def _fuse_rows(rows, w: prac.WeightVector) -> tuple[MethodReport, ...]:
    ready = [r for r in rows if r.has_raw_practicality]
    comps = {}
    if ready:
        inputs = prac.PracticalityInputs(
            {r.method_name: r.throughput_fps for r in ready},
            {r.method_name: float(r.robustness_count) for r in ready},
            {r.method_name: r.intelligibility_mmd for r in ready},
        )
        comps = prac.normalized_components(inputs)
    out = []
    for r in rows:
        c = comps.get(r.method_name)
        out.append(replace(r, components=c, practicality=None if c is None else prac.fuse(c, w)))
    return tuple(sorted(out, key=lambda r: r.method_name))


def build_table(rows, w: prac.WeightVector, params: dict | None = None) -> TradeoffTable:
    rows = _fuse_rows(rows, w)
    return TradeoffTable(rows, rank_rows(rows), w, dict(params or {}))


def rerank(table: TradeoffTable, w: prac.WeightVector) -> TradeoffTable:
    """Re-weight practicality from the stored raw components; privacy and utility are untouched."""
    if not isinstance(w, prac.WeightVector):
        raise ReportError("rerank needs a WeightVector")
    params = dict(table.params)
    if "weights" in params:
        params["weights"] = list(w.as_tuple())
    return build_table(table.rows, w, params)


# --------------------------------------------------------------------------- #
# Evaluation
# --------------------------------------------------------------------------- #


def _load_shared(config: EvaluationConfig) -> dict[str, Any]:
    shared: dict[str, Any] = {}
    s = config.shared
    try:
        if "ground_truth" in s:
            shared["gts"] = load_ground_truth(config.resolve(s["ground_truth"]))
        if "original_images" in s:
            shared["orig_imgs"] = load_image_dir(config.resolve(s["original_images"]))
        if "original_person_detections" in s:
            shared["orig_people"] = load_detections(config.resolve(s["original_person_detections"]))
        if "original_embeddings" in s:
            shared["orig_emb"] = load_embeddings(config.resolve(s["original_embeddings"]))
        if "baseline_scores" in s and "baseline_labels" in s:
            shared["baseline"] = cmap(load_scores(config.resolve(s["baseline_scores"]),
                                                  config.resolve(s["baseline_labels"])))
    except PrivlensError as exc:
        raise ReportError(f"shared inputs: {exc}") from exc
    return shared


def evaluate_method(spec: MethodSpec, config: EvaluationConfig, shared: dict[str, Any]) -> MethodReport:
    p = {k: config.resolve(v) for k, v in spec.paths.items()}
    fields: dict[str, Any] = {"method_name": spec.name, "note": spec.note}

    if "scores" in p and "labels" in p:
        res: PrivacyResult = cmap(load_scores(p["scores"], p["labels"]))
        fields.update(privacy_cmap=res.cmap, per_attribute_map=res.per_attribute_ap,
                      skipped_attributes=res.skipped_attributes)
        base = shared.get("baseline")
        if base is not None:
            common = set(base.per_attribute_ap) & set(res.per_attribute_ap)
            fields["privacy_drop"] = relative_drop(
                PrivacyResult({k: base.per_attribute_ap[k] for k in sorted(common)}, base.cmap),
                PrivacyResult({k: res.per_attribute_ap[k] for k in sorted(common)}, res.cmap))

    gts = shared.get("gts")
    if "detections" in p and gts is not None:
        util = evaluate_utility(load_detections(p["detections"]), gts, config.iou, config.conf)
        fields["utility_per_class"] = {gts.class_name(c): v for c, v in util.per_class.items()}
        fields["utility_macro"] = util.macro

    if "timing" in p:
        fields["throughput_fps"] = prac.fps(load_timing(p["timing"]))

    if "person_detections" in p and "images" in p and "orig_people" in shared and "orig_imgs" in shared:
        fields["robustness_count"] = prac.robustness(
            shared["orig_people"], load_detections(p["person_detections"]),
            shared["orig_imgs"], load_image_dir(p["images"]),
            config.robust_iou, config.ssim, config.person_class)

    if "embeddings" in p and "orig_emb" in shared:
        fields["intelligibility_mmd"] = prac.mmd(shared["orig_emb"], load_embeddings(p["embeddings"]),
                                                 config.mmd_sigma, config.mmd_scale)
    return MethodReport(**fields)


def evaluate_all(config: EvaluationConfig) -> TradeoffTable:
    """Evaluate every configured method; absent inputs leave that dimension missing."""
    if not config.methods:
        raise ReportError("no methods configured")
    shared = _load_shared(config)
    rows = []
    for spec in sorted(config.methods, key=lambda m: m.name):
        try:
            rows.append(evaluate_method(spec, config, shared))
        except PrivlensError as exc:
            raise ReportError(f"method {spec.name}: {exc}") from exc
        log.info("evaluated %s", spec.name)
    return build_table(rows, config.weights, config.params())


# --------------------------------------------------------------------------- #
# Serialization
# --------------------------------------------------------------------------- #


_FIXED = re.compile(r'"\x00(-?[0-9.]+)\x00"')


def _fx(v) -> str | None:
    return None if v is None else f"{v:.{DECIMALS}f}"


def _jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return f"\x00{obj:.{DECIMALS}f}\x00"
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_fixed(obj) -> str:
    """JSON with every float written in fixed 6-decimal notation."""
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=False, ensure_ascii=False)
    return _FIXED.sub(lambda m: m.group(1), text.replace("\\u0000", "\x00")) + "\n"


def row_to_dict(r: MethodReport) -> dict:
    return {
        "method": r.method_name,
        "note": r.note,
        "privacy": {
            "cmap": r.privacy_cmap,
            "per_attribute_ap": r.per_attribute_map,
            "skipped": list(r.skipped_attributes),
            "drop_percent": r.privacy_drop,
        },
        "utility": None if r.utility_macro is None else {"per_class": r.utility_per_class,
                                                         "macro": r.utility_macro},
        "practicality": {
            "throughput_fps": r.throughput_fps,
            "robustness_count": r.robustness_count,
            "intelligibility_mmd": r.intelligibility_mmd,
            "normalized": None if r.components is None else dict(zip(("R_n", "I_n", "T_n"), r.components)),
            "score": r.practicality,
        },
        "missing": r.missing,
    }


def table_to_dict(table: TradeoffTable) -> dict:
    return {
        "weights": list(table.weights.as_tuple()),
        "params": table.params,
        "rankings": table.rankings,
        "methods": [row_to_dict(r) for r in table.rows],
    }


def row_from_dict(d: dict) -> MethodReport:
    pv, ut, pr = d.get("privacy") or {}, d.get("utility"), d.get("practicality") or {}
    norm = pr.get("normalized")
    return MethodReport(
        method_name=d["method"], note=d.get("note", ""),
        privacy_cmap=pv.get("cmap"), per_attribute_map=dict(pv.get("per_attribute_ap") or {}),
        skipped_attributes=tuple(pv.get("skipped") or ()), privacy_drop=pv.get("drop_percent"),
        utility_per_class=dict(ut["per_class"]) if ut else {}, utility_macro=dict(ut["macro"]) if ut else None,
        throughput_fps=pr.get("throughput_fps"), robustness_count=pr.get("robustness_count"),
        intelligibility_mmd=pr.get("intelligibility_mmd"),
        components=None if norm is None else (norm["R_n"], norm["I_n"], norm["T_n"]),
        practicality=pr.get("score"),
    )


def _stored_weights(ws) -> prac.WeightVector:
    ws = [float(v) for v in ws]
    tol = 0.5 * 10 ** -DECIMALS
    # undo the 6-decimal rounding: prefer simple fractions (1/3), else pin the last weight
    snapped = [Fraction(v).limit_denominator(1000) for v in ws]
    if len(ws) == 3 and sum(snapped) == 1 and all(abs(float(f) - v) <= tol for f, v in zip(snapped, ws)):
        ws = [float(f) for f in snapped]
    elif len(ws) == 3 and abs(sum(ws) - 1.0) <= 3 * tol:
        ws[2] = 1.0 - ws[0] - ws[1]
    return prac.WeightVector(*ws)


def load_table(path: str | Path) -> TradeoffTable:
    try:
        data = json.loads(Path(path).read_text())
        rows = tuple(row_from_dict(m) for m in data["methods"])
        w = _stored_weights(data["weights"])
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read trade-off table {path}: {exc}") from exc
    return TradeoffTable(rows, data.get("rankings") or rank_rows(rows), w, data.get("params") or {})


CSV_COLUMNS = ("method", "note", "cmap", "precision", "recall", "f1", "pr_auc", "throughput_fps",
               "robustness_count", "intelligibility_mmd", "R_n", "I_n", "T_n", "practicality", "missing")


def table_to_csv(table: TradeoffTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in table.rows:
        macro = r.utility_macro or {}
        comps = r.components or (None, None, None)
        w.writerow([
            r.method_name, r.note, _fx(r.privacy_cmap),
            *(_fx(macro.get(k)) for k in ("precision", "recall", "f1", "pr_auc")),
            _fx(r.throughput_fps), "" if r.robustness_count is None else r.robustness_count,
            _fx(r.intelligibility_mmd), *(_fx(c) for c in comps), _fx(r.practicality),
            ";".join(r.missing),
        ])
    return buf.getvalue()


SVG_W, SVG_H, MARGIN = 640, 480, 60
MIN_R, MAX_R = 4.0, 20.0


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def table_to_svg(table: TradeoffTable) -> str:
    """Scatter of cMAP (x) against macro F1 (y); circle radius grows linearly with practicality."""
    for r in table.rows:
        if r.practicality is None:
            raise ReportError(f"method {r.method_name}: practicality missing, cannot draw SVG")
        if r.privacy_cmap is None or r.macro_f1 is None:
            raise ReportError(f"method {r.method_name}: privacy or utility missing, cannot draw SVG")
    pw, ph = SVG_W - 2 * MARGIN, SVG_H - 2 * MARGIN

    def sx(v):
        return MARGIN + v * pw

    def sy(v):
        return SVG_H - MARGIN - v * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
           f'viewBox="0 0 {SVG_W} {SVG_H}">',
           f'<rect x="0" y="0" width="{SVG_W}" height="{SVG_H}" fill="white"/>',
           f'<line x1="{MARGIN}" y1="{SVG_H - MARGIN}" x2="{SVG_W - MARGIN}" y2="{SVG_H - MARGIN}" stroke="black"/>',
           f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{SVG_H - MARGIN}" stroke="black"/>']
    for i in range(6):
        v = i / 5
        out.append(f'<text class="tick" x="{sx(v):.2f}" y="{SVG_H - MARGIN + 16}" font-size="10" '
                   f'text-anchor="middle">{v:.1f}</text>')
        out.append(f'<text class="tick" x="{MARGIN - 8}" y="{sy(v) + 3:.2f}" font-size="10" '
                   f'text-anchor="end">{v:.1f}</text>')
    out.append(f'<text class="axis" x="{SVG_W / 2}" y="{SVG_H - 15}" font-size="12" text-anchor="middle">'
               f'cMAP (lower = more private)</text>')
    out.append(f'<text class="axis" x="15" y="{SVG_H / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 15 {SVG_H / 2})">macro F1 (utility)</text>')
    for r in table.rows:
        x, y = sx(r.privacy_cmap), sy(r.macro_f1)
        radius = MIN_R + (MAX_R - MIN_R) * min(1.0, max(0.0, r.practicality))
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius:.2f}" fill="steelblue" '
                   f'fill-opacity="0.5" stroke="navy"/>')
        out.append(f'<text class="label" x="{x:.2f}" y="{y - radius - 3:.2f}" font-size="11" '
                   f'text-anchor="middle">{_esc(r.method_name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit(table: TradeoffTable, fmt: str, path: str | Path) -> Path:
    """Write ``table`` as csv, json or svg to ``path``."""
    path = Path(path)
    if fmt == "json":
        text = dumps_fixed(table_to_dict(table))
    elif fmt == "csv":
        text = table_to_csv(table)
    elif fmt == "svg":
        text = table_to_svg(table)
    else:
        raise ReportError(f"unknown format {fmt!r}; expected csv, json or svg")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
