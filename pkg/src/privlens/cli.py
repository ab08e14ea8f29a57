"""Command-line entry point: ``privlens <command> ...``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import practicality as prac
from .anonymizers import OperatorSpec, run_anonymize_job
from .model import (
    PrivlensError,
    load_detections,
    load_embeddings,
    load_ground_truth,
    load_image_dir,
    load_scores,
    load_timing,
    write_timing,
)
from .privacy import PrivacyResult, class_weights, cmap, relative_drop
from .report import dumps_fixed, emit, evaluate_all, load_config, load_table, rerank, table_to_dict
from .toy import run_toy_pipeline
from .utility import DEFAULT_CONF, DEFAULT_IOU, evaluate_utility

log = logging.getLogger("privlens")

OP_ALIASES = {"mask": "mask_black"}


def _write_json(obj, out: str | None) -> None:
    text = dumps_fixed(obj)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _hex16(value: str | None, what: str) -> bytes | None:
    if value is None:
        return None
    try:
        raw = bytes.fromhex(value)
    except ValueError as exc:
        raise PrivlensError(f"--{what}-hex is not valid hex") from exc
    if len(raw) != 16:
        raise PrivlensError(f"--{what}-hex must encode 16 bytes, got {len(raw)}")
    return raw


def cmd_anonymize(args) -> int:
    kind = OP_ALIASES.get(args.op, args.op)
    spec = OperatorSpec.make(kind, args.k, _hex16(args.key_hex, "key"), _hex16(args.nonce_hex, "nonce"))
    timing = run_anonymize_job(spec, args.images, args.masks, args.out)
    if args.timing:
        if timing is None:
            raise PrivlensError("fewer than 2 images processed; no timing log to write")
        write_timing(args.timing, timing)
        log.info("throughput %.3f fps", prac.fps(timing))
    return 0


def cmd_privacy(args) -> int:
    res = cmap(load_scores(args.scores, args.labels))
    out = res.to_dict()
    if args.baseline_scores:
        base = cmap(load_scores(args.baseline_scores, args.baseline_labels or args.labels))
        common = sorted(set(base.per_attribute_ap) & set(res.per_attribute_ap))
        out["drop_percent"] = relative_drop(
            PrivacyResult({k: base.per_attribute_ap[k] for k in common}, base.cmap),
            PrivacyResult({k: res.per_attribute_ap[k] for k in common}, res.cmap))
        out["baseline_cmap"] = base.cmap
    _write_json(out, args.out)
    return 0


def cmd_utility(args) -> int:
    gts = load_ground_truth(args.ground_truth)
    res = evaluate_utility(load_detections(args.detections), gts, args.iou, args.conf)
    out = {
        "iou": res.iou_thresh,
        "conf": res.conf_thresh,
        "per_class": {gts.class_name(c): v for c, v in res.per_class.items()},
        "macro": res.macro,
    }
    _write_json(out, args.out)
    curves_path = args.curves or (str(Path(args.out).with_suffix(".pr.csv")) if args.out else None)
    if curves_path:
        with open(curves_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["class", "recall", "precision"])
            for c, curve in res.curves.items():
                for r, p in curve.points:
                    w.writerow([gts.class_name(c), f"{r:.6f}", f"{p:.6f}"])
    return 0


def _expand(values: list[str] | None, n: int, what: str) -> list[str | None]:
    if not values:
        return [None] * n
    if len(values) != n:
        raise PrivlensError(f"expected {n} values for {what}, got {len(values)}")
    return values


def cmd_practicality(args) -> int:
    w = prac.WeightVector.parse(args.weights)
    sizes = {len(v) for v in (args.timing, args.anon_dets, args.anon_embeds, args.anon_images) if v}
    if len(sizes) != 1:
        raise PrivlensError("per-method options must all list the same number of methods")
    n = sizes.pop()
    names = args.names.split(",") if args.names else None
    if names is None:
        first = args.timing or args.anon_dets or args.anon_embeds or args.anon_images
        names = [Path(p).stem for p in first]
    if len(names) != n or len(set(names)) != n:
        raise PrivlensError(f"need {n} unique method names, got {names}")

    timing = _expand(args.timing, n, "--timing")
    dets = _expand(args.anon_dets, n, "--anon-dets")
    imgs = _expand(args.anon_images, n, "--anon-images")
    embeds = _expand(args.anon_embeds, n, "--anon-embeds")
    orig_dets = load_detections(args.orig_dets) if args.orig_dets else None
    orig_imgs = load_image_dir(args.orig_images) if args.orig_images else None
    orig_emb = load_embeddings(args.orig_embeds) if args.orig_embeds else None

    raw = {}
    for i, name in enumerate(names):
        row = {"throughput_fps": None, "robustness_count": None, "intelligibility_mmd": None}
        if timing[i]:
            row["throughput_fps"] = prac.fps(load_timing(timing[i]))
        if dets[i] and imgs[i] and orig_dets is not None and orig_imgs is not None:
            row["robustness_count"] = prac.robustness(orig_dets, load_detections(dets[i]), orig_imgs,
                                                      load_image_dir(imgs[i]), args.iou, args.ssim,
                                                      args.person_class)
        if embeds[i] and orig_emb is not None:
            row["intelligibility_mmd"] = prac.mmd(orig_emb, load_embeddings(embeds[i]), args.mmd_sigma,
                                                  args.mmd_scale)
        raw[name] = row
    ready = [m for m, r in raw.items() if None not in r.values()]
    scores = {}
    if ready:
        inputs = prac.PracticalityInputs({m: raw[m]["throughput_fps"] for m in ready},
                                         {m: float(raw[m]["robustness_count"]) for m in ready},
                                         {m: raw[m]["intelligibility_mmd"] for m in ready})
        comps = prac.normalized_components(inputs)
        scores = {m: {"normalized": dict(zip(("R_n", "I_n", "T_n"), c)), "score": prac.fuse(c, w)}
                  for m, c in comps.items()}
    out = {
        "weights": list(w.as_tuple()),
        "params": {"iou": args.iou, "ssim": args.ssim, "person_class": args.person_class,
                   "mmd_sigma": args.mmd_sigma, "mmd_scale": args.mmd_scale},
        "methods": {m: {**raw[m], **scores.get(m, {"normalized": None, "score": None})} for m in names},
    }
    _write_json(out, args.out)
    return 0


def cmd_report(args) -> int:
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    table = evaluate_all(load_config(args.config))
    out_dir = Path(args.out_dir)
    for fmt in formats:
        path = emit(table, fmt, out_dir / f"report.{fmt}")
        log.info("wrote %s", path)
    return 0


def cmd_rerank(args) -> int:
    table = rerank(load_table(args.table), prac.WeightVector.parse(args.weights))
    if args.out:
        emit(table, "json", args.out)
    else:
        sys.stdout.write(dumps_fixed(table_to_dict(table)))
    return 0


def cmd_class_weights(args) -> int:
    table = load_scores(args.labels, args.labels)
    _write_json(class_weights(table), args.out)
    return 0


def cmd_demo(args) -> int:
    table = run_toy_pipeline(args.out, args.images, args.seed, args.measured_timing)
    for dim, order in table.rankings.items():
        print(f"{dim:>12}: {' > '.join(order)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privlens", description="Privacy / utility / practicality evaluation "
                                                                  "for image anonymization methods.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("anonymize", help="apply a classical operator inside human masks")
    p.add_argument("--op", required=True, choices=["blur", "pixelate", "emboss", "mask", "mask_black", "encrypt",
                                                   "lowres"])
    p.add_argument("--k", type=int, default=None, help="kernel / block / target size (operator default if omitted)")
    p.add_argument("--key-hex")
    p.add_argument("--nonce-hex")
    p.add_argument("--images", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--timing", help="write per-frame completion timestamps to this CSV")
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("privacy", help="per-attribute AP and cMAP from classifier scores")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--baseline-scores", help="scores on original data; adds the relative drop table")
    p.add_argument("--baseline-labels", help="labels for the baseline (defaults to --labels)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_privacy)

    p = sub.add_parser("utility", help="detection precision/recall/F1/AP")
    p.add_argument("--detections", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--iou", type=float, default=DEFAULT_IOU)
    p.add_argument("--conf", type=float, default=DEFAULT_CONF)
    p.add_argument("--out")
    p.add_argument("--curves", help="PR-curve points CSV (default: <out>.pr.csv)")
    p.set_defaults(func=cmd_utility)

    p = sub.add_parser("practicality", help="throughput, robustness, intelligibility and their fusion")
    p.add_argument("--names", help="comma-separated method names (default: file stems)")
    p.add_argument("--timing", nargs="+")
    p.add_argument("--orig-dets")
    p.add_argument("--anon-dets", nargs="+")
    p.add_argument("--orig-images")
    p.add_argument("--anon-images", nargs="+")
    p.add_argument("--orig-embeds")
    p.add_argument("--anon-embeds", nargs="+")
    p.add_argument("--weights", default="1/3,1/3,1/3", help="w_r,w_i,w_t summing to 1 (fractions allowed)")
    p.add_argument("--iou", type=float, default=DEFAULT_IOU)
    p.add_argument("--ssim", type=float, default=prac.DEFAULT_SSIM_THRESH)
    p.add_argument("--person-class", type=int, default=prac.PERSON_CLASS)
    p.add_argument("--mmd-sigma", type=float, default=prac.DEFAULT_MMD_SIGMA)
    p.add_argument("--mmd-scale", type=float, default=prac.DEFAULT_MMD_SCALE)
    p.add_argument("--out")
    p.set_defaults(func=cmd_practicality)

    p = sub.add_parser("report", help="evaluate all methods in a config and write the trade-off table")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", default="csv,json,svg")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("rerank", help="re-weight practicality of an existing JSON table")
    p.add_argument("--table", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("class-weights", help="inverse-frequency attribute loss weights from a labels CSV")
    p.add_argument("--labels", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_class_weights)

    p = sub.add_parser("demo", help="build the synthetic toy dataset and run the whole pipeline")
    p.add_argument("--out", required=True)
    p.add_argument("--images", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--measured-timing", action="store_true",
                   help="rank throughput by wall-clock logs instead of the scripted ones")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="[%(levelname)s] %(name)s: %(message)s")
    try:
        return args.func(args)
    except PrivlensError as exc:
        print(f"privlens {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
