"""Batch command-line frontend.

Four subcommands: `detect` scans images and writes a JSON report, `unpad`
crops detected padding and rewrites annotations, `calibrate` selects an MSE
threshold from a labeled manifest, and `synth` generates a ground-truth
corpus. Failed images never abort a batch; they are skipped and listed in
the report's errors array.
"""

from __future__ import annotations

import argparse
import logging
import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, TypeVar

import numpy as np

from . import io
from .calibration import (
    collect_min_mses,
    evaluate_threshold,
    image_min_mses,
    otsu_threshold,
    sweep_thresholds,
)
from .core import DetectionParams, Side, UnpadError, UnpadReport
from .cropping import crop_image, transform_annotations
from .detector import detect_all_sides
from .synth import CorpusSpec, generate_labeled_corpus

logger = logging.getLogger("unpad")

T = TypeVar("T")

SIDE_ORDER = (Side.TOP, Side.BOTTOM, Side.LEFT, Side.RIGHT)


def _params_from_args(args: argparse.Namespace) -> DetectionParams:
    return DetectionParams(
        offset=args.offset, threshold=args.threshold, scan_cap=args.scan_cap
    )


def _map_jobs(fn: Callable[[Path], T], paths: list[Path], jobs: int) -> list[T]:
    """Apply fn to each path, preserving order, on up to `jobs` workers."""
    if jobs <= 1 or len(paths) <= 1:
        return [fn(p) for p in paths]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, paths))


def _report_entry(path: Path, report: UnpadReport) -> dict:
    return {
        "path": str(path),
        "width": report.width,
        "height": report.height,
        "sides": [
            {
                "side": side.value,
                "min_mse": report.sides[side].min_mse,
                "line": report.sides[side].line,
                "padded": report.sides[side].padded,
            }
            for side in SIDE_ORDER
        ],
        "crop": {
            "left": report.crop.left,
            "top": report.crop.top,
            "width": report.crop.width,
            "height": report.crop.height,
        },
    }


def _emit_profiles(path: Path, report: UnpadReport, profiles_dir: Path) -> None:
    profiles_dir.mkdir(parents=True, exist_ok=True)
    for side in SIDE_ORDER:
        profile = report.sides[side].profile
        if profile is not None:
            io.write_profile_csv(profiles_dir / f"{path.name}.{side.value}.csv", profile)


def _write_report(report: dict, report_path: str | None) -> None:
    if report_path is None:
        sys.stdout.write(io.dump_json(report))
    else:
        io.write_json(report_path, report)


def _profiles_dir_for(report_path: str | None) -> Path:
    if report_path is None:
        return Path("profiles")
    report = Path(report_path)
    return report.parent / f"{report.stem}_profiles"


def run_detect(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    paths = io.list_images(args.input)
    profiles_dir = _profiles_dir_for(args.report)

    def process(path: Path) -> tuple[dict | None, dict | None]:
        try:
            image = io.load_image(path)
            report = detect_all_sides(image, params, keep_profiles=args.emit_profiles)
        except (UnpadError, OSError, ValueError) as exc:
            return None, {"path": str(path), "error": str(exc)}
        if args.emit_profiles:
            _emit_profiles(path, report, profiles_dir)
        return _report_entry(path, report), None

    results = _map_jobs(process, paths, args.jobs)
    entries = [entry for entry, _ in results if entry is not None]
    errors = [error for _, error in results if error is not None]
    _write_report({"images": entries, "errors": errors}, args.report)
    for error in errors:
        logger.error("%s: %s", error["path"], error["error"])
    return 0 if not errors else 1


def run_unpad(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    paths = io.list_images(args.input)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    ann_dir = Path(args.annotations) if args.annotations else None

    def process(path: Path) -> tuple[dict | None, dict | None]:
        try:
            image = io.load_image(path)
            report = detect_all_sides(image, params)
            crop = report.crop
            out_path = out_dir / path.name
            if crop.width == report.width and crop.height == report.height:
                shutil.copyfile(path, out_path)
            else:
                io.save_image(out_path, crop_image(image, crop))
            entry = _report_entry(path, report)
            if ann_dir is not None:
                ann_path = ann_dir / f"{path.stem}.txt"
                if not ann_path.exists():
                    logger.warning("no annotation file for %s", path.name)
                else:
                    boxes = io.read_annotations(ann_path)
                    kept = transform_annotations(
                        boxes, (report.width, report.height), crop, args.min_visibility
                    )
                    io.write_annotations(out_dir / f"{path.stem}.txt", kept)
                    entry["boxes_before"] = len(boxes)
                    entry["boxes_after"] = len(kept)
            return entry, None
        except (UnpadError, OSError, ValueError) as exc:
            return None, {"path": str(path), "error": str(exc)}

    results = _map_jobs(process, paths, args.jobs)
    entries = [entry for entry, _ in results if entry is not None]
    errors = [error for _, error in results if error is not None]
    if args.report is not None:
        io.write_json(args.report, {"images": entries, "errors": errors})
    for error in errors:
        logger.error("%s: %s", error["path"], error["error"])
    return 0 if not errors else 1


def run_calibrate(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    manifest_path = Path(args.manifest)
    entries = io.read_manifest(manifest_path)
    base = manifest_path.parent

    samples = []
    failures = []
    for entry in entries:
        image_path = Path(entry.image_id)
        if not image_path.is_absolute():
            image_path = base / image_path
        try:
            samples.append((io.load_image(image_path), entry))
        except (OSError, ValueError) as exc:
            failures.append((entry.image_id, str(exc)))
    records, scan_failures = collect_min_mses(samples, params, jobs=args.jobs)
    failures.extend(scan_failures)
    for image_id, reason in failures:
        logger.warning("skipped %s: %s", image_id, reason)

    if args.method == "sweep":
        result = sweep_thresholds(
            records, args.tau_start, args.tau_end, args.tau_step, args.tolerance
        )
        io.write_sweep_csv(args.report or "sweep.csv", result.points)
        chosen = result.best_threshold
    else:
        chosen = otsu_threshold(image_min_mses(records))
        point = evaluate_threshold(records, chosen, args.tolerance)
        values = np.asarray(image_min_mses(records))
        lo, hi = float(values.min()), float(values.max())
        bins = np.rint((values - lo) * 255.0 / (hi - lo)).astype(np.int64)
        summary = {
            "threshold": chosen,
            "values": int(values.size),
            "min": lo,
            "max": hi,
            "histogram": np.bincount(bins, minlength=256).tolist(),
            "precision": point.precision,
            "recall": point.recall,
            "tp": point.tp,
            "fp": point.fp,
            "fn": point.fn,
        }
        io.write_json(args.report or "otsu.json", summary)
    print(f"{chosen:.6f}")
    return 0


def run_synth(args: argparse.Namespace) -> int:
    spec = CorpusSpec(
        size_min=args.size_min,
        size_max=args.size_max,
        pad_prob=args.pad_prob,
        pad_min=args.pad_min,
        pad_max=args.pad_max,
        sigma=args.sigma,
        quant_step=args.quant_step,
    )
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = generate_labeled_corpus(args.count, spec, args.seed)
    manifest = []
    for index, (image, sample) in enumerate(corpus):
        name = f"{index:05d}.png"
        io.save_image(out_dir / name, image)
        manifest.append(sample.__class__(image_id=name, true_pad=sample.true_pad))
    io.write_manifest(out_dir / "manifest.txt", manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unpad", description="Detect and remove mirrored padding from images."
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--offset", type=int, default=10,
                        help="smallest dividing line considered (default: 10)")
    common.add_argument("--threshold", type=float, default=110.0,
                        help="MSE threshold for the padded verdict (default: 110)")
    common.add_argument("--scan-cap", type=int, default=None,
                        help="cap on the dividing-line scan (default: half the dimension)")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="parallel workers (default: hardware parallelism)")

    p_detect = subparsers.add_parser(
        "detect", parents=[common], help="scan images and write a JSON report"
    )
    p_detect.add_argument("input", help="image file or directory")
    p_detect.add_argument("--report", default=None,
                          help="report path (default: stdout)")
    p_detect.add_argument("--emit-profiles", action="store_true",
                          help="write per-side MSE profile CSVs next to the report")
    p_detect.set_defaults(func=run_detect)

    p_unpad = subparsers.add_parser(
        "unpad", parents=[common], help="crop detected padding and rewrite annotations"
    )
    p_unpad.add_argument("input", help="image file or directory")
    p_unpad.add_argument("output", help="output directory")
    p_unpad.add_argument("--annotations", default=None,
                         help="directory of per-image annotation files")
    p_unpad.add_argument("--min-visibility", type=float, default=0.0,
                         help="drop boxes whose visible fraction is below this (default: 0)")
    p_unpad.add_argument("--report", default=None, help="optional JSON report path")
    p_unpad.set_defaults(func=run_unpad)

    p_cal = subparsers.add_parser(
        "calibrate", parents=[common], help="select an MSE threshold from a manifest"
    )
    p_cal.add_argument("manifest", help="labeled manifest file")
    p_cal.add_argument("--method", choices=("sweep", "otsu"), default="sweep")
    p_cal.add_argument("--tau-start", type=float, default=70.0)
    p_cal.add_argument("--tau-end", type=float, default=180.0)
    p_cal.add_argument("--tau-step", type=float, default=5.0)
    p_cal.add_argument("--tolerance", type=int, default=1,
                       help="pixel tolerance for a correct dividing line (default: 1)")
    p_cal.add_argument("--report", default=None,
                       help="output path (default: sweep.csv or otsu.json)")
    p_cal.set_defaults(func=run_calibrate)

    p_synth = subparsers.add_parser(
        "synth", parents=[common], help="generate a labeled synthetic corpus"
    )
    p_synth.add_argument("output", help="output directory")
    p_synth.add_argument("--count", type=int, required=True)
    p_synth.add_argument("--size-min", type=int, default=64)
    p_synth.add_argument("--size-max", type=int, default=128)
    p_synth.add_argument("--pad-prob", type=float, default=0.5)
    p_synth.add_argument("--pad-min", type=int, default=10)
    p_synth.add_argument("--pad-max", type=int, default=40)
    p_synth.add_argument("--sigma", type=float, default=0.0)
    p_synth.add_argument("--quant-step", type=int, default=1)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=run_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UnpadError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
