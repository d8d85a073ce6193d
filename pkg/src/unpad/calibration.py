"""Threshold selection from a labeled sample.

Two methods are provided: an iterative threshold sweep scored by precision
and recall of correctly located dividing lines, and Otsu's between-class
variance maximization applied to min-max normalized minimum MSEs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .core import (
    DegenerateDistribution,
    DetectionParams,
    EmptyRecordSet,
    Side,
    UnpadError,
    ensure_image,
)
from .detector import scan_side


@dataclass(frozen=True)
class LabeledSample:
    """Ground truth for one image: the true pad width per side, 0 if none."""

    image_id: str
    true_pad: dict[Side, int]


@dataclass(frozen=True)
class CalibrationRecord:
    """Threshold-independent scan result for one (image, side) pair.

    line is the argmin of the MSE profile regardless of any threshold, so
    one collection pass supports every candidate threshold.
    """

    image_id: str
    side: Side
    min_mse: float
    line: int
    true_pad: int


class Outcome(Enum):
    TP = "tp"
    FP = "fp"
    FN = "fn"
    TN = "tn"


@dataclass(frozen=True)
class SweepPoint:
    """Precision/recall of one candidate threshold."""

    threshold: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class SweepResult:
    points: list[SweepPoint]
    best: SweepPoint

    @property
    def best_threshold(self) -> float:
        return self.best.threshold


def _scan_sample(
    image: np.ndarray, sample: LabeledSample, params: DetectionParams
) -> list[CalibrationRecord]:
    img = ensure_image(image)
    h, w, _ = img.shape
    for side in Side:
        dim = h if side in (Side.TOP, Side.BOTTOM) else w
        if sample.true_pad.get(side, 0) > dim // 2:
            raise UnpadError(
                f"true pad {sample.true_pad[side]} on {side.value} exceeds "
                f"half of dimension {dim}"
            )
    records = []
    for side in Side:
        line, min_mse = scan_side(img, side, params).minimum()
        records.append(
            CalibrationRecord(
                image_id=sample.image_id,
                side=side,
                min_mse=min_mse,
                line=line,
                true_pad=int(sample.true_pad.get(side, 0)),
            )
        )
    return records


def collect_min_mses(
    samples: Iterable[tuple[np.ndarray, LabeledSample]],
    params: DetectionParams,
    jobs: int = 1,
) -> tuple[list[CalibrationRecord], list[tuple[str, str]]]:
    """Scan every side of every labeled image and record the profile minima.

    The threshold in `params` is ignored here; records capture the raw
    minimum and its line. Images that cannot be scanned (or whose labels are
    inconsistent with their dimensions) are skipped and reported in the
    returned failure list as (image_id, reason) pairs. With jobs > 1 the
    scans run on a thread pool; record order follows input order either way.
    """
    samples = list(samples)

    def scan_one(pair: tuple[np.ndarray, LabeledSample]):
        image, sample = pair
        try:
            return sample.image_id, _scan_sample(image, sample, params), None
        except UnpadError as exc:
            return sample.image_id, None, str(exc)

    if jobs > 1 and len(samples) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(scan_one, samples))
    else:
        results = [scan_one(pair) for pair in samples]

    records: list[CalibrationRecord] = []
    failures: list[tuple[str, str]] = []
    for image_id, side_records, reason in results:
        if side_records is None:
            failures.append((image_id, reason))
        else:
            records.extend(side_records)
    return records, failures


def classify_record(
    record: CalibrationRecord, threshold: float, tolerance: int = 1
) -> Outcome:
    """Classify one record against a threshold.

    A detection (min_mse <= threshold) on a truly padded side counts as TP
    only when its line is within the pixel tolerance of the true pad; a
    detection at the wrong line is a false positive, not a true one.
    """
    detected = record.min_mse <= threshold
    if record.true_pad > 0:
        if not detected:
            return Outcome.FN
        if abs(record.line - record.true_pad) <= tolerance:
            return Outcome.TP
        return Outcome.FP
    return Outcome.FP if detected else Outcome.TN


def evaluate_threshold(
    records: Sequence[CalibrationRecord], threshold: float, tolerance: int = 1
) -> SweepPoint:
    """Count outcomes and form precision/recall for a single threshold.

    Precision and recall default to 0 when their denominators are empty.
    """
    counts = {outcome: 0 for outcome in Outcome}
    for record in records:
        counts[classify_record(record, threshold, tolerance)] += 1
    tp, fp, fn = counts[Outcome.TP], counts[Outcome.FP], counts[Outcome.FN]
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    return SweepPoint(
        threshold=float(threshold), precision=precision, recall=recall, tp=tp, fp=fp, fn=fn
    )


def _f1(point: SweepPoint) -> float:
    if point.precision + point.recall == 0:
        return 0.0
    return 2 * point.precision * point.recall / (point.precision + point.recall)


def sweep_thresholds(
    records: Sequence[CalibrationRecord],
    tau_start: float = 70.0,
    tau_end: float = 180.0,
    tau_step: float = 5.0,
    tolerance: int = 1,
) -> SweepResult:
    """Iterate candidate thresholds and pick the one with the best F1.

    Candidates form the arithmetic sequence tau_start, tau_start + tau_step,
    ... up to tau_end inclusive. Precision and recall rarely peak at the
    same threshold, so the selection maximizes F1 = 2PR/(P+R); ties go to
    the smaller threshold.
    """
    if not records:
        raise EmptyRecordSet("no calibration records to sweep")
    if tau_step <= 0:
        raise ValueError(f"tau_step must be > 0, got {tau_step}")
    if tau_start > tau_end:
        raise ValueError(f"tau_start {tau_start} exceeds tau_end {tau_end}")
    n_steps = int(math.floor((tau_end - tau_start) / tau_step + 1e-9))
    points = [
        evaluate_threshold(records, tau_start + i * tau_step, tolerance)
        for i in range(n_steps + 1)
    ]
    best = max(points, key=lambda p: (_f1(p), -p.threshold))
    return SweepResult(points=points, best=best)


def otsu_threshold(min_mses: Sequence[float]) -> float:
    """Select a threshold by maximizing between-class variance.

    Values are min-max normalized to [0, 255] and binned into a 256-bin
    integer histogram (round to nearest). The split t* maximizing
    w1*w2*(mu1 - mu2)^2 over all 256 split points (classes bins <= t* and
    bins > t*, ties to the smallest t*) is mapped back to the input scale as
    min + (t*/255) * (max - min).
    """
    values = np.asarray(min_mses, dtype=np.float64)
    if values.size == 0:
        raise EmptyRecordSet("no values for Otsu thresholding")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        raise DegenerateDistribution(
            "all values are equal; between-class variance is zero everywhere"
        )
    bins = np.rint((values - lo) * 255.0 / (hi - lo)).astype(np.int64)
    hist = np.bincount(bins, minlength=256).astype(np.float64)
    total = hist.sum()
    counts_low = np.cumsum(hist)
    weighted_low = np.cumsum(hist * np.arange(256))
    w1 = counts_low / total
    w2 = 1.0 - w1
    sum_all = weighted_low[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        mu1 = weighted_low / counts_low
        mu2 = (sum_all - weighted_low) / (total - counts_low)
        sigma_b = w1 * w2 * (mu1 - mu2) ** 2
    sigma_b = np.nan_to_num(sigma_b, nan=0.0)
    t_star = int(np.argmax(sigma_b))
    return lo + (t_star / 255.0) * (hi - lo)


def image_min_mses(records: Sequence[CalibrationRecord]) -> list[float]:
    """Reduce per-side records to one minimum MSE per image.

    Order follows each image's first appearance, keeping the result
    deterministic for a deterministic record sequence.
    """
    minima: dict[str, float] = {}
    for record in records:
        current = minima.get(record.image_id)
        if current is None or record.min_mse < current:
            minima[record.image_id] = record.min_mse
    return list(minima.values())
