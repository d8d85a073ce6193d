"""Minimum-MSE dividing-line scan for mirrored padding, per side and per image.

The scan slides a candidate line L from the offset to half the scanned
dimension, compares the mirrored border segment rows [0, L) against the
adjacent segment rows [L, 2L), and keeps the L with the smallest mean
squared error. A side is declared padded when that minimum is at or below
the threshold.

Squared differences are accumulated exactly (wide integers, no rounding)
and divided once at the end, so MSE values are comparable across L and
reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CropRect,
    DetectionParams,
    EmptyCrop,
    LineOutOfRange,
    OffsetExceedsScanLimit,
    Side,
    SideReport,
    UnpadReport,
    ensure_image,
    reduce_to_top,
)

# Largest squared-difference total that float64 still represents exactly.
# Intermediate sums in the fast scan stay below 255^2 * rows * width * channels.
_EXACT_F64_LIMIT = 2**53


@dataclass(frozen=True, eq=False)
class MseProfile:
    """MSE as a function of the candidate line L.

    lines holds consecutive integers from the first scanned L to the scan
    limit; values holds the matching MSEs.
    """

    lines: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.lines)

    def entries(self) -> list[tuple[int, float]]:
        return [(int(l), float(v)) for l, v in zip(self.lines, self.values)]

    def minimum(self) -> tuple[int, float]:
        """Return (L*, MSE_min) with ties broken toward the smallest L.

        np.argmin returns the first occurrence, which matches the strict
        less-than update of the scan.
        """
        i = int(np.argmin(self.values))
        return int(self.lines[i]), float(self.values[i])


def segment_mse(image: np.ndarray, line: int) -> float:
    """MSE between the mirrored rows [0, line) and the rows [line, 2*line).

    The comparison runs element-wise over all pixels and channels, so the
    divisor is line * width * channels. Raises LineOutOfRange unless
    1 <= line and 2*line <= height.
    """
    img = ensure_image(image)
    h, w, c = img.shape
    if line < 1 or 2 * line > h:
        raise LineOutOfRange(f"line {line} needs rows [0, {2 * line}) in a {h}-row image")
    top = img[:line][::-1].astype(np.int64)
    bottom = img[line : 2 * line].astype(np.int64)
    diff = top - bottom
    total = int(np.sum(diff * diff))
    return total / (line * w * c)


def _scan_range(height: int, params: DetectionParams) -> tuple[int, int]:
    """First and last candidate line for a reduced (top-oriented) image."""
    limit = height // 2
    if params.scan_cap is not None:
        limit = min(limit, params.scan_cap)
    start = max(params.offset, 1)
    if start > limit:
        raise OffsetExceedsScanLimit(
            f"offset {params.offset} exceeds scan limit {limit} (height {height})"
        )
    return start, limit


def _profile_rows(img: np.ndarray, start: int, limit: int) -> np.ndarray:
    """Reference scan: one exact int64 accumulation per candidate line."""
    h, w, c = img.shape
    wide = img.astype(np.int64)
    out = np.empty(limit - start + 1, dtype=np.float64)
    for i, line in enumerate(range(start, limit + 1)):
        diff = wide[:line][::-1] - wide[line : 2 * line]
        out[i] = int(np.sum(diff * diff)) / (line * w * c)
    return out


def _profile_gram(img: np.ndarray, start: int, limit: int) -> np.ndarray:
    """Vectorized scan via the row Gram matrix.

    The pairs compared at line L are (i, 2L-1-i), whose index sum is the
    constant 2L-1, so every scan total is a cumulative row-norm sum minus
    the antidiagonal sum of the Gram matrix at 2L-1, read as a diagonal of
    the vertically flipped matrix. All intermediate values are exact
    integers below 2^53, so the result is bit-identical to _profile_rows.
    """
    h, w, c = img.shape
    m = 2 * limit
    rows = img[:m].reshape(m, w * c).astype(np.float64)
    norms = np.einsum("ij,ij->i", rows, rows)
    flipped_gram = (rows @ rows.T)[::-1]
    cum_norms = np.concatenate(([0.0], np.cumsum(norms)))
    lines = np.arange(start, limit + 1)
    antidiag = np.array([np.trace(flipped_gram, offset=2 * L - m) for L in lines])
    totals = cum_norms[2 * lines] - antidiag
    return totals / (lines * w * c)


def scan_side(image: np.ndarray, side: Side, params: DetectionParams) -> MseProfile:
    """Compute segment_mse for every candidate line on one side.

    The side is reoriented so its border is the top row, then scanned from
    max(offset, 1) to min(scan_cap, floor(d/2)) inclusive, where d is the
    dimension perpendicular to the side. Raises OffsetExceedsScanLimit when
    that range is empty.
    """
    img = reduce_to_top(image, side)
    h, w, c = img.shape
    start, limit = _scan_range(h, params)
    if 2 * limit * w * c * 255 * 255 < _EXACT_F64_LIMIT:
        values = _profile_gram(img, start, limit)
    else:
        values = _profile_rows(img, start, limit)
    return MseProfile(lines=np.arange(start, limit + 1), values=values)


def detect_side(
    image: np.ndarray,
    side: Side,
    params: DetectionParams,
    keep_profile: bool = False,
) -> SideReport:
    """Locate the dividing line on one side, or report the border.

    L* is the line with the strictly smallest MSE (ties go to the smallest
    L). The side is padded when that minimum is at or below the threshold;
    otherwise the reported line is 0, the border. min_mse is recorded either
    way.
    """
    profile = scan_side(image, side, params)
    line, min_mse = profile.minimum()
    padded = min_mse <= params.threshold
    return SideReport(
        side=side,
        min_mse=min_mse,
        line=line if padded else 0,
        padded=padded,
        profile=profile if keep_profile else None,
    )


def detect_all_sides(
    image: np.ndarray,
    params: DetectionParams,
    keep_profiles: bool = False,
) -> UnpadReport:
    """Run detection independently on all four sides of the original image.

    Sides are never re-cropped between detections; the combined crop keeps
    the rectangle inside all four dividing lines, with unpadded sides
    contributing 0. Raises EmptyCrop when opposite lines leave no pixels.
    """
    img = ensure_image(image)
    h, w, _ = img.shape
    sides = {
        side: detect_side(img, side, params, keep_profile=keep_profiles) for side in Side
    }
    left = sides[Side.LEFT].line
    top = sides[Side.TOP].line
    crop_w = w - left - sides[Side.RIGHT].line
    crop_h = h - top - sides[Side.BOTTOM].line
    if crop_w < 1 or crop_h < 1:
        raise EmptyCrop(
            f"detected lines leave a {crop_w}x{crop_h} crop in a {w}x{h} image"
        )
    return UnpadReport(
        width=w,
        height=h,
        sides=sides,
        crop=CropRect(left=left, top=top, width=crop_w, height=crop_h),
    )
