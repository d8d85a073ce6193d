"""Shared image types, geometric conventions, and per-side reduction transforms.

An image is a numpy array of shape (height, width, channels) with dtype
uint8 and 1, 3, or 4 interleaved channels. Every operation in this package
treats its inputs as immutable and returns fresh contiguous arrays, so
values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .detector import MseProfile

VALID_CHANNELS = (1, 3, 4)


class UnpadError(Exception):
    """Base class for all errors raised by this package."""


class LineOutOfRange(UnpadError):
    """A candidate dividing line has no valid segment pair."""


class OffsetExceedsScanLimit(UnpadError):
    """The scan range from offset to the scan limit is empty."""


class EmptyCrop(UnpadError):
    """Detected lines on opposite sides leave no pixels to keep."""


class RectOutOfBounds(UnpadError):
    """A crop rectangle does not fit inside the image."""


class PadTooLarge(UnpadError):
    """A requested pad width exceeds the source dimension."""


class EmptyRecordSet(UnpadError):
    """A calibration operation received no records."""


class DegenerateDistribution(UnpadError):
    """All values are equal; no threshold can separate two classes."""


class EmptyManifest(UnpadError):
    """A labeled manifest file contains no entries."""


class Side(Enum):
    """One of the four image borders."""

    TOP = "top"
    BOTTOM = "bottom"
    LEFT = "left"
    RIGHT = "right"


def ensure_image(image: np.ndarray) -> np.ndarray:
    """Validate an image array and normalize grayscale to explicit 1-channel.

    Accepts (H, W) or (H, W, C) uint8 arrays with C in {1, 3, 4}. Returns
    a (H, W, C) view; raises ValueError otherwise.
    """
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        raise ValueError(f"image must have dtype uint8, got {arr.dtype}")
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.ndim != 3:
        raise ValueError(f"image must have shape (H, W) or (H, W, C), got {arr.shape}")
    if arr.shape[2] not in VALID_CHANNELS:
        raise ValueError(f"channel count must be one of {VALID_CHANNELS}, got {arr.shape[2]}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image dimensions must be positive, got {arr.shape}")
    return arr


def reduce_to_top(image: np.ndarray, side: Side) -> np.ndarray:
    """Reorient an image so the requested side's border becomes the top row.

    Top is the identity, Bottom a vertical flip, Left a transpose (column 0
    becomes row 0), and Right a transpose after a horizontal flip. A dividing
    line found at distance L from the top of the result corresponds to
    distance L from the original side's border.

    Returns a contiguous copy so downstream row scans stay cache-friendly.
    """
    img = ensure_image(image)
    if side is Side.TOP:
        out = img
    elif side is Side.BOTTOM:
        out = img[::-1]
    elif side is Side.LEFT:
        out = img.swapaxes(0, 1)
    elif side is Side.RIGHT:
        out = img[:, ::-1].swapaxes(0, 1)
    else:
        raise ValueError(f"unknown side: {side!r}")
    return np.ascontiguousarray(out)


def mirror_vertical(image: np.ndarray) -> np.ndarray:
    """Reflect an image over the horizontal axis (reverse the row order)."""
    img = ensure_image(image)
    return np.ascontiguousarray(img[::-1])


@dataclass(frozen=True)
class DetectionParams:
    """Inputs of the dividing-line scan.

    offset: smallest candidate line considered, skipping near-border rows
        whose low variability makes the MSE uninformative. An offset of 0
        is accepted for diagnostics and scans from line 1 (a line at 0 has
        no pixels above it).
    threshold: MSE value (in squared 8-bit intensity units) above which the
        minimum-MSE line is rejected and the side declared unpadded.
    scan_cap: optional upper bound on the candidate line, for callers that
        know pad widths are small. Defaults to half the scanned dimension.
    """

    offset: int = 10
    threshold: float = 110.0
    scan_cap: int | None = None

    def __post_init__(self) -> None:
        if self.offset < 0:
            raise ValueError(f"offset must be >= 0, got {self.offset}")
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")
        if self.scan_cap is not None and self.scan_cap < 1:
            raise ValueError(f"scan_cap must be >= 1, got {self.scan_cap}")


@dataclass(frozen=True)
class SideReport:
    """Detection outcome for one side.

    line is the distance of the dividing line from the side's border, or 0
    (the border itself) when the side is judged unpadded. min_mse is always
    the smallest MSE seen in the scan, whatever the verdict.
    """

    side: Side
    min_mse: float
    line: int
    padded: bool
    profile: "MseProfile | None" = None


@dataclass(frozen=True)
class CropRect:
    """Axis-aligned crop rectangle in pixel coordinates."""

    left: int
    top: int
    width: int
    height: int

    @classmethod
    def full(cls, width: int, height: int) -> "CropRect":
        return cls(left=0, top=0, width=width, height=height)

    def fits(self, image_width: int, image_height: int) -> bool:
        return (
            self.left >= 0
            and self.top >= 0
            and self.width >= 1
            and self.height >= 1
            and self.left + self.width <= image_width
            and self.top + self.height <= image_height
        )


@dataclass(frozen=True)
class UnpadReport:
    """Aggregate of the four per-side reports and the derived crop."""

    width: int
    height: int
    sides: dict[Side, SideReport]
    crop: CropRect


@dataclass(frozen=True)
class BoundingBox:
    """Normalized object box: center, width, and height in [0, 1]."""

    class_id: int
    cx: float
    cy: float
    w: float
    h: float

    def validate(self, tol: float = 1e-6) -> None:
        """Raise ValueError unless the box lies inside the unit square."""
        if self.class_id < 0:
            raise ValueError(f"class_id must be >= 0, got {self.class_id}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box size must be positive, got w={self.w}, h={self.h}")
        for lo, hi in ((self.cx - self.w / 2, self.cx + self.w / 2),
                       (self.cy - self.h / 2, self.cy + self.h / 2)):
            if lo < -tol or hi > 1 + tol:
                raise ValueError(f"box extends outside the unit square: [{lo}, {hi}]")
