"""Apply a detected crop to an image and rewrite its bounding boxes."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import BoundingBox, CropRect, RectOutOfBounds, ensure_image


def crop_image(image: np.ndarray, rect: CropRect) -> np.ndarray:
    """Extract the rectangle from the image, bit-exact, all channels."""
    img = ensure_image(image)
    h, w, _ = img.shape
    if not rect.fits(w, h):
        raise RectOutOfBounds(f"{rect} does not fit in a {w}x{h} image")
    return np.ascontiguousarray(
        img[rect.top : rect.top + rect.height, rect.left : rect.left + rect.width]
    )


def transform_annotations(
    boxes: Sequence[BoundingBox],
    original_size: tuple[int, int],
    rect: CropRect,
    min_visibility: float = 0.0,
) -> list[BoundingBox]:
    """Rewrite normalized boxes from the original frame into the crop frame.

    Each box is denormalized to pixels against the original (width, height),
    intersected with the crop rectangle, translated, and renormalized
    against the crop. Boxes with an empty intersection, or whose visible
    fraction of the original area falls below min_visibility, are dropped.
    Surviving boxes keep their input order. Boxes are only ever clipped,
    never extended or re-estimated.
    """
    orig_w, orig_h = original_size
    out: list[BoundingBox] = []
    for box in boxes:
        x0 = (box.cx - box.w / 2) * orig_w
        x1 = (box.cx + box.w / 2) * orig_w
        y0 = (box.cy - box.h / 2) * orig_h
        y1 = (box.cy + box.h / 2) * orig_h
        ix0 = max(x0, rect.left)
        ix1 = min(x1, rect.left + rect.width)
        iy0 = max(y0, rect.top)
        iy1 = min(y1, rect.top + rect.height)
        if ix1 <= ix0 or iy1 <= iy0:
            continue
        visible = ((ix1 - ix0) * (iy1 - iy0)) / ((x1 - x0) * (y1 - y0))
        if visible < min_visibility:
            continue
        out.append(
            BoundingBox(
                class_id=box.class_id,
                cx=((ix0 + ix1) / 2 - rect.left) / rect.width,
                cy=((iy0 + iy1) / 2 - rect.top) / rect.height,
                w=(ix1 - ix0) / rect.width,
                h=(iy1 - iy0) / rect.height,
            )
        )
    return out
