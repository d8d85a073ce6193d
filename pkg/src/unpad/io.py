"""File formats: image decode/encode, labeled manifests, annotations, reports.

All text outputs print floats with exactly six decimal places so repeated
runs produce byte-identical, diffable files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from PIL import Image

from .calibration import LabeledSample, SweepPoint
from .core import BoundingBox, EmptyManifest, Side
from .detector import MseProfile

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp"}

# Pillow modes that need conversion before they fit the 1/3/4-channel model.
_MODE_CONVERSIONS = {
    "1": "L",
    "I": "L",
    "I;16": "L",
    "F": "L",
    "LA": "RGBA",
    "P": "RGB",
    "PA": "RGBA",
    "CMYK": "RGB",
    "YCbCr": "RGB",
}


def load_image(path: str | Path) -> np.ndarray:
    """Decode an image file into a (H, W, C) uint8 array with C in {1, 3, 4}."""
    with Image.open(path) as img:
        mode = img.mode
        if mode == "P" and "transparency" in img.info:
            img = img.convert("RGBA")
        elif mode in _MODE_CONVERSIONS:
            img = img.convert(_MODE_CONVERSIONS[mode])
        elif mode not in ("L", "RGB", "RGBA"):
            img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    return np.ascontiguousarray(arr)


def save_image(path: str | Path, image: np.ndarray) -> None:
    """Encode a (H, W, C) uint8 array; the format follows the file extension."""
    if image.ndim == 3 and image.shape[2] == 1:
        pil = Image.fromarray(image[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(image)
    pil.save(path)


def list_images(root: str | Path) -> list[Path]:
    """Image files under a directory (sorted), or the single file itself."""
    root = Path(root)
    if root.is_file():
        return [root]
    return sorted(
        p for p in root.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    )


def read_manifest(path: str | Path) -> list[LabeledSample]:
    """Parse a labeled manifest: `<image_path> <top> <bottom> <left> <right>`.

    Image paths are kept as written; relative paths are conventionally
    resolved against the manifest's directory by callers. Raises
    EmptyManifest when no entries remain after skipping blank lines.
    """
    entries: list[LabeledSample] = []
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(" ")
        if len(parts) != 5:
            raise ValueError(f"{path}:{line_no}: expected 5 fields, got {len(parts)}")
        pads = [int(p) for p in parts[1:]]
        if any(p < 0 for p in pads):
            raise ValueError(f"{path}:{line_no}: pad widths must be >= 0")
        entries.append(
            LabeledSample(
                image_id=parts[0],
                true_pad=dict(zip((Side.TOP, Side.BOTTOM, Side.LEFT, Side.RIGHT), pads)),
            )
        )
    if not entries:
        raise EmptyManifest(f"manifest {path} has no entries")
    return entries


def write_manifest(path: str | Path, entries: Sequence[LabeledSample]) -> None:
    lines = [
        " ".join(
            [
                entry.image_id,
                str(entry.true_pad.get(Side.TOP, 0)),
                str(entry.true_pad.get(Side.BOTTOM, 0)),
                str(entry.true_pad.get(Side.LEFT, 0)),
                str(entry.true_pad.get(Side.RIGHT, 0)),
            ]
        )
        for entry in entries
    ]
    Path(path).write_text("".join(line + "\n" for line in lines))


def read_annotations(path: str | Path) -> list[BoundingBox]:
    """Parse one-box-per-line annotations: `<class_id> <cx> <cy> <w> <h>`."""
    boxes: list[BoundingBox] = []
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(" ")
        if len(parts) != 5:
            raise ValueError(f"{path}:{line_no}: expected 5 fields, got {len(parts)}")
        boxes.append(
            BoundingBox(
                class_id=int(parts[0]),
                cx=float(parts[1]),
                cy=float(parts[2]),
                w=float(parts[3]),
                h=float(parts[4]),
            )
        )
    return boxes


def write_annotations(path: str | Path, boxes: Sequence[BoundingBox]) -> None:
    Path(path).write_text(
        "".join(
            f"{b.class_id} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f}\n" for b in boxes
        )
    )


def write_profile_csv(path: str | Path, profile: MseProfile) -> None:
    """One MSE profile as CSV with columns L,mse."""
    rows = [f"{line},{mse:.6f}\n" for line, mse in profile.entries()]
    Path(path).write_text("L,mse\n" + "".join(rows))


def write_sweep_csv(path: str | Path, points: Sequence[SweepPoint]) -> None:
    rows = [
        f"{p.threshold:.6f},{p.precision:.6f},{p.recall:.6f},{p.tp},{p.fp},{p.fn}\n"
        for p in points
    ]
    Path(path).write_text("threshold,precision,recall,tp,fp,fn\n" + "".join(rows))


def _round_floats(value: Any) -> Any:
    if isinstance(value, float):
        return round(value, 6)
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_round_floats(v) for v in value]
    return value


def dump_json(payload: Any) -> str:
    """Serialize a report deterministically, floats limited to 6 decimals."""
    return json.dumps(_round_floats(payload), indent=2) + "\n"


def write_json(path: str | Path, payload: Any) -> None:
    Path(path).write_text(dump_json(payload))
