"""Detection and removal of noisy mirrored padding from images.

The detector slides a candidate dividing line along each side, compares the
mirrored border segment against the adjacent segment, and keeps the line
with the minimum mean squared error; a threshold gate rejects sides without
padding. Calibration selects that threshold from a labeled sample, and the
cropping helpers rewrite images and bounding-box annotations against the
unpadded frame.
"""

from .calibration import (
    CalibrationRecord,
    LabeledSample,
    Outcome,
    SweepPoint,
    SweepResult,
    classify_record,
    collect_min_mses,
    evaluate_threshold,
    image_min_mses,
    otsu_threshold,
    sweep_thresholds,
)
from .core import (
    BoundingBox,
    CropRect,
    DegenerateDistribution,
    DetectionParams,
    EmptyCrop,
    EmptyManifest,
    EmptyRecordSet,
    LineOutOfRange,
    OffsetExceedsScanLimit,
    PadTooLarge,
    RectOutOfBounds,
    Side,
    SideReport,
    UnpadError,
    UnpadReport,
    ensure_image,
    mirror_vertical,
    reduce_to_top,
)
from .cropping import crop_image, transform_annotations
from .detector import (
    MseProfile,
    detect_all_sides,
    detect_side,
    scan_side,
    segment_mse,
)
from .synth import (
    CorpusSpec,
    add_gaussian_noise,
    apply_mirror_padding,
    generate_labeled_corpus,
    quantize_noise,
    random_content,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "CalibrationRecord",
    "CorpusSpec",
    "CropRect",
    "DegenerateDistribution",
    "DetectionParams",
    "EmptyCrop",
    "EmptyManifest",
    "EmptyRecordSet",
    "LabeledSample",
    "LineOutOfRange",
    "MseProfile",
    "OffsetExceedsScanLimit",
    "Outcome",
    "PadTooLarge",
    "RectOutOfBounds",
    "Side",
    "SideReport",
    "SweepPoint",
    "SweepResult",
    "UnpadError",
    "UnpadReport",
    "add_gaussian_noise",
    "apply_mirror_padding",
    "classify_record",
    "collect_min_mses",
    "crop_image",
    "detect_all_sides",
    "detect_side",
    "ensure_image",
    "evaluate_threshold",
    "generate_labeled_corpus",
    "image_min_mses",
    "mirror_vertical",
    "otsu_threshold",
    "quantize_noise",
    "random_content",
    "reduce_to_top",
    "scan_side",
    "segment_mse",
    "sweep_thresholds",
    "transform_annotations",
    "__version__",
]
