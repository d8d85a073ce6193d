"""Synthetic mirror-padded corpora with known ground truth.

Generated images are the oracle for detection and calibration: the true pad
widths are known by construction, padded regions are exact reflections at
sigma = 0, and everything is deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .calibration import LabeledSample
from .core import PadTooLarge, Side, ensure_image


def _reflect_indices(n: int, before: int, after: int) -> np.ndarray:
    """Source indices for edge-inclusive reflection along one axis."""
    head = np.arange(before - 1, -1, -1)
    body = np.arange(n)
    tail = np.arange(n - 1, n - after - 1, -1)
    return np.concatenate((head, body, tail))


def apply_mirror_padding(image: np.ndarray, pads: Mapping[Side, int]) -> np.ndarray:
    """Extend an image by edge-inclusive reflection on each requested side.

    For a top pad P, output row r (r < P) is input row P-1-r, so the border
    row is duplicated across the boundary; the other sides are analogous.
    Vertical pads are applied first, then horizontal pads to the already
    padded result, which fixes the corner fill order.
    """
    img = ensure_image(image)
    h, w, _ = img.shape
    amounts = {side: int(pads.get(side, 0)) for side in Side}
    for side, amount in amounts.items():
        if amount < 0:
            raise ValueError(f"pad for {side.value} must be >= 0, got {amount}")
        dim = h if side in (Side.TOP, Side.BOTTOM) else w
        if amount > dim:
            raise PadTooLarge(
                f"pad {amount} on {side.value} exceeds source dimension {dim}"
            )
    rows = _reflect_indices(h, amounts[Side.TOP], amounts[Side.BOTTOM])
    cols = _reflect_indices(w, amounts[Side.LEFT], amounts[Side.RIGHT])
    return np.ascontiguousarray(img[np.ix_(rows, cols)])


def add_gaussian_noise(image: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise, rounded and clamped to [0, 255]."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    img = ensure_image(image)
    if sigma == 0:
        return img.copy()
    rng = np.random.default_rng(seed)
    noisy = img.astype(np.float64) + rng.normal(0.0, sigma, img.shape)
    return np.clip(np.rint(noisy), 0, 255).astype(np.uint8)


def quantize_noise(image: np.ndarray, step: int) -> np.ndarray:
    """Snap every sample to the nearest multiple of step, clamped to [0, 255].

    A codec-free stand-in for compression: applied after padding, the two
    sides of a mirror quantize identically only where content matches.
    """
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    img = ensure_image(image)
    if step == 1:
        return img.copy()
    quantized = np.rint(img.astype(np.float64) / step) * step
    return np.clip(quantized, 0, 255).astype(np.uint8)


def random_content(
    height: int,
    width: int,
    channels: int,
    rng: np.random.Generator,
    texture: int = 35,
) -> np.ndarray:
    """Natural-image-like random content: smooth gradients plus texture.

    The low-frequency part (a random plane plus two random cosine waves per
    channel) varies slowly; the uniform i.i.d. texture keeps every region
    non-degenerate so a constant border never fakes a mirror match.
    """
    ys = np.linspace(0.0, 1.0, height)[:, None, None]
    xs = np.linspace(0.0, 1.0, width)[None, :, None]
    base = rng.uniform(60, 195, size=(1, 1, channels))
    base = base + rng.uniform(-70, 70, size=(1, 1, channels)) * xs
    base = base + rng.uniform(-70, 70, size=(1, 1, channels)) * ys
    for _ in range(2):
        fx, fy = rng.uniform(0.5, 3.0, size=2)
        phase = rng.uniform(0, 2 * np.pi, size=(1, 1, channels))
        amp = rng.uniform(10, 30, size=(1, 1, channels))
        base = base + amp * np.cos(2 * np.pi * (fx * xs + fy * ys) + phase)
    if texture > 0:
        base = base + rng.integers(-texture, texture + 1, size=(height, width, channels))
    return np.clip(np.rint(base), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class CorpusSpec:
    """Ranges and noise settings for corpus generation.

    Padded images get a side pair (top+bottom or left+right) with widths
    drawn independently from [pad_min, pad_max], matching the padding
    pattern of resized object-detection datasets. Noise is applied after
    padding: Gaussian when sigma > 0, quantization when quant_step > 1.
    """

    size_min: int = 64
    size_max: int = 128
    pad_prob: float = 0.5
    pad_min: int = 10
    pad_max: int = 40
    sigma: float = 0.0
    quant_step: int = 1
    channels: int = 3

    def __post_init__(self) -> None:
        if not 1 <= self.size_min <= self.size_max:
            raise ValueError(f"invalid size range [{self.size_min}, {self.size_max}]")
        if not 0.0 <= self.pad_prob <= 1.0:
            raise ValueError(f"pad_prob must be in [0, 1], got {self.pad_prob}")
        if not 1 <= self.pad_min <= self.pad_max:
            raise ValueError(f"invalid pad range [{self.pad_min}, {self.pad_max}]")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.quant_step < 1:
            raise ValueError(f"quant_step must be >= 1, got {self.quant_step}")
        if self.channels not in (1, 3, 4):
            raise ValueError(f"channels must be 1, 3, or 4, got {self.channels}")


def generate_labeled_corpus(
    count: int, spec: CorpusSpec, seed: int
) -> list[tuple[np.ndarray, LabeledSample]]:
    """Generate `count` images with ground-truth pad labels, deterministically.

    Each image draws from its own generator seeded by (seed, index), so the
    corpus is reproducible element-wise and generation order is free to be
    parallelized.
    """
    corpus: list[tuple[np.ndarray, LabeledSample]] = []
    for index in range(count):
        rng = np.random.default_rng([seed, index])
        width = int(rng.integers(spec.size_min, spec.size_max + 1))
        height = int(rng.integers(spec.size_min, spec.size_max + 1))
        image = random_content(height, width, spec.channels, rng)
        pads = {side: 0 for side in Side}
        if rng.random() < spec.pad_prob:
            if rng.random() < 0.5:
                pair, dim = (Side.TOP, Side.BOTTOM), height
            else:
                pair, dim = (Side.LEFT, Side.RIGHT), width
            for side in pair:
                pads[side] = int(min(rng.integers(spec.pad_min, spec.pad_max + 1), dim))
        image = apply_mirror_padding(image, pads)
        if spec.sigma > 0:
            image = add_gaussian_noise(image, spec.sigma, int(rng.integers(2**63)))
        if spec.quant_step > 1:
            image = quantize_noise(image, spec.quant_step)
        corpus.append((image, LabeledSample(image_id=f"{index:05d}", true_pad=pads)))
    return corpus
