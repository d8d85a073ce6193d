"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
PASS/FAIL lines. Every tolerance is pinned here; nothing is deferred to
later calibration.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from unpad import (
    BoundingBox,
    CorpusSpec,
    DetectionParams,
    LabeledSample,
    Side,
    add_gaussian_noise,
    apply_mirror_padding,
    collect_min_mses,
    crop_image,
    detect_all_sides,
    evaluate_threshold,
    generate_labeled_corpus,
    image_min_mses,
    otsu_threshold,
    random_content,
    scan_side,
    sweep_thresholds,
    transform_annotations,
)
from unpad import io as upio
from unpad.cli import main as cli_main


@contextmanager
def criterion(number, name):
    try:
        yield
    except Exception:
        print(f"\n[criterion {number}] {name}: FAIL")
        raise
    print(f"\n[criterion {number}] {name}: PASS")


def test_01_noiseless_exactness():
    """500 noiseless images, sizes 64-512, pad widths 10-40% of the padded
    dimension (floored at the 10 px offset): every padded side is recovered
    exactly with zero MSE, no unpadded side is flagged at tau=110, and the
    batch completes within a minute."""
    params = DetectionParams()  # offset 10, threshold 110
    started = time.perf_counter()
    padded_sides = flagged_unpadded = 0
    for index in range(500):
        rng = np.random.default_rng([101, index])
        w = int(rng.integers(64, 513))
        h = int(rng.integers(64, 513))
        content = random_content(h, w, 3, rng)
        pads = {side: 0 for side in Side}
        if index % 2 == 0:
            if rng.random() < 0.5:
                pair, dim = (Side.TOP, Side.BOTTOM), h
            else:
                pair, dim = (Side.LEFT, Side.RIGHT), w
            for side in pair:
                pads[side] = max(10, int(rng.uniform(0.10, 0.40) * dim))
        image = apply_mirror_padding(content, pads)
        report = detect_all_sides(image, params)
        for side in Side:
            side_report = report.sides[side]
            if pads[side] > 0:
                padded_sides += 1
                assert side_report.padded
                assert side_report.line == pads[side]
                assert side_report.min_mse == 0.0
            elif side_report.padded:
                flagged_unpadded += 1
    elapsed = time.perf_counter() - started
    with criterion(1, "noiseless exactness"):
        assert padded_sides == 500
        assert flagged_unpadded == 0
        assert elapsed < 60.0, f"took {elapsed:.1f}s"
    print(f"  500 images, {padded_sides} padded sides exact, {elapsed:.1f}s")


def test_02_noise_robustness():
    """At sigma=2, >=95% of padded sides are found within +-1 px using a
    threshold swept on a disjoint 400-image corpus; at sigma=4 the swept
    threshold still reaches precision >= 0.95 on held-out data."""
    params = DetectionParams()
    results = {}
    for sigma in (2.0, 4.0):
        spec = CorpusSpec(sigma=sigma)
        calibration_corpus = generate_labeled_corpus(400, spec, seed=210)
        holdout_corpus = generate_labeled_corpus(200, spec, seed=211)
        cal_records, cal_failures = collect_min_mses(calibration_corpus, params)
        out_records, out_failures = collect_min_mses(holdout_corpus, params)
        assert cal_failures == [] and out_failures == []
        tau = sweep_thresholds(cal_records).best_threshold
        point = evaluate_threshold(out_records, tau, tolerance=1)
        total_padded = sum(1 for r in out_records if r.true_pad > 0)
        results[sigma] = (tau, point.tp / total_padded, point.precision)
    with criterion(2, "noise robustness"):
        tau2, hit_rate, _ = results[2.0]
        assert hit_rate >= 0.95, f"sigma=2 hit rate {hit_rate:.4f}"
        tau4, _, precision4 = results[4.0]
        assert precision4 >= 0.95, f"sigma=4 precision {precision4:.4f}"
    print(f"  sigma=2: tau={results[2.0][0]:.0f}, within-1px rate {results[2.0][1]:.4f}")
    print(f"  sigma=4: tau={results[4.0][0]:.0f}, held-out precision {results[4.0][2]:.4f}")


def _bordered_content(h, w, rng):
    """Strongly textured content under a near-constant sky-like top band."""
    img = rng.integers(88, 168, (1, 1, 3)).astype(np.int64) + rng.integers(-40, 41, (h, w, 3))
    img = np.clip(img, 0, 255).astype(np.uint8)
    band = int(rng.integers(12, 16))
    sky = rng.integers(120, 200)
    img[:band] = np.clip(sky + rng.integers(-1, 2, (band, w, 3)), 0, 255).astype(np.uint8)
    return img


def test_03_offset_effect(tmp_path):
    """Low-variability borders make padded and unpadded minimum MSEs overlap
    when scanning from the border (offset 0); the 10 px offset separates
    them at sigma <= 1. Measured from the CSVs behind --emit-profiles."""
    rng = np.random.default_rng(314)
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    sigmas = (0.0, 0.5, 1.0)
    padded_names, unpadded_names = [], []
    for i in range(24):
        h, w = int(rng.integers(72, 120)), int(rng.integers(72, 120))
        image = apply_mirror_padding(
            _bordered_content(h, w, rng), {Side.TOP: int(rng.integers(12, 23))}
        )
        if sigmas[i % 3] > 0:
            image = add_gaussian_noise(image, sigmas[i % 3], seed=1000 + i)
        name = f"padded_{i:03d}.png"
        upio.save_image(corpus_dir / name, image)
        padded_names.append(name)
    for i in range(24):
        h, w = int(rng.integers(72, 120)), int(rng.integers(72, 120))
        name = f"unpadded_{i:03d}.png"
        upio.save_image(corpus_dir / name, _bordered_content(h, w, rng))
        unpadded_names.append(name)

    def top_minima(offset):
        report = tmp_path / f"report_{offset}.json"
        code = cli_main([
            "detect", str(corpus_dir), "--offset", str(offset),
            "--report", str(report), "--emit-profiles",
        ])
        assert code == 0
        profile_dir = report.parent / f"{report.stem}_profiles"

        def min_of(name):
            rows = (profile_dir / f"{name}.top.csv").read_text().splitlines()[1:]
            return min(float(row.split(",")[1]) for row in rows)

        return (
            [min_of(n) for n in padded_names],
            [min_of(n) for n in unpadded_names],
        )

    padded0, unpadded0 = top_minima(0)
    padded10, unpadded10 = top_minima(10)
    with criterion(3, "offset effect"):
        assert min(unpadded0) < max(padded0), "offset 0 should overlap"
        assert min(unpadded10) > max(padded10), "offset 10 should separate"
    print(f"  offset 0:  unpadded min {min(unpadded0):.2f} < padded max {max(padded0):.2f}")
    print(f"  offset 10: unpadded min {min(unpadded10):.2f} > padded max {max(padded10):.2f}")


def _otsu_oracle(values):
    """Independent exhaustive search over all 256 split points."""
    lo, hi = min(values), max(values)
    hist = [0] * 256
    for v in values:
        hist[int(round((v - lo) * 255.0 / (hi - lo)))] += 1
    total = sum(hist)
    weighted_total = sum(i * hist[i] for i in range(256))
    best_t, best_score = 0, -1.0
    c1 = 0
    weighted1 = 0
    for t in range(256):
        c1 += hist[t]
        weighted1 += t * hist[t]
        c2 = total - c1
        if c1 == 0 or c2 == 0:
            score = 0.0
        else:
            w1 = c1 / total
            w2 = c2 / total
            mu1 = weighted1 / c1
            mu2 = (weighted_total - weighted1) / c2
            score = w1 * w2 * (mu1 - mu2) ** 2
        if score > best_score:
            best_score = score
            best_t = t
    return lo + (best_t / 255.0) * (hi - lo)


def test_04_otsu_oracle_equivalence():
    """otsu_threshold equals the independent exhaustive maximization for
    1000 random MSE sets of sizes 2-512, exactly."""
    rng = np.random.default_rng(404)
    checked = 0
    for trial in range(1000):
        n = int(rng.integers(2, 513))
        shape = trial % 3
        if shape == 0:
            values = rng.uniform(0, 20000, n)
        elif shape == 1:
            values = np.concatenate(
                [rng.uniform(0, 50, (n + 1) // 2), rng.uniform(800, 12000, n // 2 + 1)]
            )[:n]
        else:
            values = rng.lognormal(5.0, 2.0, n)
        values = values.tolist()
        if max(values) == min(values):
            continue
        assert otsu_threshold(values) == _otsu_oracle(values)
        checked += 1
    with criterion(4, "Otsu oracle equivalence"):
        assert checked >= 990
    print(f"  {checked} random sets matched exactly")


def _mid_gray_texture(h, w, amp, rng):
    return rng.integers(128 - amp, 128 + amp + 1, (h, w, 3)).astype(np.uint8)


def test_05_sweep_beats_otsu_on_dispersed_mses():
    """Dispersed unpadded MSEs stretch the Otsu normalization scale so its
    256-bin quantization lands the mapped-back threshold below part of the
    padded mass, while the sweep works in raw units: sweep recall is
    strictly higher at comparable precision, the qualitative ordering the
    two methods show on real data."""
    seed = 777
    samples = []
    index = 0
    # padded images: a clean population (minimum MSE 0) plus a noisy one
    # whose minima cluster near 2*sigma^2 ~ 82
    for count, sigma in ((140, 0.0), (60, 6.40)):
        for _ in range(count):
            rng = np.random.default_rng([seed, index])
            w = int(rng.integers(96, 129))
            h = int(rng.integers(96, 129))
            content = _mid_gray_texture(h, w, 50, rng)
            pads = {
                Side.TOP: int(rng.integers(16, 31)),
                Side.BOTTOM: int(rng.integers(16, 31)),
                Side.LEFT: 0,
                Side.RIGHT: 0,
            }
            image = apply_mirror_padding(content, pads)
            if sigma > 0:
                image = add_gaussian_noise(image, sigma, int(rng.integers(2**63)))
            samples.append((image, LabeledSample(f"{index:05d}", pads)))
            index += 1
    # unpadded images with content MSE spread ~uniformly across [3500, 9600]
    for _ in range(200):
        rng = np.random.default_rng([seed, index])
        w = int(rng.integers(96, 129))
        h = int(rng.integers(96, 129))
        amp = int(round(np.sqrt(1.5 * rng.uniform(3500, 9600))))
        image = _mid_gray_texture(h, w, amp, rng)
        samples.append((image, LabeledSample(f"{index:05d}", {s: 0 for s in Side})))
        index += 1

    records, failures = collect_min_mses(samples, DetectionParams())
    assert failures == []
    tau_sweep = sweep_thresholds(records).best_threshold
    tau_otsu = otsu_threshold(image_min_mses(records))
    sweep_point = evaluate_threshold(records, tau_sweep)
    otsu_point = evaluate_threshold(records, tau_otsu)
    with criterion(5, "sweep vs Otsu ordering"):
        assert sweep_point.recall > otsu_point.recall
        assert abs(sweep_point.precision - otsu_point.precision) <= 0.02
    print(
        f"  sweep tau={tau_sweep:.0f}: P={sweep_point.precision:.4f} R={sweep_point.recall:.4f} | "
        f"otsu tau={tau_otsu:.1f}: P={otsu_point.precision:.4f} R={otsu_point.recall:.4f}"
    )


def test_06_crop_and_annotation_integrity():
    """Cropping with the detected rectangle recovers every pre-padding
    original bit-exactly at sigma=0, and every rewritten box satisfies the
    normalized-box invariants."""
    params = DetectionParams()
    corpus = generate_labeled_corpus(150, CorpusSpec(size_min=64, size_max=160), seed=606)
    box_rng = np.random.default_rng(607)
    recovered = 0
    boxes_checked = 0
    for image, sample in corpus:
        h, w = image.shape[:2]
        report = detect_all_sides(image, params)
        cropped = crop_image(image, report.crop)
        original = image[
            sample.true_pad[Side.TOP] : h - sample.true_pad[Side.BOTTOM],
            sample.true_pad[Side.LEFT] : w - sample.true_pad[Side.RIGHT],
        ]
        assert np.array_equal(cropped, original)
        recovered += 1
        boxes = []
        for _ in range(8):
            bw = float(box_rng.uniform(0.02, 0.5))
            bh = float(box_rng.uniform(0.02, 0.5))
            cx = float(box_rng.uniform(bw / 2, 1 - bw / 2))
            cy = float(box_rng.uniform(bh / 2, 1 - bh / 2))
            boxes.append(BoundingBox(int(box_rng.integers(0, 5)), cx, cy, bw, bh))
        for box in transform_annotations(boxes, (w, h), report.crop):
            box.validate()
            boxes_checked += 1
    with criterion(6, "crop and annotation integrity"):
        assert recovered == 150
        assert boxes_checked > 500
    print(f"  {recovered} originals recovered bit-exactly, {boxes_checked} boxes valid")


def test_07_determinism(tmp_path):
    """synth, detect, and report outputs are byte-identical across repeated
    runs with fixed seeds and flags."""

    def run_synth(name):
        out = tmp_path / name
        assert cli_main([
            "synth", str(out), "--count", "12", "--seed", "77", "--sigma", "1.5",
        ]) == 0
        return out

    corpus_a = run_synth("corpus_a")
    corpus_b = run_synth("corpus_b")

    def run_detect(corpus, name):
        report = tmp_path / f"{name}.json"
        assert cli_main([
            "detect", str(corpus), "--report", str(report), "--jobs", "2",
            "--emit-profiles",
        ]) == 0
        return report

    report_1 = run_detect(corpus_a, "report_1")
    report_2 = run_detect(corpus_a, "report_2")

    with criterion(7, "determinism"):
        files_a = sorted(p.name for p in corpus_a.iterdir())
        assert files_a == sorted(p.name for p in corpus_b.iterdir())
        for name in files_a:
            assert (corpus_a / name).read_bytes() == (corpus_b / name).read_bytes()
        assert report_1.read_bytes() == report_2.read_bytes()
        profiles_1 = sorted((tmp_path / "report_1_profiles").iterdir())
        profiles_2 = sorted((tmp_path / "report_2_profiles").iterdir())
        assert [p.name for p in profiles_1] == [p.name for p in profiles_2]
        for p1, p2 in zip(profiles_1, profiles_2):
            assert p1.read_bytes() == p2.read_bytes()
    print(f"  {len(files_a)} corpus files and {len(profiles_1)} profiles byte-identical")
