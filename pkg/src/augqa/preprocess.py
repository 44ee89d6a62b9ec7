"""Deterministic slice harmonization.

Pipeline: 8-bit grayscale -> brain-mask cascade (scaled-Otsu threshold,
border flood fill, largest 4-connected component, fragment floor, binary
closing) -> masked percentile normalization -> bounding-box crop with
padding -> Lanczos resize to 128x128 with nearest-neighbour mask resize ->
scale-adaptive unsharp -> remask -> low-intensity floor.  Every stage is a
pure function of the input bytes, so reruns are byte-identical.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageFilter
from scipy import ndimage

OTSU_SCALES = (0.50, 0.75, 1.00, 1.25, 1.50)
OTSU_TIERS = ("otsu_050", "otsu_075", "otsu_100", "otsu_125", "otsu_150")
AREA_LOW, AREA_HIGH = 0.15, 0.85
MIN_FRAGMENT_PX = 500
DEFAULT_CLOSING_ITERATIONS = (6, 6, 6, 6, 6)
FINAL_CLOSING_ITERATIONS = 3
OUTPUT_SIZE = 128
INTENSITY_FLOOR = 5

# 4-connectivity structuring element (flood fill and component labelling)
_CONN4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_SQUARE3 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class MaskResult:
    mask: np.ndarray          # bool, same shape as input
    accepted_tier: str        # otsu_050.. otsu_150, closest_to_50, full_image
    area_fraction: float


@dataclass(frozen=True)
class PreprocessResult:
    image: np.ndarray         # uint8 (OUTPUT_SIZE, OUTPUT_SIZE)
    resized_mask: np.ndarray  # bool  (OUTPUT_SIZE, OUTPUT_SIZE)
    mask_result: MaskResult
    constant_region: bool     # normalization hit a constant masked region


def to_grayscale(image) -> np.ndarray:
    """uint8 grayscale from a PIL image or array.

    RGB inputs use luma weights 0.299/0.587/0.114 with half-up rounding.
    """
    if isinstance(image, Image.Image):
        if image.mode in ("L", "I;16", "I", "F", "P", "1"):
            arr = np.asarray(image.convert("L"), dtype=np.uint8)
            return arr.copy()
        arr = np.asarray(image.convert("RGB"), dtype=np.float64)
        luma = arr[..., 0] * 0.299 + arr[..., 1] * 0.587 + arr[..., 2] * 0.114
        return np.floor(luma + 0.5).astype(np.uint8)
    arr = np.asarray(image)
    if arr.ndim == 2:
        return arr.astype(np.uint8, copy=True)
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        rgb = arr[..., :3].astype(np.float64)
        luma = rgb[..., 0] * 0.299 + rgb[..., 1] * 0.587 + rgb[..., 2] * 0.114
        return np.floor(luma + 0.5).astype(np.uint8)
    raise ValueError(f"cannot interpret array of shape {arr.shape} as an image")


def histogram256(img: np.ndarray) -> np.ndarray:
    return np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256).astype(np.int64)


def otsu_threshold(hist: np.ndarray) -> int:
    """Threshold maximizing between-class variance; lowest wins on ties.

    Pixels strictly greater than the returned value are foreground.
    """
    hist = np.asarray(hist, dtype=np.float64)
    if hist.shape != (256,):
        raise ValueError(f"expected a 256-bin histogram, got shape {hist.shape}")
    total = hist.sum()
    if total <= 0:
        raise ValueError("histogram has no pixels")
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    m0 = np.cumsum(hist * levels)
    w1 = total - w0
    mean_total = m0[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = m0 / w0
        mu1 = (mean_total - m0) / w1
    var_between = w0 * w1 * (mu0 - mu1) ** 2
    var_between[~np.isfinite(var_between)] = 0.0
    return int(np.argmax(var_between))


def _flood_fill_background(closed: np.ndarray) -> np.ndarray:
    """Region (bool) 4-connected to the border of a 1-pixel zero padding."""
    padded_bg = np.pad(~closed, 1, constant_values=True)
    labels, _ = ndimage.label(padded_bg, structure=_CONN4)
    external = labels == labels[0, 0]
    return external[1:-1, 1:-1]


def _mask_attempt(img: np.ndarray, threshold: float, closing_iterations: int) -> np.ndarray:
    fg = img > threshold
    if closing_iterations > 0:
        fg = ndimage.binary_closing(fg, structure=_SQUARE3, iterations=closing_iterations)
    background = _flood_fill_background(fg)
    candidate = ~background
    if not candidate.any():
        return candidate
    labels, n = ndimage.label(candidate, structure=_CONN4)
    if n > 1:
        sizes = np.bincount(labels.ravel())
        sizes[0] = 0
        candidate = labels == int(np.argmax(sizes))
    if candidate.sum() < MIN_FRAGMENT_PX:
        return np.zeros_like(candidate)
    return ndimage.binary_closing(candidate, structure=_SQUARE3,
                                  iterations=FINAL_CLOSING_ITERATIONS)


def mask_attempts(img: np.ndarray,
                  closing_iterations=DEFAULT_CLOSING_ITERATIONS) -> list[tuple[np.ndarray, float]]:
    """All five scaled-Otsu attempts as (mask, area_fraction), in scale order."""
    img = np.asarray(img, dtype=np.uint8)
    if img.size == 0:
        raise ValueError("empty image")
    if len(closing_iterations) != len(OTSU_SCALES):
        raise ValueError(f"need {len(OTSU_SCALES)} closing iteration counts")
    base = otsu_threshold(histogram256(img))
    out = []
    for scale, iters in zip(OTSU_SCALES, closing_iterations):
        mask = _mask_attempt(img, scale * base, iters)
        out.append((mask, float(mask.mean())))
    return out


def extract_brain_mask(img: np.ndarray,
                       closing_iterations=DEFAULT_CLOSING_ITERATIONS) -> MaskResult:
    """Scaled-Otsu cascade; falls back to closest-to-50% then full image."""
    attempts = mask_attempts(img, closing_iterations)
    for tier, (mask, frac) in zip(OTSU_TIERS, attempts):
        if AREA_LOW <= frac <= AREA_HIGH:
            return MaskResult(mask=mask, accepted_tier=tier, area_fraction=frac)
    nonempty = [(mask, frac) for mask, frac in attempts if frac > 0]
    if nonempty:
        mask, frac = min(nonempty, key=lambda mf: abs(mf[1] - 0.5))
        return MaskResult(mask=mask, accepted_tier="closest_to_50", area_fraction=frac)
    full = np.ones(np.asarray(img).shape, dtype=bool)
    return MaskResult(mask=full, accepted_tier="full_image", area_fraction=1.0)


def normalize_intensity(img: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, bool]:
    """Clip masked pixels to [p1, p99] and rescale to 0..255; zero background.

    Returns (image, constant_region): a constant masked region yields an
    all-zero image with the flag set instead of dividing by zero.
    """
    img = np.asarray(img, dtype=np.uint8)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape:
        raise ValueError(f"mask shape {mask.shape} != image shape {img.shape}")
    masked = img[mask]
    if masked.size == 0:
        raise ValueError("empty mask; use the full-image fallback mask")
    p1, p99 = np.percentile(masked.astype(np.float64), [1.0, 99.0])
    if p99 <= p1:
        return np.zeros_like(img), True
    scaled = (np.clip(img.astype(np.float64), p1, p99) - p1) * (255.0 / (p99 - p1))
    out = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    out[~mask] = 0
    return out, False


def unsharp_params(scale: float) -> tuple[float, float, float] | None:
    """(radius_px, percent, threshold) for a crop upscale factor, or None.

    No sharpening below 1.2; linear between (1.0, 80, 4) at 1.2 and
    (2.5, 200, 1) at 3.0; capped above 3.0.
    """
    if scale < 1.2:
        return None
    f = (min(scale, 3.0) - 1.2) / (3.0 - 1.2)
    return (1.0 + 1.5 * f, 80.0 + 120.0 * f, 4.0 - 3.0 * f)


def crop_resize_sharpen(img: np.ndarray, mask: np.ndarray,
                        size: int = OUTPUT_SIZE) -> tuple[np.ndarray, np.ndarray]:
    """Crop to the padded mask bbox, resize, sharpen, remask, floor.

    Returns (image, resized_mask); every output pixel is 0 or >= 5 and every
    nonzero pixel lies inside the resized mask.
    """
    img = np.asarray(img, dtype=np.uint8)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("empty mask; use the full-image fallback mask")
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    r0, r1 = int(rows[0]), int(rows[-1])
    c0, c1 = int(cols[0]), int(cols[-1])
    bbox_h, bbox_w = r1 - r0 + 1, c1 - c0 + 1
    pad = max(4, round(0.05 * max(bbox_h, bbox_w)))
    r0, r1 = max(0, r0 - pad), min(img.shape[0] - 1, r1 + pad)
    c0, c1 = max(0, c0 - pad), min(img.shape[1] - 1, c1 + pad)
    crop = img[r0:r1 + 1, c0:c1 + 1]
    crop_mask = mask[r0:r1 + 1, c0:c1 + 1]
    scale = size / max(crop.shape)

    resized = Image.fromarray(crop, mode="L").resize((size, size), Image.Resampling.LANCZOS)
    params = unsharp_params(scale)
    if params is not None:
        radius, percent, threshold = params
        resized = resized.filter(ImageFilter.UnsharpMask(
            radius=radius, percent=int(round(percent)), threshold=int(round(threshold))))
    out = np.asarray(resized, dtype=np.uint8).copy()

    mask_img = Image.fromarray(crop_mask.astype(np.uint8) * 255, mode="L")
    mask_out = np.asarray(mask_img.resize((size, size), Image.Resampling.NEAREST)) > 0

    out[~mask_out] = 0
    out[out < INTENSITY_FLOOR] = 0
    return out, mask_out


def preprocess_image(image, closing_iterations=DEFAULT_CLOSING_ITERATIONS,
                     size: int = OUTPUT_SIZE) -> PreprocessResult:
    """Full harmonization of one raster; identical for real and synthetic."""
    gray = to_grayscale(image)
    mask_result = extract_brain_mask(gray, closing_iterations)
    norm, constant = normalize_intensity(gray, mask_result.mask)
    out, mask_out = crop_resize_sharpen(norm, mask_result.mask, size=size)
    return PreprocessResult(image=out, resized_mask=mask_out,
                            mask_result=mask_result, constant_region=constant)


def save_png(img: np.ndarray, path) -> None:
    """Lossless non-interlaced single-channel PNG."""
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(path, format="PNG")


def load_image(path) -> np.ndarray:
    with Image.open(path) as im:
        return to_grayscale(im)


@dataclass
class TelemetrySummary:
    tier_counts: dict[str, int]
    mean_accepted_coverage: float
    constant_region_count: int
    n_images: int


def summarize_telemetry(entries: list[dict]) -> TelemetrySummary:
    """Aggregate per-image telemetry dicts (id/tier/area_fraction/constant_region)."""
    tiers: dict[str, int] = {}
    accepted = []
    constant = 0
    for e in entries:
        tiers[e["tier"]] = tiers.get(e["tier"], 0) + 1
        if e["tier"] in OTSU_TIERS:
            accepted.append(e["area_fraction"])
        if e.get("constant_region"):
            constant += 1
    mean_cov = float(np.mean(accepted)) if accepted else 0.0
    return TelemetrySummary(tier_counts=tiers, mean_accepted_coverage=mean_cov,
                            constant_region_count=constant, n_images=len(entries))
