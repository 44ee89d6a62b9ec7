"""Shared fixtures: synthetic brain-like rasters and manifest builders."""
from __future__ import annotations

import numpy as np
import pytest

from augqa.manifest import ImageRecord, build_manifest

# published per-stratum training counts (after duplicate removal) and the
# held-out test counts; several tests reproduce totals from these
TRAIN_COUNTS = {
    ("glioma", "axial"): 394, ("glioma", "coronal"): 430, ("glioma", "sagittal"): 323,
    ("meningioma", "axial"): 361, ("meningioma", "coronal"): 407, ("meningioma", "sagittal"): 464,
    ("no_tumour", "axial"): 352, ("no_tumour", "coronal"): 310, ("no_tumour", "sagittal"): 405,
    ("pituitary", "axial"): 424, ("pituitary", "coronal"): 505, ("pituitary", "sagittal"): 521,
}
TEST_COUNTS = {
    ("glioma", "axial"): 85, ("glioma", "coronal"): 81, ("glioma", "sagittal"): 88,
    ("meningioma", "axial"): 137, ("meningioma", "coronal"): 86, ("meningioma", "sagittal"): 83,
    ("no_tumour", "axial"): 52, ("no_tumour", "coronal"): 48, ("no_tumour", "sagittal"): 40,
    ("pituitary", "axial"): 124, ("pituitary", "coronal"): 90, ("pituitary", "sagittal"): 86,
}


def disc_image(size: int = 160, radius_frac: float = 0.36, fg_base: int = 120,
               seed: int = 0, centre=None) -> np.ndarray:
    """Textured bright disc on black background; radius_frac sets the radius."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    cy, cx = centre if centre is not None else (size / 2, size / 2)
    r = np.hypot(yy - cy, xx - cx)
    img = np.zeros((size, size), dtype=np.float64)
    inside = r <= radius_frac * size
    img[inside] = fg_base + 60 * np.cos(r[inside] / 6.0) + rng.normal(0, 12, int(inside.sum()))
    return np.clip(img, 0, 255).astype(np.uint8)


def disc_for_area(area_frac: float, **kwargs) -> np.ndarray:
    return disc_image(radius_frac=float(np.sqrt(area_frac / np.pi)), **kwargs)


def counts_manifest(counts: dict, split: str, source: str = "real", prefix: str = "img"):
    """Synthetic manifest with exactly the given per-stratum counts."""
    records = []
    idx = 0
    for (cls, plane), n in sorted(counts.items()):
        for _ in range(n):
            records.append(ImageRecord(
                id=f"{prefix}_{idx:05d}", path=f"{prefix}_{idx:05d}.png",
                split=split, source=source, tumour_class=cls, plane=plane))
            idx += 1
    return build_manifest(records)


@pytest.fixture
def table1_train():
    return counts_manifest(TRAIN_COUNTS, "train")


@pytest.fixture
def table1_test():
    return counts_manifest(TEST_COUNTS, "test", prefix="tst")


@pytest.fixture
def fixture_corpus(tmp_path):
    """20 deterministic brain-like PNGs on disk with a manifest."""
    from augqa.manifest import write_manifest
    from augqa.preprocess import save_png

    classes = ("glioma", "meningioma", "no_tumour", "pituitary")
    planes = ("axial", "coronal", "sagittal")
    records = []
    img_dir = tmp_path / "raw"
    img_dir.mkdir()
    for i in range(20):
        img = disc_image(size=150 + (i % 4) * 10, radius_frac=0.25 + 0.02 * (i % 6), seed=i)
        rid = f"fix_{i:03d}"
        save_png(img, img_dir / f"{rid}.png")
        records.append(ImageRecord(
            id=rid, path=f"raw/{rid}.png", split="train", source="real",
            tumour_class=classes[i % 4], plane=planes[i % 3]))
    manifest = build_manifest(records)
    path = tmp_path / "manifest.csv"
    write_manifest(manifest, path)
    return tmp_path, path, manifest
