"""64-bit DCT perceptual hash.

Resize to 32x32 with Lanczos, 2-D type-II DCT, keep the top-left 8x8
low-frequency block, and set a bit wherever a coefficient exceeds the
block median (DC term included in the median by default).  Bit order is
row-major with the first coefficient in the most significant position.
"""
from __future__ import annotations

import numpy as np
from PIL import Image
from scipy.fft import dct

HASH_BITS = 64
_BLOCK = 8
_RESIZE = 32


def phash(img: np.ndarray, include_dc_in_median: bool = True) -> int:
    arr = np.asarray(img, dtype=np.uint8)
    if arr.size == 0:
        raise ValueError("empty image")
    small = Image.fromarray(arr, mode="L").resize((_RESIZE, _RESIZE), Image.Resampling.LANCZOS)
    pixels = np.asarray(small, dtype=np.float64)
    coeffs = dct(dct(pixels, axis=0), axis=1)
    block = coeffs[:_BLOCK, :_BLOCK].ravel()
    median = np.median(block) if include_dc_in_median else np.median(block[1:])
    value = 0
    for c in block:
        value = (value << 1) | int(c > median)
    return value


def hamming(a: int, b: int) -> int:
    return (a ^ b).bit_count()


def hamming_matrix(a: list[int], b: list[int]) -> np.ndarray:
    """Pairwise Hamming distances between two hash lists, shape (len(a), len(b))."""
    av = np.asarray(a, dtype=np.uint64)
    bv = np.asarray(b, dtype=np.uint64)
    x = (av[:, None] ^ bv[None, :]).view(np.uint8).reshape(len(av), len(bv), 8)
    lut = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
    return lut[x].sum(axis=2).astype(np.int64)
