"""Generation-side candidate screening.

Checks run in order on each preprocessed candidate: blank-by-mean
(mean intensity < 30), blank-by-support (nonzero fraction < 0.08), then
perceptual-hash dedup at Hamming distance <= 6 against everything already
accepted plus the real references.  Accepted hashes join the seen-set, so
gating is sequential within a stratum.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .phash import hamming, phash

MEAN_THRESHOLD = 30.0
NONZERO_THRESHOLD = 0.08
PHASH_MAX_DISTANCE = 6


@dataclass(frozen=True)
class GateDecision:
    candidate_id: str
    verdict: str  # accept | reject_blank_mean | reject_blank_nonzero | reject_phash_dup
    mean_intensity: float
    nonzero_fraction: float
    nearest_hamming: int | None

    def to_json(self) -> str:
        return json.dumps({
            "candidate_id": self.candidate_id,
            "verdict": self.verdict,
            "mean_intensity": self.mean_intensity,
            "nonzero_fraction": self.nonzero_fraction,
            "nearest_hamming": self.nearest_hamming,
        }, separators=(",", ":"))


def is_blank_mean(mean_intensity: float, threshold: float = MEAN_THRESHOLD) -> bool:
    return mean_intensity < threshold


def is_blank_nonzero(nonzero_fraction: float, threshold: float = NONZERO_THRESHOLD) -> bool:
    return nonzero_fraction < threshold


def gate_candidate(candidate_id: str, img: np.ndarray,
                   seen: set[int], refs: set[int] | frozenset[int],
                   mean_threshold: float = MEAN_THRESHOLD,
                   nonzero_threshold: float = NONZERO_THRESHOLD,
                   phash_max_distance: int = PHASH_MAX_DISTANCE,
                   include_dc_in_median: bool = True) -> GateDecision:
    """Screen one preprocessed candidate; accepted hashes are added to ``seen``."""
    arr = np.asarray(img, dtype=np.uint8)
    mean_intensity = float(arr.mean())
    nonzero_fraction = float(np.count_nonzero(arr) / arr.size)
    if is_blank_mean(mean_intensity, mean_threshold):
        return GateDecision(candidate_id, "reject_blank_mean",
                            mean_intensity, nonzero_fraction, None)
    if is_blank_nonzero(nonzero_fraction, nonzero_threshold):
        return GateDecision(candidate_id, "reject_blank_nonzero",
                            mean_intensity, nonzero_fraction, None)
    h = phash(arr, include_dc_in_median=include_dc_in_median)
    nearest = None
    for other in seen:
        d = hamming(h, other)
        if nearest is None or d < nearest:
            nearest = d
    for other in refs:
        d = hamming(h, other)
        if nearest is None or d < nearest:
            nearest = d
    if nearest is not None and nearest <= phash_max_distance:
        return GateDecision(candidate_id, "reject_phash_dup",
                            mean_intensity, nonzero_fraction, nearest)
    seen.add(h)
    return GateDecision(candidate_id, "accept", mean_intensity, nonzero_fraction, nearest)


def quota(real_counts: dict, rho: float) -> tuple[dict, int]:
    """Per-stratum candidate quotas: round-half-even of rho * count.

    Half-even is the one rounding rule that reproduces the published pool
    total from the per-stratum training counts, so it is not configurable.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    quotas = {}
    for stratum, count in real_counts.items():
        if count < 0:
            raise ValueError(f"negative count for stratum {stratum!r}")
        quotas[stratum] = round(rho * count)
    return quotas, sum(quotas.values())
