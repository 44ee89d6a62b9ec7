"""Generator-quality metrics over feature matrices and checkpoint selection.

FID is the Frechet distance between Gaussian fits; KID is the mean over
random subsets of the unbiased MMD^2 estimator with the cubic polynomial
kernel k(x, y) = (x.y / d + 1)^3; precision/recall are k-NN manifold
estimates.  Checkpoint selection is tier-first on FID, then ranks by the
composite score S = 0.5 * precision + 0.5 * recall with a recall
tie-break when the top two scores are within 0.005.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .features import FeatureMatrix

TIER_BOUNDARIES = (30.0, 50.0, 75.0)
TIER_LABELS = ("extraordinary", "excellent", "good", "fair")
SCORE_TIE_MARGIN = 0.005
KID_SUBSETS = 100
KID_SUBSET_MAX = 1000
KNN_NEIGHBOURS = 3


def _as_array(x) -> np.ndarray:
    data = x.data if isinstance(x, FeatureMatrix) else np.asarray(x)
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"expected 2-D features, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError("non-finite feature values")
    return data


def _sqrt_psd(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(real, generated) -> float:
    """Frechet distance between Gaussian fits of two feature sets.

    The cross term uses the similarity trick sqrt(Sr) Sg sqrt(Sr) with
    eigenvalues clamped at zero, which is stable at d=2048 with n around
    a few hundred.
    """
    a = _as_array(real)
    b = _as_array(generated)
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise ValueError("need at least 2 rows on each side")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    cov_a = np.cov(a, rowvar=False)
    cov_b = np.cov(b, rowvar=False)
    cov_a = np.atleast_2d(cov_a)
    cov_b = np.atleast_2d(cov_b)
    sqrt_a = _sqrt_psd(cov_a)
    inner = sqrt_a @ cov_b @ sqrt_a
    cross = np.clip(np.linalg.eigvalsh((inner + inner.T) / 2.0), 0.0, None)
    trace_term = np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.sqrt(cross).sum()
    value = float(np.sum((mu_a - mu_b) ** 2) + trace_term)
    return max(value, 0.0)


def kid_subset_sizes(n_real: int, n_generated: int,
                     subset_max: int = KID_SUBSET_MAX) -> tuple[int, int]:
    """Per-side subset size: min(subset_max, n) on each side."""
    return min(subset_max, n_real), min(subset_max, n_generated)


def _poly_kernel(x: np.ndarray, y: np.ndarray, d: int) -> np.ndarray:
    return (x @ y.T / d + 1.0) ** 3


def kid(real, generated, subsets: int = KID_SUBSETS, subset_max: int = KID_SUBSET_MAX,
        rng_seed: int = 0, return_subsets: bool = False):
    """Mean unbiased polynomial-kernel MMD^2 over seeded random subsets."""
    a = _as_array(real)
    b = _as_array(generated)
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise ValueError("need at least 2 rows on each side")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    d = a.shape[1]
    m_real, m_gen = kid_subset_sizes(a.shape[0], b.shape[0], subset_max)
    rng = np.random.Generator(np.random.Philox(key=rng_seed))
    values = np.empty(subsets, dtype=np.float64)
    for i in range(subsets):
        ya = a[rng.choice(a.shape[0], size=m_real, replace=False)]
        xb = b[rng.choice(b.shape[0], size=m_gen, replace=False)]
        kxx = _poly_kernel(xb, xb, d)
        kyy = _poly_kernel(ya, ya, d)
        kxy = _poly_kernel(xb, ya, d)
        term_x = (kxx.sum() - np.trace(kxx)) / (m_gen * (m_gen - 1))
        term_y = (kyy.sum() - np.trace(kyy)) / (m_real * (m_real - 1))
        values[i] = term_x + term_y - 2.0 * kxy.mean()
    estimate = float(values.mean())
    if return_subsets:
        return estimate, values
    return estimate


def precision_recall(real, generated, k: int = KNN_NEIGHBOURS) -> tuple[float, float]:
    """k-NN manifold precision (fidelity) and recall (coverage).

    A point is inside a manifold when its distance to some reference point
    is <= that reference's k-th neighbour radius; duplicate-only sets give
    zero radii, so membership then requires exact coincidence.
    """
    a = _as_array(real)
    b = _as_array(generated)
    if a.shape[0] < k + 1 or b.shape[0] < k + 1:
        raise ValueError(f"need at least k+1={k + 1} rows on each side")
    d_rr = cdist(a, a)
    d_gg = cdist(b, b)
    radius_real = np.partition(d_rr, k, axis=1)[:, k]   # k-th neighbour, self excluded
    radius_gen = np.partition(d_gg, k, axis=1)[:, k]
    d_gr = cdist(b, a)
    precision = float((d_gr <= radius_real[None, :]).any(axis=1).mean())
    recall = float((d_gr.T <= radius_gen[None, :]).any(axis=1).mean())
    return precision, recall


@dataclass(frozen=True)
class SnapshotMetrics:
    kimg: int
    fid: float
    kid: float
    precision: float
    recall: float
    generator: str = ""

    def __post_init__(self):
        if not np.isfinite(self.fid) or self.fid < 0:
            raise ValueError(f"fid must be finite and non-negative, got {self.fid}")
        for name in ("precision", "recall"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def fid_tier(value: float, boundaries=TIER_BOUNDARIES) -> str:
    for bound, label in zip(boundaries, TIER_LABELS):
        if value <= bound:
            return label
    return TIER_LABELS[-1]


def tier_rank(value: float, boundaries=TIER_BOUNDARIES) -> int:
    return TIER_LABELS.index(fid_tier(value, boundaries))


def composite_score(snap: SnapshotMetrics) -> float:
    return 0.5 * snap.precision + 0.5 * snap.recall


def select_checkpoint(snapshots: list[SnapshotMetrics],
                      tie_margin: float = SCORE_TIE_MARGIN,
                      boundaries=TIER_BOUNDARIES) -> SnapshotMetrics:
    """Tier-gate on FID, rank by S, recall tie-break within the margin."""
    if not snapshots:
        raise ValueError("no snapshots to select from")
    best_rank = min(tier_rank(s.fid, boundaries) for s in snapshots)
    eligible = [s for s in snapshots if tier_rank(s.fid, boundaries) == best_rank]
    ranked = sorted(eligible, key=lambda s: (-composite_score(s), -s.recall, s.kimg,
                                             s.fid, s.kid, s.generator))
    if len(ranked) >= 2:
        top, second = ranked[0], ranked[1]
        if composite_score(top) - composite_score(second) <= tie_margin \
                and second.recall > top.recall:
            return second
    return ranked[0]


SNAPSHOT_INPUT_HEADER = "generator,kimg,fid,kid,precision,recall"
SNAPSHOT_CSV_HEADER = "generator,kimg,fid,kid,precision,recall,tier,S,selected"


def load_snapshot_csv(path) -> list[SnapshotMetrics]:
    """Read a snapshot metrics table (``generator,kimg,fid,kid,precision,recall``)."""
    from .errors import DataError
    with open(path, "rb") as fh:
        lines = fh.read().decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != SNAPSHOT_INPUT_HEADER:
        raise DataError(f"{path}: line 1: expected header {SNAPSHOT_INPUT_HEADER!r}")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 6:
            raise DataError(f"{path}: line {lineno}: expected 6 fields, got {len(fields)}")
        try:
            out.append(SnapshotMetrics(
                generator=fields[0], kimg=int(fields[1]), fid=float(fields[2]),
                kid=float(fields[3]), precision=float(fields[4]), recall=float(fields[5])))
        except ValueError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
    return out


def write_snapshot_table(snapshots: list[SnapshotMetrics], selected: SnapshotMetrics,
                         path, boundaries=TIER_BOUNDARIES) -> None:
    lines = [SNAPSHOT_CSV_HEADER]
    for s in snapshots:
        lines.append(f"{s.generator},{s.kimg},{s.fid:.10g},{s.kid:.10g},"
                     f"{s.precision:.10g},{s.recall:.10g},{fid_tier(s.fid, boundaries)},"
                     f"{composite_score(s):.10g},{int(s == selected)}")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("utf-8"))
