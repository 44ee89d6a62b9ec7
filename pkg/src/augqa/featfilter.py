"""Feature-space candidate filtering.

Per stratum: reduce the real features with unwhitened PCA (k <= min(200,
n_real - 1)), fit a Ledoit-Wolf shrinkage covariance to the projections,
score candidates by squared Mahalanobis distance from the real mean, and
reject those beyond the 97.5th percentile of the real images' own
self-distances.  Survivors are ordered by deterministic farthest-point
(greedy k-centre) selection seeded at the survivor centroid, which makes
the ratio sets nested by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataError
from .features import FeatureMatrix
from .manifest import Manifest, build_manifest, split_by_stratum

MAX_COMPONENTS = 200
DEFAULT_QUANTILE = 0.975
AUDIT_QUANTILES = (0.95, 0.975, 0.99)


def ledoit_wolf(x: np.ndarray) -> tuple[np.ndarray, float]:
    """Shrinkage covariance toward a scaled identity target.

    Returns (sigma, delta) with sigma = (1 - delta) * S + delta * mu * I,
    where S is the maximum-likelihood sample covariance (denominator n),
    mu = tr(S) / k, and delta is the closed-form optimal coefficient.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError(f"need a 2-D matrix with n >= 2, got shape {x.shape}")
    n, k = x.shape
    xc = x - x.mean(axis=0)
    s = xc.T @ xc / n
    mu = np.trace(s) / k
    if mu <= 0:
        # all points identical: no scatter to model, fall back to identity
        return np.eye(k), 1.0
    delta_sq = np.sum((s - mu * np.eye(k)) ** 2) / k
    if delta_sq <= 0:
        return s.copy(), 0.0
    x2 = xc ** 2
    beta_sq = np.sum(x2.T @ x2 / n - s ** 2) / (k * n)
    beta_sq = min(beta_sq, delta_sq)
    delta = beta_sq / delta_sq
    sigma = (1.0 - delta) * s + delta * mu * np.eye(k)
    return sigma, float(delta)


@dataclass(frozen=True)
class StratumFilterModel:
    mean: np.ndarray          # (d,)
    basis: np.ndarray         # (d, k) orthonormal columns
    covariance: np.ndarray    # (k, k) Ledoit-Wolf estimate
    shrinkage: float
    threshold: float          # q-quantile of the real self-distances
    chol: np.ndarray          # lower Cholesky factor of covariance

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]

    def project(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.mean.shape[0]:
            raise ValueError(f"expected {self.mean.shape[0]}-d vectors, got {x.shape[1]}-d")
        proj = (x - self.mean) @ self.basis
        return proj[0] if single else proj


def fit_filter(real: FeatureMatrix | np.ndarray,
               max_components: int = MAX_COMPONENTS,
               quantile: float = DEFAULT_QUANTILE) -> StratumFilterModel:
    """Fit the per-stratum gate on real features only."""
    data = real.data if isinstance(real, FeatureMatrix) else np.asarray(real)
    data = np.asarray(data, dtype=np.float64)
    n, d = data.shape
    if n < 2:
        raise ValueError(f"need at least 2 real images to fit a filter, got {n}")
    mean = data.mean(axis=0)
    centered = data - mean
    k = min(max_components, n - 1, d)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    basis = vt[:k].T.copy()
    # sign convention: largest-magnitude loading positive (stable across runs)
    flip = np.sign(basis[np.argmax(np.abs(basis), axis=0), np.arange(k)])
    flip[flip == 0] = 1.0
    basis *= flip
    proj = centered @ basis
    covariance, shrinkage = ledoit_wolf(proj)
    covariance = (covariance + covariance.T) / 2.0
    try:
        chol = np.linalg.cholesky(covariance)
    except np.linalg.LinAlgError:
        # beta = 0 with exactly repeated antipodal points leaves the raw
        # singular covariance; a trace-scaled jitter keeps the gate total
        jitter = max(np.trace(covariance) / k, 1.0) * 1e-12
        covariance = covariance + jitter * np.eye(k)
        chol = np.linalg.cholesky(covariance)
    w = solve_triangular(chol, proj.T, lower=True)
    self_d2 = np.sum(w * w, axis=0)
    threshold = float(np.percentile(self_d2, 100.0 * quantile))
    return StratumFilterModel(mean=mean, basis=basis, covariance=covariance,
                              shrinkage=shrinkage, threshold=threshold, chol=chol)


def mahalanobis_sq(model: StratumFilterModel, x: np.ndarray) -> np.ndarray | float:
    """Squared Mahalanobis distance in PCA space via a triangular solve."""
    single = np.asarray(x).ndim == 1
    proj = model.project(x)
    proj = np.atleast_2d(proj)
    w = solve_triangular(model.chol, proj.T, lower=True)
    d2 = np.sum(w * w, axis=0)
    return float(d2[0]) if single else d2


@dataclass
class FilterReport:
    ids: tuple[str, ...]
    d2: np.ndarray
    passed: np.ndarray
    threshold: float
    selection_order: tuple[str, ...] = ()
    selection_metric: str = "euclidean"
    stratum: str = ""

    @property
    def rejected_count(self) -> int:
        return int((~self.passed).sum())

    def passing_ids(self) -> list[str]:
        return [i for i, ok in zip(self.ids, self.passed) if ok]


def filter_candidates(model: StratumFilterModel, candidates: FeatureMatrix) -> FilterReport:
    """Pass/reject per candidate; rejection is strictly above the threshold."""
    d2 = np.atleast_1d(mahalanobis_sq(model, candidates.data))
    passed = d2 <= model.threshold
    return FilterReport(ids=candidates.ids, d2=d2, passed=passed, threshold=model.threshold)


def farthest_point_select(model: StratumFilterModel, passing: FeatureMatrix,
                          m: int, metric: str = "euclidean") -> list[str]:
    """Greedy k-centre order over the survivors, truncated to m ids.

    Seeded at the survivor closest to the survivor centroid; each later pick
    maximizes the minimum distance to the already-selected set.  Ties break
    toward the lowest id.  Distances are Euclidean in PCA space by default;
    ``metric='mahalanobis'`` whitens by the fitted covariance first.
    """
    if m > passing.n:
        raise ValueError(f"requested {m} selections but only {passing.n} candidates pass "
                         f"(shortfall {m - passing.n})")
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        return []
    order = np.argsort(np.asarray(passing.ids))  # id-sorted: first argmin/argmax hit = lowest id
    ids = [passing.ids[i] for i in order]
    proj = model.project(passing.data)[order]
    if metric == "mahalanobis":
        proj = solve_triangular(model.chol, proj.T, lower=True).T
    elif metric != "euclidean":
        raise ValueError(f"unknown selection metric {metric!r}")
    centroid = proj.mean(axis=0)
    d_centroid = np.linalg.norm(proj - centroid, axis=1)
    seed = int(np.argmin(d_centroid))
    selected = [seed]
    min_dist = np.linalg.norm(proj - proj[seed], axis=1)
    min_dist[seed] = -np.inf
    while len(selected) < m:
        pick = int(np.argmax(min_dist))
        selected.append(pick)
        dist = np.linalg.norm(proj - proj[pick], axis=1)
        min_dist = np.minimum(min_dist, dist)
        min_dist[pick] = -np.inf
    return [ids[i] for i in selected]


@dataclass
class ThresholdAudit:
    stratum: str
    n_real: int
    n_candidates: int
    rejections: dict[str, int] = field(default_factory=dict)  # quantile label -> count


@dataclass
class FilteredSets:
    manifests: dict[int, Manifest]           # ratio -> manifest
    reports: dict[str, FilterReport]         # stratum label -> report
    audits: list[ThresholdAudit]


def build_filtered_sets(real_manifest: Manifest, real_features: FeatureMatrix,
                        pool_manifest: Manifest, pool_features: FeatureMatrix,
                        ratios: list[int],
                        quantile: float = DEFAULT_QUANTILE,
                        max_components: int = MAX_COMPONENTS,
                        metric: str = "euclidean") -> FilteredSets:
    """Per-stratum filter + nested farthest-point sets at each ratio."""
    if not ratios or any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be positive integers, got {ratios}")
    ratios = sorted(set(int(r) for r in ratios))
    real_strata = split_by_stratum(real_manifest)
    pool_strata = split_by_stratum(pool_manifest)
    pool_by_id = pool_manifest.by_id()
    selected_per_ratio: dict[int, list] = {r: [] for r in ratios}
    reports: dict[str, FilterReport] = {}
    audits: list[ThresholdAudit] = []
    for stratum in sorted(real_strata):
        label = f"{stratum[0]}/{stratum[1]}"
        real_ids = [r.id for r in real_strata[stratum]]
        pool_ids = [r.id for r in pool_strata.get(stratum, [])]
        n_real = len(real_ids)
        model = fit_filter(real_features.subset(real_ids),
                           max_components=max_components, quantile=quantile)
        cand = pool_features.subset(pool_ids) if pool_ids else \
            FeatureMatrix(ids=(), data=np.zeros((0, real_features.dim), dtype=np.float32))
        report = filter_candidates(model, cand)
        report.stratum = label
        report.selection_metric = metric

        audit = ThresholdAudit(stratum=label, n_real=n_real, n_candidates=len(pool_ids))
        real_d2 = np.atleast_1d(mahalanobis_sq(model, real_features.subset(real_ids).data))
        for q in AUDIT_QUANTILES:
            thr = float(np.percentile(real_d2, 100.0 * q))
            audit.rejections[f"q{q:g}"] = int((report.d2 > thr).sum())
        audits.append(audit)

        needed = max(ratios) * n_real
        passing_ids = report.passing_ids()
        if len(passing_ids) < needed:
            raise DataError(
                f"stratum {label}: {len(passing_ids)} passing candidates for a quota of "
                f"{needed} (deficit {needed - len(passing_ids)})")
        order = farthest_point_select(model, pool_features.subset(passing_ids),
                                      needed, metric=metric)
        report.selection_order = tuple(order)
        reports[label] = report
        for ratio in ratios:
            take = order[:ratio * n_real]
            selected_per_ratio[ratio].extend(pool_by_id[i] for i in take)

    manifests = {}
    for ratio in ratios:
        recs = [type(r)(id=r.id, path=r.path, split=r.split, source="synthetic",
                        tumour_class=r.tumour_class, plane=r.plane)
                for r in selected_per_ratio[ratio]]
        manifests[ratio] = build_manifest(recs, provenance=pool_manifest.provenance)
    return FilteredSets(manifests=manifests, reports=reports, audits=audits)


def write_filter_report_csv(reports: dict[str, FilterReport], path) -> None:
    """CSV: id,d2,pass,selection_rank (rank empty when not selected)."""
    lines = ["id,d2,pass,selection_rank"]
    for label in sorted(reports):
        rep = reports[label]
        rank = {rid: k for k, rid in enumerate(rep.selection_order)}
        for rid, d2, ok in zip(rep.ids, rep.d2, rep.passed):
            r = rank.get(rid)
            lines.append(f"{rid},{d2:.17g},{int(ok)},{'' if r is None else r}")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("utf-8"))
