"""Paired multi-seed statistics and efficiency accounting.

Core pieces: per-seed classification metrics, paired case-level permutation
tests (per-image condition swaps across all seeds), percentile bootstrap
CIs over test images, step-down Holm correction, Wilson intervals plus the
exact binomial test for the gated VLM audit, exact paired sign-flip tests,
and training-effort summaries in epochs or real-data epochs.

Deltas inside this module are in natural [0, 1] units; the reporting layer
(:func:`compare_conditions`) converts to absolute percent units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy.stats import binom

from .cubes import PredictionCube, TrainingHistory

PERMUTATION_RESAMPLES = 5000
BOOTSTRAP_RESAMPLES = 5000
HOLM_ALPHA = 0.05
SIGN_FLIP_MAX_N = 30

# family of endpoints per condition: primary tumour accuracy plus secondaries
DEFAULT_METRICS = ("tumour_accuracy", "macro_f1", "weighted_f1",
                   "f1:glioma", "f1:meningioma", "f1:no_tumour", "f1:pituitary",
                   "plane_accuracy")

# tolerance for |stat*| >= |stat| tail comparisons: absorbs float summation
# order noise so exact ties (which count toward the tail) are never missed
_TIE_TOL = 1e-12

_PERM_STREAM = 0
_BOOT_STREAM = 1


def _rng(seed: int, stream: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# per-seed classification metrics

@dataclass(frozen=True)
class MetricVector:
    tumour_accuracy: float
    macro_f1: float
    weighted_f1: float
    per_class_f1: dict[str, float]
    plane_accuracy: float | None


def _encode(universe: np.ndarray, arr: np.ndarray) -> np.ndarray:
    enc = np.searchsorted(universe, arr)
    clipped = np.minimum(enc, len(universe) - 1)
    if not (universe[clipped] == np.asarray(arr)).all():
        stray = sorted(set(np.asarray(arr).ravel().tolist()) - set(universe.tolist()))
        raise ValueError(f"labels outside the class universe: {stray[:5]}")
    return clipped.astype(np.int64)


def _f1_per_class(true_enc: np.ndarray, pred_enc: np.ndarray,
                  n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    conf = np.bincount(true_enc * n_classes + pred_enc,
                       minlength=n_classes * n_classes).reshape(n_classes, n_classes)
    tp = np.diag(conf).astype(np.float64)
    support = conf.sum(axis=1).astype(np.float64)
    predicted = conf.sum(axis=0).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2.0 * precision * recall / denom, 0.0)
    return f1, support


def metrics(cube: PredictionCube, seed: int, classes: list[str] | None = None) -> MetricVector:
    """Standard multiclass metrics for one seed; per-class F1 uses 0/0 -> 0."""
    row = cube.seed_row(seed)
    true = cube.true_class
    pred = cube.pred_class[row]
    if classes is None:
        classes = sorted(set(true.tolist()) | set(pred.tolist()))
    universe = np.asarray(classes)
    t_enc = _encode(universe, true)
    p_enc = _encode(universe, pred)
    f1, support = _f1_per_class(t_enc, p_enc, len(universe))
    weighted = float((support / support.sum()) @ f1) if support.sum() else 0.0
    plane_acc = None
    if cube.pred_plane is not None:
        plane_acc = float((cube.pred_plane[row] == cube.true_plane).mean())
    return MetricVector(
        tumour_accuracy=float((pred == true).mean()),
        macro_f1=float(f1.mean()),
        weighted_f1=weighted,
        per_class_f1={c: float(v) for c, v in zip(classes, f1)},
        plane_accuracy=plane_acc,
    )


# ---------------------------------------------------------------------------
# paired permutation test and bootstrap CI

def _check_paired(a: PredictionCube, b: PredictionCube) -> None:
    if a.image_ids != b.image_ids:
        raise ValueError("cubes do not share image ids")
    if a.seeds != b.seeds:
        raise ValueError(f"cubes do not share seeds: {a.seeds} vs {b.seeds}")


def _is_accuracy_metric(metric: str) -> bool:
    return metric in ("tumour_accuracy", "plane_accuracy")


def _correct_matrix(cube: PredictionCube, metric: str) -> np.ndarray:
    if metric == "tumour_accuracy":
        return (cube.pred_class == cube.true_class[None, :]).astype(np.float64)
    if metric == "plane_accuracy":
        if cube.pred_plane is None:
            raise ValueError("cube has no plane predictions")
        return (cube.pred_plane == cube.true_plane[None, :]).astype(np.float64)
    raise ValueError(f"not an accuracy metric: {metric!r}")


class _EncodedPair:
    """Label-encoded views of a paired comparison, shared class universe."""

    def __init__(self, a: PredictionCube, b: PredictionCube, metric: str):
        self.metric = metric
        if metric.startswith("f1:") or metric in ("macro_f1", "weighted_f1"):
            true, pa, pb = a.true_class, a.pred_class, b.pred_class
        elif metric == "plane_accuracy":
            if a.pred_plane is None or b.pred_plane is None:
                raise ValueError("cube has no plane predictions")
            true, pa, pb = a.true_plane, a.pred_plane, b.pred_plane
        elif metric == "tumour_accuracy":
            true, pa, pb = a.true_class, a.pred_class, b.pred_class
        else:
            raise ValueError(f"unknown metric {metric!r}")
        classes = sorted(set(true.tolist()) | set(pa.ravel().tolist()) | set(pb.ravel().tolist()))
        self.classes = classes
        universe = np.asarray(classes)
        self.true = _encode(universe, true)
        self.pred_a = _encode(universe, pa)
        self.pred_b = _encode(universe, pb)
        self.n_classes = len(classes)
        if metric.startswith("f1:"):
            label = metric[3:]
            if label not in classes:
                raise ValueError(f"class {label!r} absent from cubes (have {classes})")
            self.class_index = classes.index(label)
        else:
            self.class_index = -1

    def seed_mean(self, preds: np.ndarray, true: np.ndarray | None = None) -> float:
        if true is None:
            true = self.true
        vals = []
        for s in range(preds.shape[0]):
            if self.metric in ("tumour_accuracy", "plane_accuracy"):
                vals.append(float((preds[s] == true).mean()))
                continue
            f1, support = _f1_per_class(true, preds[s], self.n_classes)
            if self.metric == "macro_f1":
                vals.append(float(f1.mean()))
            elif self.metric == "weighted_f1":
                vals.append(float((support / support.sum()) @ f1) if support.sum() else 0.0)
            else:
                vals.append(float(f1[self.class_index]))
        return float(np.mean(vals))

    def delta(self, pred_a: np.ndarray, pred_b: np.ndarray,
              true: np.ndarray | None = None) -> float:
        return self.seed_mean(pred_a, true) - self.seed_mean(pred_b, true)


def paired_permutation(cube_a: PredictionCube, cube_b: PredictionCube,
                       metric: str = "tumour_accuracy",
                       resamples: int = PERMUTATION_RESAMPLES,
                       rng_seed: int = 0) -> tuple[float, float]:
    """Observed seed-mean delta (A minus B) and the two-tailed swap p-value.

    Null model: each image independently swaps its A/B predictions across
    all seeds with probability 0.5.  p uses the add-one estimator
    (1 + #{|stat*| >= |stat|}) / (resamples + 1); ties count toward the tail.
    """
    _check_paired(cube_a, cube_b)
    n = cube_a.n_images
    swap = _rng(rng_seed, _PERM_STREAM).random((resamples, n)) < 0.5
    if _is_accuracy_metric(metric):
        c = (_correct_matrix(cube_a, metric) - _correct_matrix(cube_b, metric)).mean(axis=0)
        delta = float(np.ones(n) @ c) / n
        stats = (1.0 - 2.0 * swap) @ c / n
    else:
        pair = _EncodedPair(cube_a, cube_b, metric)
        delta = pair.delta(pair.pred_a, pair.pred_b)
        stats = np.empty(resamples)
        for r in range(resamples):
            mask = swap[r]
            pa = np.where(mask[None, :], pair.pred_b, pair.pred_a)
            pb = np.where(mask[None, :], pair.pred_a, pair.pred_b)
            stats[r] = pair.delta(pa, pb)
    exceed = int(np.count_nonzero(np.abs(stats) >= abs(delta) - _TIE_TOL))
    p = (1 + exceed) / (resamples + 1)
    return delta, float(p)


def bootstrap_ci(cube_a: PredictionCube, cube_b: PredictionCube,
                 metric: str = "tumour_accuracy",
                 resamples: int = BOOTSTRAP_RESAMPLES,
                 level: float = 0.95, rng_seed: int = 0) -> tuple[float, float]:
    """Percentile CI of the seed-mean delta under image resampling."""
    _check_paired(cube_a, cube_b)
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    n = cube_a.n_images
    draws = _rng(rng_seed, _BOOT_STREAM).integers(0, n, size=(resamples, n))
    if _is_accuracy_metric(metric):
        c = (_correct_matrix(cube_a, metric) - _correct_matrix(cube_b, metric)).mean(axis=0)
        stats = c[draws].mean(axis=1)
    else:
        pair = _EncodedPair(cube_a, cube_b, metric)
        stats = np.empty(resamples)
        for r in range(resamples):
            idx = draws[r]
            stats[r] = pair.delta(pair.pred_a[:, idx], pair.pred_b[:, idx],
                                  true=pair.true[idx])
    tail = 100.0 * (1.0 - level) / 2.0
    lo, hi = np.percentile(stats, [tail, 100.0 - tail])
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# multiple-comparison correction and binomial analyses

@dataclass(frozen=True)
class HolmEntry:
    p_raw: float
    p_adjusted: float
    reject: bool


def holm(p_values, alpha: float = HOLM_ALPHA) -> dict[str, HolmEntry]:
    """Step-down Holm adjustment over a labelled family."""
    items = list(p_values.items()) if isinstance(p_values, dict) else list(p_values)
    labels = [str(k) for k, _ in items]
    ps = np.asarray([p for _, p in items], dtype=np.float64)
    if len(labels) != len(set(labels)):
        raise ValueError("duplicate labels in p-value family")
    if ps.size and (np.min(ps) < 0 or np.max(ps) > 1):
        raise ValueError("p-values must lie in [0, 1]")
    order = np.argsort(ps, kind="stable")
    m = len(ps)
    scaled = (m - np.arange(m)) * ps[order]
    adjusted = np.minimum(1.0, np.maximum.accumulate(scaled))
    out: dict[str, HolmEntry] = {}
    for rank, idx in enumerate(order):
        out[labels[idx]] = HolmEntry(p_raw=float(ps[idx]),
                                     p_adjusted=float(adjusted[rank]),
                                     reject=bool(adjusted[rank] < alpha))
    return out


def wilson_ci(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # at the boundaries the interval endpoint is exactly the point estimate;
    # evaluate exactly rather than through the cancellation-prone formula
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


def binomial_test(successes: int, trials: int, p0: float = 0.5) -> float:
    """Exact two-sided binomial p: sum of outcomes no more likely than observed."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    if not 0 < p0 < 1:
        raise ValueError(f"p0 must be in (0, 1), got {p0}")
    k = np.arange(trials + 1)
    logpmf = binom.logpmf(k, trials, p0)
    keep = logpmf <= logpmf[successes] + 1e-9
    return float(min(1.0, np.exp(logpmf[keep]).sum()))


def _signed_sums(diffs: np.ndarray) -> np.ndarray:
    sums = np.zeros(1, dtype=np.float64)
    for v in diffs:
        sums = np.concatenate([sums + v, sums - v])
    return sums


def sign_flip_test(values_a, values_b) -> float:
    """Exact paired sign-flip test: two-sided p over all 2^n sign patterns."""
    a = np.asarray(values_a, dtype=np.float64)
    b = np.asarray(values_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"need equal-length 1-D samples, got {a.shape} and {b.shape}")
    n = a.size
    if n == 0:
        raise ValueError("empty samples")
    if n > SIGN_FLIP_MAX_N:
        raise ValueError(f"n={n} exceeds the exact-enumeration bound {SIGN_FLIP_MAX_N}")
    diffs = a - b
    if n <= 20:
        bits = (np.arange(2 ** n, dtype=np.int64)[:, None] >> np.arange(n)) & 1
        sums = (1.0 - 2.0 * bits) @ diffs
        observed = sums[0]  # index 0 is the all-plus (identity) pattern
        return float(np.count_nonzero(np.abs(sums) >= abs(observed)) / 2 ** n)
    # meet-in-the-middle for 20 < n <= 30
    n1 = n // 2
    s1 = _signed_sums(diffs[:n1])
    s2 = _signed_sums(diffs[n1:])
    t = abs(s1[0] + s2[0])
    if t == 0:
        return 1.0
    s2_sorted = np.sort(s2)
    count_ge = int((len(s2) - np.searchsorted(s2_sorted, t - s1, side="left")).sum())
    count_le = int(np.searchsorted(s2_sorted, -t - s1, side="right").sum())
    return float((count_ge + count_le) / 2 ** n)


# ---------------------------------------------------------------------------
# training-effort accounting

def batch_quota(batch_size: int, synth_per_real: float) -> tuple[int, int]:
    """(real, synthetic) images per batch for a 1:ratio condition.

    Real count is the ceiling split, e.g. batch 128 at 1:2 gives (43, 85).
    """
    if batch_size <= 0:
        raise ValueError("batch_size must be positive")
    if synth_per_real < 0:
        raise ValueError("ratio must be non-negative")
    real = math.ceil(batch_size / (1.0 + synth_per_real))
    return real, batch_size - real


def selected_effort(history: TrainingHistory, mode: str,
                    n_real_rows: int | None = None) -> float:
    """Training effort at the selected checkpoint.

    ``epoch`` returns the selected entry's step/epoch; ``real_epoch``
    returns cumulative real images consumed up to and including selection,
    divided by the real training-set size.
    """
    entry = history.entries[history.selected_index]
    if mode == "epoch":
        return float(entry.step)
    if mode == "real_epoch":
        if not n_real_rows or n_real_rows <= 0:
            raise ValueError("real_epoch mode requires n_real_rows > 0")
        upto = history.entries[: history.selected_index + 1]
        return float(sum(e.real_in_batch for e in upto)) / n_real_rows
    raise ValueError(f"unknown efficiency mode {mode!r}")


@dataclass(frozen=True)
class EffortSummary:
    per_seed: dict[int, float]
    mean: float
    sd: float


def efficiency_summary(histories: list[TrainingHistory], mode: str,
                       n_real_rows: int | None = None) -> EffortSummary:
    if not histories:
        raise ValueError("no training histories")
    seeds = [h.seed for h in histories]
    if len(seeds) != len(set(seeds)):
        raise ValueError("duplicate seeds in history set")
    per_seed = {h.seed: selected_effort(h, mode, n_real_rows) for h in histories}
    vals = np.array([per_seed[s] for s in sorted(per_seed)], dtype=np.float64)
    sd = float(vals.std(ddof=1)) if len(vals) >= 2 else 0.0
    return EffortSummary(per_seed=per_seed, mean=float(vals.mean()), sd=sd)


@dataclass(frozen=True)
class EfficiencyComparison:
    baseline: EffortSummary
    condition: EffortSummary
    reduction_pct: float
    p_sign_flip: float


def compare_efficiency(baseline: EffortSummary, condition: EffortSummary) -> EfficiencyComparison:
    if set(baseline.per_seed) != set(condition.per_seed):
        raise ValueError("baseline and condition cover different seeds")
    seeds = sorted(baseline.per_seed)
    base = [baseline.per_seed[s] for s in seeds]
    cond = [condition.per_seed[s] for s in seeds]
    reduction = 100.0 * (1.0 - condition.mean / baseline.mean) if baseline.mean else 0.0
    return EfficiencyComparison(baseline=baseline, condition=condition,
                                reduction_pct=reduction,
                                p_sign_flip=sign_flip_test(base, cond))


# ---------------------------------------------------------------------------
# seed stability and confusion summaries

def seed_stability(cube: PredictionCube) -> tuple[float, float]:
    """(mean, sample sd) of per-seed tumour accuracy; needs >= 2 seeds."""
    if cube.n_seeds < 2:
        raise ValueError("seed stability needs at least 2 seeds")
    acc = (cube.pred_class == cube.true_class[None, :]).mean(axis=1)
    return float(acc.mean()), float(acc.std(ddof=1))


@dataclass(frozen=True)
class ConfusionSummary:
    classes: tuple[str, ...]
    mean_pct: np.ndarray      # (C, C) row-normalized percentages
    half_ci_pct: np.ndarray   # (C, C) half-width of the 95% normal CI
    empty_rows: tuple[str, ...]


def confusion(cube: PredictionCube, classes: list[str] | None = None,
              level: float = 0.95) -> ConfusionSummary:
    """Seed-averaged row-normalized confusion with per-cell half-CIs."""
    if classes is None:
        classes = sorted(set(cube.true_class.tolist()) | set(cube.pred_class.ravel().tolist()))
    universe = np.asarray(classes)
    c = len(classes)
    t_enc = _encode(universe, cube.true_class)
    per_seed = np.zeros((cube.n_seeds, c, c), dtype=np.float64)
    empty: list[str] = []
    support = np.bincount(t_enc, minlength=c)
    for label, count in zip(classes, support):
        if count == 0:
            empty.append(label)
    for s in range(cube.n_seeds):
        p_enc = _encode(universe, cube.pred_class[s])
        conf = np.bincount(t_enc * c + p_enc, minlength=c * c).reshape(c, c).astype(np.float64)
        rows = conf.sum(axis=1, keepdims=True)
        rows[rows == 0] = 1.0  # flagged empty rows stay all-zero
        per_seed[s] = 100.0 * conf / rows
    mean = per_seed.mean(axis=0)
    if cube.n_seeds >= 2:
        z = NormalDist().inv_cdf(0.5 + level / 2.0)
        half = z * per_seed.std(axis=0, ddof=1) / math.sqrt(cube.n_seeds)
    else:
        half = np.zeros_like(mean)
    return ConfusionSummary(classes=tuple(classes), mean_pct=mean,
                            half_ci_pct=half, empty_rows=tuple(empty))


# ---------------------------------------------------------------------------
# gated VLM audit statistics

@dataclass(frozen=True)
class VlmAuditRow:
    image_id: str
    true_class: str
    pred_class: str
    true_plane: str
    pred_plane: str
    true_source: str
    pred_source: str


@dataclass(frozen=True)
class GatedAuditStats:
    n_images: int
    class_gate_accuracy: float
    plane_gate_accuracy: float
    n_gated: int
    gated_correct: int
    gated_accuracy: float
    wilson_low: float
    wilson_high: float
    binomial_p: float
    per_class_gated: dict[str, tuple[int, int, float]]  # class -> (correct, gated, accuracy)


VLM_AUDIT_HEADER = "image_id,true_class,pred_class,true_plane,pred_plane,true_source,pred_source"


def read_vlm_audit_csv(path) -> list[VlmAuditRow]:
    from .errors import DataError
    with open(path, "rb") as fh:
        lines = fh.read().decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != VLM_AUDIT_HEADER:
        raise DataError(f"{path}: line 1: expected header {VLM_AUDIT_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 7:
            raise DataError(f"{path}: line {lineno}: expected 7 fields, got {len(fields)}")
        rows.append(VlmAuditRow(*fields))
    return rows


def gated_vlm_stats(rows: list[VlmAuditRow], level: float = 0.95,
                    p0: float = 0.5) -> GatedAuditStats:
    """Source-discrimination statistics on the content-gated subset.

    Only rows whose tumour class and plane were both predicted correctly
    enter the real-versus-synthetic analysis.
    """
    if not rows:
        raise ValueError("no audit rows")
    n = len(rows)
    class_ok = sum(r.pred_class == r.true_class for r in rows)
    plane_ok = sum(r.pred_plane == r.true_plane for r in rows)
    gated = [r for r in rows if r.pred_class == r.true_class and r.pred_plane == r.true_plane]
    if not gated:
        raise ValueError("no rows pass both content gates")
    correct = sum(r.pred_source == r.true_source for r in gated)
    lo, hi = wilson_ci(correct, len(gated), level)
    per_class: dict[str, tuple[int, int, float]] = {}
    for label in sorted({r.true_class for r in gated}):
        sub = [r for r in gated if r.true_class == label]
        ok = sum(r.pred_source == r.true_source for r in sub)
        per_class[label] = (ok, len(sub), ok / len(sub))
    return GatedAuditStats(
        n_images=n,
        class_gate_accuracy=class_ok / n,
        plane_gate_accuracy=plane_ok / n,
        n_gated=len(gated),
        gated_correct=correct,
        gated_accuracy=correct / len(gated),
        wilson_low=lo,
        wilson_high=hi,
        binomial_p=binomial_test(correct, len(gated), p0),
        per_class_gated=per_class,
    )


# ---------------------------------------------------------------------------
# paired comparison assembly (Table-III-style reporting, percent units)

@dataclass(frozen=True)
class PairedTestResult:
    classifier: str
    condition: str
    metric: str
    delta_pp: float
    ci_low_pp: float
    ci_high_pp: float
    p_raw: float
    p_holm: float
    significant: bool


def compare_conditions(baseline: PredictionCube,
                       conditions: dict[str, PredictionCube],
                       metric_names=DEFAULT_METRICS,
                       resamples: int = PERMUTATION_RESAMPLES,
                       bootstrap_resamples: int = BOOTSTRAP_RESAMPLES,
                       level: float = 0.95,
                       alpha: float = HOLM_ALPHA,
                       rng_seed: int = 0,
                       classifier: str = "") -> list[PairedTestResult]:
    """Each condition against the baseline, Holm-corrected over the family."""
    partial: list[dict] = []
    for i, (label, cube) in enumerate(sorted(conditions.items())):
        for j, metric in enumerate(metric_names):
            if metric == "plane_accuracy" and (cube.pred_plane is None or baseline.pred_plane is None):
                continue
            row_seed = rng_seed + 1000 * i + j
            delta, p = paired_permutation(cube, baseline, metric, resamples, row_seed)
            lo, hi = bootstrap_ci(cube, baseline, metric, bootstrap_resamples, level, row_seed)
            partial.append(dict(condition=label, metric=metric, delta=delta,
                                lo=lo, hi=hi, p=p))
    family = {f"{r['condition']}|{r['metric']}": r["p"] for r in partial}
    corrected = holm(family, alpha=alpha)
    results = []
    for r in partial:
        entry = corrected[f"{r['condition']}|{r['metric']}"]
        results.append(PairedTestResult(
            classifier=classifier, condition=r["condition"], metric=r["metric"],
            delta_pp=100.0 * r["delta"], ci_low_pp=100.0 * r["lo"], ci_high_pp=100.0 * r["hi"],
            p_raw=r["p"], p_holm=entry.p_adjusted, significant=entry.reject))
    return results


EVAL_CSV_HEADER = "classifier,condition,delta_pp,ci_low,ci_high,p_raw,p_holm,significant"
EVAL_FULL_CSV_HEADER = "classifier,condition,metric,delta_pp,ci_low,ci_high,p_raw,p_holm,significant"


def write_eval_csv(results: list[PairedTestResult], path, primary_only: bool = True) -> None:
    """Table-III-mirror CSV (primary tumour-accuracy rows) or the full family."""
    if primary_only:
        lines = [EVAL_CSV_HEADER]
        rows = [r for r in results if r.metric == "tumour_accuracy"]
    else:
        lines = [EVAL_FULL_CSV_HEADER]
        rows = results
    for r in rows:
        cells = [r.classifier, r.condition]
        if not primary_only:
            cells.append(r.metric)
        cells += [f"{r.delta_pp:.6g}", f"{r.ci_low_pp:.6g}", f"{r.ci_high_pp:.6g}",
                  f"{r.p_raw:.6g}", f"{r.p_holm:.6g}", str(int(r.significant))]
        lines.append(",".join(cells))
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("utf-8"))
