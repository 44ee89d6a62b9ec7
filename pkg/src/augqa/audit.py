"""Train/test integrity audit.

Five exact-evidence channels (filepath, basename, file SHA-256, decoded
pixel SHA-256, exact array equality) plus two flag-only near-duplicate
channels: perceptual-hash Hamming distance and InceptionV3 feature cosine
distance.  Only pixel-exact evidence ever drives removal; everything else
is diagnostic.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .features import FeatureMatrix, cosine_distance_matrix
from .manifest import Manifest, build_manifest
from .phash import hamming_matrix, phash
from .preprocess import load_image

PHASH_MAX_DISTANCE = 6
COSINE_THRESHOLD = 0.01

EVIDENCE_CHANNELS = ("path", "basename", "sha256", "pixel_exact", "pixel_hash")


@dataclass(frozen=True)
class DuplicatePair:
    train_id: str
    test_id: str
    evidence: str  # one of EVIDENCE_CHANNELS


@dataclass(frozen=True)
class NeighbourPair:
    train_id: str
    test_id: str
    value: float  # Hamming distance (pHash) or cosine distance (features)


@dataclass(frozen=True)
class RecordIssue:
    record_id: str
    path: str
    message: str


@dataclass
class AuditReport:
    exact_duplicates: list[DuplicatePair] = field(default_factory=list)
    phash_neighbours: list[NeighbourPair] = field(default_factory=list)
    feature_neighbours: list[NeighbourPair] = field(default_factory=list)
    removed: list[str] = field(default_factory=list)
    removed_breakdown: dict[str, int] = field(default_factory=dict)
    errors: list[RecordIssue] = field(default_factory=list)

    def has_exact_overlap(self) -> bool:
        return bool(self.exact_duplicates)

    def to_json(self) -> str:
        doc = {
            "exact_duplicates": [
                {"train_id": p.train_id, "test_id": p.test_id, "evidence": p.evidence}
                for p in self.exact_duplicates],
            "phash_neighbours": [
                {"train_id": p.train_id, "test_id": p.test_id, "hamming": int(p.value)}
                for p in self.phash_neighbours],
            "feature_neighbours": [
                {"train_id": p.train_id, "test_id": p.test_id, "cosine_distance": p.value}
                for p in self.feature_neighbours],
            "removed": self.removed,
            "removed_breakdown": self.removed_breakdown,
            "errors": [
                {"id": e.record_id, "path": e.path, "message": e.message}
                for e in self.errors],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


@dataclass
class _Fingerprint:
    record_id: str
    path: str
    basename: str
    file_sha256: str | None = None
    pixel_sha256: str | None = None
    phash: int | None = None


def _fingerprint(record, base_dir, report: AuditReport,
                 include_dc_in_median: bool) -> _Fingerprint:
    path = record.path if os.path.isabs(record.path) or base_dir is None \
        else os.path.join(base_dir, record.path)
    fp = _Fingerprint(record_id=record.id, path=path, basename=os.path.basename(record.path))
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        fp.file_sha256 = hashlib.sha256(raw).hexdigest()
        pixels = load_image(path)
        fp.pixel_sha256 = hashlib.sha256(pixels.tobytes()).hexdigest()
        fp.phash = phash(pixels, include_dc_in_median=include_dc_in_median)
    except (OSError, ValueError) as exc:
        report.errors.append(RecordIssue(record_id=record.id, path=record.path, message=str(exc)))
    return fp


def _match_channel(train_fps, test_fps, key, evidence, report):
    index: dict[str, list[_Fingerprint]] = {}
    for fp in test_fps:
        val = getattr(fp, key)
        if val is not None:
            index.setdefault(val, []).append(fp)
    pairs = []
    for fp in train_fps:
        val = getattr(fp, key)
        if val is None:
            continue
        for other in index.get(val, ()):
            pairs.append((fp, other))
            report.exact_duplicates.append(
                DuplicatePair(train_id=fp.record_id, test_id=other.record_id, evidence=evidence))
    return pairs


def audit(train: Manifest, test: Manifest,
          train_features: FeatureMatrix | None = None,
          test_features: FeatureMatrix | None = None,
          base_dir: str | None = None,
          test_base_dir: str | None = None,
          phash_max_distance: int = PHASH_MAX_DISTANCE,
          cosine_threshold: float = COSINE_THRESHOLD,
          include_dc_in_median: bool = True) -> AuditReport:
    """Exhaustive overlap audit between a train and a test manifest.

    Relative record paths resolve against ``base_dir`` (train side) and
    ``test_base_dir`` (test side, defaulting to ``base_dir``).
    """
    if test_base_dir is None:
        test_base_dir = base_dir
    report = AuditReport()
    train_fps = [_fingerprint(r, base_dir, report, include_dc_in_median) for r in train]
    test_fps = [_fingerprint(r, test_base_dir, report, include_dc_in_median) for r in test]

    _match_channel(train_fps, test_fps, "path", "path", report)
    _match_channel(train_fps, test_fps, "basename", "basename", report)
    _match_channel(train_fps, test_fps, "file_sha256", "sha256", report)
    hash_pairs = _match_channel(train_fps, test_fps, "pixel_sha256", "pixel_hash", report)

    # pixel-hash candidates confirmed by exact array equality
    confirmed: set[str] = set()
    for fp_train, fp_test in hash_pairs:
        a = load_image(fp_train.path)
        b = load_image(fp_test.path)
        if a.shape == b.shape and np.array_equal(a, b):
            report.exact_duplicates.append(DuplicatePair(
                train_id=fp_train.record_id, test_id=fp_test.record_id, evidence="pixel_exact"))
            confirmed.add(fp_train.record_id)

    # near-duplicate flags: pHash within the Hamming threshold
    t_ok = [fp for fp in train_fps if fp.phash is not None]
    s_ok = [fp for fp in test_fps if fp.phash is not None]
    if t_ok and s_ok:
        dist = hamming_matrix([fp.phash for fp in t_ok], [fp.phash for fp in s_ok])
        for i, j in zip(*np.nonzero(dist <= phash_max_distance)):
            report.phash_neighbours.append(NeighbourPair(
                train_id=t_ok[i].record_id, test_id=s_ok[j].record_id, value=float(dist[i, j])))

    # near-duplicate flags: feature cosine distance below the threshold
    if train_features is not None and test_features is not None:
        tr_index = train_features.row_index()
        te_index = test_features.row_index()
        tr_ids = [r.id for r in train if r.id in tr_index]
        te_ids = [r.id for r in test if r.id in te_index]
        if tr_ids and te_ids:
            d = cosine_distance_matrix(
                train_features.data[[tr_index[i] for i in tr_ids]],
                test_features.data[[te_index[i] for i in te_ids]])
            for i, j in zip(*np.nonzero(d < cosine_threshold)):
                report.feature_neighbours.append(NeighbourPair(
                    train_id=tr_ids[i], test_id=te_ids[j], value=float(d[i, j])))

    by_id = train.by_id()
    report.removed = sorted(confirmed)
    breakdown: dict[str, int] = {}
    for rid in report.removed:
        rec = by_id[rid]
        key = f"{rec.tumour_class}/{rec.plane}"
        breakdown[key] = breakdown.get(key, 0) + 1
    report.removed_breakdown = breakdown
    return report


def remove_duplicates(train: Manifest, report: AuditReport) -> Manifest:
    """Drop the pixel-exact-confirmed train records named by the report."""
    by_id = train.by_id()
    missing = [rid for rid in report.removed if rid not in by_id]
    if missing:
        raise DataError(f"removal ids absent from manifest: {missing}")
    doomed = set(report.removed)
    kept = [r for r in train if r.id not in doomed]
    return build_manifest(kept, provenance=train.provenance)
