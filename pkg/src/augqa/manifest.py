"""Image manifests: the ordered record collections every stage consumes.

A manifest is a plain CSV with the fixed header ``id,path,split,source,
class,plane``.  Fields are never quoted, so ids and paths must not contain
commas.  Records are kept sorted by id (bytewise) so that every downstream
iteration order is deterministic regardless of filesystem enumeration.
"""
from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DataError

MANIFEST_HEADER = "id,path,split,source,class,plane"

SPLITS = ("train", "test")
SOURCES = ("real", "synthetic")
CLASSES = ("glioma", "meningioma", "no_tumour", "pituitary")
PLANES = ("axial", "coronal", "sagittal")


@dataclass(frozen=True)
class ImageRecord:
    """One labelled image. ``tumour_class`` maps to the CSV ``class`` column."""

    id: str
    path: str
    split: str
    source: str
    tumour_class: str
    plane: str

    def stratum(self) -> tuple[str, str]:
        return (self.tumour_class, self.plane)


def _validate_record(rec: ImageRecord, where: str = "") -> None:
    ctx = f" ({where})" if where else ""
    if rec.split not in SPLITS:
        raise DataError(f"unknown split {rec.split!r}{ctx}; expected one of {SPLITS}")
    if rec.source not in SOURCES:
        raise DataError(f"unknown source {rec.source!r}{ctx}; expected one of {SOURCES}")
    if rec.tumour_class not in CLASSES:
        raise DataError(f"unknown class {rec.tumour_class!r}{ctx}; expected one of {CLASSES}")
    if rec.plane not in PLANES:
        raise DataError(f"unknown plane {rec.plane!r}{ctx}; expected one of {PLANES}")
    for field in (rec.id, rec.path):
        if "," in field or "\n" in field or "\r" in field:
            raise DataError(f"field {field!r} contains a comma or newline{ctx}")
    if not rec.id:
        raise DataError(f"empty id{ctx}")


@dataclass(frozen=True)
class Manifest:
    """Ordered, id-sorted collection of :class:`ImageRecord`.

    Build through :func:`build_manifest` or :func:`load_manifest`; both
    enforce sorting and id uniqueness.
    """

    records: tuple[ImageRecord, ...]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ImageRecord]:
        return iter(self.records)

    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.records)

    def by_id(self) -> dict[str, ImageRecord]:
        return {r.id: r for r in self.records}


def build_manifest(records: Iterable[ImageRecord], provenance: str = "") -> Manifest:
    recs = sorted(records, key=lambda r: r.id)
    dupes = [rid for rid, cnt in Counter(r.id for r in recs).items() if cnt > 1]
    if dupes:
        raise DataError(f"duplicate ids in manifest: {sorted(dupes)}")
    for rec in recs:
        _validate_record(rec, where=f"id={rec.id!r}")
    return Manifest(records=tuple(recs), provenance=provenance)


def load_manifest(path: str | os.PathLike, provenance: str = "") -> Manifest:
    """Parse a manifest CSV. Raises :class:`DataError` with a line number."""
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DataError(f"{path}: line 1: empty file, expected header {MANIFEST_HEADER!r}")
    if lines[0] != MANIFEST_HEADER:
        raise DataError(f"{path}: line 1: bad header {lines[0]!r}, expected {MANIFEST_HEADER!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 6:
            raise DataError(f"{path}: line {lineno}: expected 6 fields, got {len(fields)}")
        rec = ImageRecord(
            id=fields[0], path=fields[1], split=fields[2],
            source=fields[3], tumour_class=fields[4], plane=fields[5],
        )
        try:
            _validate_record(rec)
        except DataError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
        records.append(rec)
    dupes = sorted(rid for rid, cnt in Counter(r.id for r in records).items() if cnt > 1)
    if dupes:
        raise DataError(f"{path}: duplicate ids: {dupes}")
    records.sort(key=lambda r: r.id)
    return Manifest(records=tuple(records), provenance=provenance)


def write_manifest(manifest: Manifest, path: str | os.PathLike) -> None:
    """Write the canonical CSV form (LF endings, trailing newline)."""
    rows = [MANIFEST_HEADER]
    for r in manifest.records:
        rows.append(f"{r.id},{r.path},{r.split},{r.source},{r.tumour_class},{r.plane}")
    with open(path, "wb") as fh:
        fh.write(("\n".join(rows) + "\n").encode("utf-8"))


def stratum_counts(manifest: Manifest) -> dict[tuple[str, str], int]:
    """Record counts per (class, plane) stratum; absent strata are omitted."""
    counts: Counter[tuple[str, str]] = Counter()
    for rec in manifest.records:
        counts[rec.stratum()] += 1
    return dict(counts)


def split_by_stratum(manifest: Manifest) -> dict[tuple[str, str], list[ImageRecord]]:
    out: dict[tuple[str, str], list[ImageRecord]] = {}
    for rec in manifest.records:
        out.setdefault(rec.stratum(), []).append(rec)
    return out
