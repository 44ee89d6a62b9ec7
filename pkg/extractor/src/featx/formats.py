"""Wire formats shared with the pipeline: manifest CSV in, FEAT1 out.

Both are reimplemented from their byte-level definitions so this sidecar
has no code dependency on the consuming pipeline.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

MANIFEST_HEADER = "id,path,split,source,class,plane"
FEAT_MAGIC = "FEAT1"


@dataclass(frozen=True)
class ManifestRow:
    id: str
    path: str


def read_manifest(path: str | os.PathLike) -> list[ManifestRow]:
    """Rows of a manifest CSV, in file (id-sorted) order."""
    with open(path, "rb") as fh:
        lines = fh.read().decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MANIFEST_HEADER:
        raise ValueError(f"{path}: line 1: expected header {MANIFEST_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 6:
            raise ValueError(f"{path}: line {lineno}: expected 6 fields, got {len(fields)}")
        rows.append(ManifestRow(id=fields[0], path=fields[1]))
    return rows


def write_feat1(ids: list[str], data: np.ndarray, feature: str,
                path: str | os.PathLike) -> None:
    """One JSON header line + row-major little-endian float32 payload."""
    data = np.ascontiguousarray(data, dtype="<f4")
    if data.ndim != 2 or data.shape[0] != len(ids):
        raise ValueError(f"data shape {data.shape} does not match {len(ids)} ids")
    if data.size and not np.all(np.isfinite(data)):
        raise ValueError("non-finite feature values")
    header = {
        "magic": FEAT_MAGIC,
        "n": int(data.shape[0]),
        "d": int(data.shape[1]),
        "dtype": "f32le",
        "feature": feature,
        "ids": list(ids),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        fh.write(data.tobytes(order="C"))
