"""Feature matrices and the FEAT1 on-disk container.

FEAT1 layout: one JSON header line terminated by a single LF, then exactly
``4 * n * d`` bytes of row-major little-endian float32.  The header repeats
``n`` and ``d`` redundantly with the id list and payload length, and both
are checked on load.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError

FEAT_MAGIC = "FEAT1"


@dataclass(frozen=True)
class FeatureMatrix:
    """n x d float32 embedding matrix with row-aligned ids."""

    ids: tuple[str, ...]
    data: np.ndarray
    feature: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        object.__setattr__(self, "data", arr)
        if arr.ndim != 2:
            raise ValueError(f"feature data must be 2-D, got shape {arr.shape}")
        if len(self.ids) != arr.shape[0]:
            raise ValueError(f"{len(self.ids)} ids for {arr.shape[0]} rows")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def row_index(self) -> dict[str, int]:
        return {rid: i for i, rid in enumerate(self.ids)}

    def subset(self, ids: list[str] | tuple[str, ...]) -> "FeatureMatrix":
        """Rows for the given ids, in the given order."""
        index = self.row_index()
        missing = [i for i in ids if i not in index]
        if missing:
            raise DataError(f"feature matrix missing rows for ids: {missing[:10]}")
        rows = np.array([index[i] for i in ids], dtype=np.intp)
        return FeatureMatrix(ids=tuple(ids), data=self.data[rows], feature=self.feature)


def write_feature_matrix(matrix: FeatureMatrix, path: str | os.PathLike) -> None:
    if matrix.dim <= 0:
        raise ValueError(f"dim must be positive, got {matrix.dim}")
    if matrix.data.size and not np.all(np.isfinite(matrix.data)):
        bad = int(np.argwhere(~np.isfinite(matrix.data).all(axis=1))[0, 0])
        raise ValueError(f"non-finite feature value in row {bad}")
    header = {
        "magic": FEAT_MAGIC,
        "n": matrix.n,
        "d": matrix.dim,
        "dtype": "f32le",
        "feature": matrix.feature,
        "ids": list(matrix.ids),
    }
    payload = np.ascontiguousarray(matrix.data, dtype="<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def load_feature_matrix(path: str | os.PathLike) -> FeatureMatrix:
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise DataError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: unparseable header: {exc}") from None
    if header.get("magic") != FEAT_MAGIC:
        raise DataError(f"{path}: magic/version mismatch: {header.get('magic')!r}")
    if header.get("dtype") != "f32le":
        raise DataError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    n, d = header.get("n"), header.get("d")
    if not isinstance(n, int) or not isinstance(d, int) or n < 0 or d <= 0:
        raise DataError(f"{path}: bad dimensions n={n!r} d={d!r}")
    ids = header.get("ids")
    if not isinstance(ids, list) or len(ids) != n:
        raise DataError(f"{path}: header declares n={n} but lists {len(ids or [])} ids")
    payload = raw[nl + 1:]
    expected = 4 * n * d
    if len(payload) != expected:
        raise DataError(f"{path}: payload is {len(payload)} bytes, header implies {expected}")
    data = np.frombuffer(payload, dtype="<f4").reshape(n, d).copy()
    if data.size:
        finite_rows = np.isfinite(data).all(axis=1)
        if not finite_rows.all():
            bad = int(np.argmin(finite_rows))
            raise DataError(f"{path}: non-finite value in row {bad} (id {ids[bad]!r})")
    feature = header.get("feature", "")
    if "pool3" in feature and d != 2048:
        raise DataError(f"{path}: feature {feature!r} requires d=2048, header says {d}")
    return FeatureMatrix(ids=tuple(ids), data=data, feature=feature)


def cosine_distance_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """1 - cosine similarity between rows of ``a`` and rows of ``b``.

    Accumulates in float64; rows with zero norm yield distance 1.
    """
    a64 = np.asarray(a, dtype=np.float64)
    b64 = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a64, axis=1)
    nb = np.linalg.norm(b64, axis=1)
    na[na == 0] = 1.0
    nb[nb == 0] = 1.0
    sim = (a64 / na[:, None]) @ (b64 / nb[:, None]).T
    return 1.0 - sim
