"""Prediction cubes and training histories.

A prediction cube stores per-condition predictions indexed by (seed, test
image); it is the unit handed to every paired statistic.  On disk it is a
CSV with header ``condition,seed,image_id,true_class,pred_class,true_plane,
pred_plane`` where the plane columns may be empty.

Training histories are JSON-lines files, one record per step/epoch with
keys ``step,val_loss,val_tumour_acc,real_in_batch,batch_size``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError

CUBE_HEADER = "condition,seed,image_id,true_class,pred_class,true_plane,pred_plane"


@dataclass(frozen=True)
class PredictionCube:
    condition: str
    seeds: tuple[int, ...]
    image_ids: tuple[str, ...]
    true_class: np.ndarray          # (n_images,) str
    true_plane: np.ndarray | None   # (n_images,) str or None
    pred_class: np.ndarray          # (n_seeds, n_images) str
    pred_plane: np.ndarray | None   # (n_seeds, n_images) str or None

    @property
    def n_seeds(self) -> int:
        return len(self.seeds)

    @property
    def n_images(self) -> int:
        return len(self.image_ids)

    def seed_row(self, seed: int) -> int:
        try:
            return self.seeds.index(seed)
        except ValueError:
            raise ValueError(f"seed {seed} not in cube {self.condition!r} (seeds {self.seeds})") from None


def make_cube(condition, seeds, image_ids, true_class, pred_class,
              true_plane=None, pred_plane=None) -> PredictionCube:
    """Assemble and validate a cube from array-likes (rows ordered by input)."""
    seeds = tuple(int(s) for s in seeds)
    image_ids = tuple(image_ids)
    tc = np.asarray(true_class, dtype=str)
    pc = np.asarray(pred_class, dtype=str)
    if pc.shape != (len(seeds), len(image_ids)):
        raise ValueError(f"pred_class shape {pc.shape} != (n_seeds={len(seeds)}, n_images={len(image_ids)})")
    if tc.shape != (len(image_ids),):
        raise ValueError(f"true_class shape {tc.shape} != ({len(image_ids)},)")
    tp = None if true_plane is None else np.asarray(true_plane, dtype=str)
    pp = None if pred_plane is None else np.asarray(pred_plane, dtype=str)
    if (tp is None) != (pp is None):
        raise ValueError("true_plane and pred_plane must be supplied together")
    if pp is not None and pp.shape != pc.shape:
        raise ValueError(f"pred_plane shape {pp.shape} != pred_class shape {pc.shape}")
    return PredictionCube(condition=str(condition), seeds=seeds, image_ids=image_ids,
                          true_class=tc, true_plane=tp, pred_class=pc, pred_plane=pp)


def load_prediction_cubes(path: str | os.PathLike) -> dict[str, PredictionCube]:
    """Load every condition in a cube CSV, validating grid completeness."""
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != CUBE_HEADER:
        raise DataError(f"{path}: line 1: expected header {CUBE_HEADER!r}")
    # condition -> {(seed, image_id): (true_class, pred_class, true_plane, pred_plane)}
    cells: dict[str, dict[tuple[int, str], tuple[str, str, str, str]]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 7:
            raise DataError(f"{path}: line {lineno}: expected 7 fields, got {len(fields)}")
        cond, seed_s, img, tc, pc, tp, pp = fields
        try:
            seed = int(seed_s)
        except ValueError:
            raise DataError(f"{path}: line {lineno}: bad seed {seed_s!r}") from None
        key = (seed, img)
        bucket = cells.setdefault(cond, {})
        if key in bucket:
            raise DataError(f"{path}: line {lineno}: duplicate cell for seed={seed} image={img!r}")
        bucket[key] = (tc, pc, tp, pp)
    cubes: dict[str, PredictionCube] = {}
    for cond, bucket in cells.items():
        seeds = tuple(sorted({k[0] for k in bucket}))
        image_ids = tuple(sorted({k[1] for k in bucket}))
        if len(bucket) != len(seeds) * len(image_ids):
            raise DataError(
                f"{path}: condition {cond!r} has {len(bucket)} cells, "
                f"expected complete {len(seeds)}x{len(image_ids)} grid")
        has_plane = any(v[2] != "" or v[3] != "" for v in bucket.values())
        tc = np.empty(len(image_ids), dtype=object)
        tp = np.empty(len(image_ids), dtype=object) if has_plane else None
        pc = np.empty((len(seeds), len(image_ids)), dtype=object)
        pp = np.empty_like(pc) if has_plane else None
        for si, seed in enumerate(seeds):
            for ii, img in enumerate(image_ids):
                if (seed, img) not in bucket:
                    raise DataError(f"{path}: condition {cond!r} missing cell seed={seed} image={img!r}")
                t_c, p_c, t_p, p_p = bucket[(seed, img)]
                if si == 0:
                    tc[ii] = t_c
                    if has_plane:
                        tp[ii] = t_p
                elif tc[ii] != t_c or (has_plane and tp[ii] != t_p):
                    raise DataError(f"{path}: condition {cond!r} image {img!r}: inconsistent true labels across seeds")
                pc[si, ii] = p_c
                if has_plane:
                    pp[si, ii] = p_p
        cubes[cond] = make_cube(cond, seeds, image_ids,
                                tc.astype(str), pc.astype(str),
                                None if tp is None else tp.astype(str),
                                None if pp is None else pp.astype(str))
    return cubes


def load_prediction_cube(path: str | os.PathLike, condition: str | None = None) -> PredictionCube:
    cubes = load_prediction_cubes(path)
    if condition is not None:
        if condition not in cubes:
            raise DataError(f"{path}: no condition {condition!r}; found {sorted(cubes)}")
        return cubes[condition]
    if len(cubes) != 1:
        raise DataError(f"{path}: expected a single condition, found {sorted(cubes)}")
    return next(iter(cubes.values()))


def write_prediction_cube(cube: PredictionCube, path: str | os.PathLike) -> None:
    rows = [CUBE_HEADER]
    for si, seed in enumerate(cube.seeds):
        for ii, img in enumerate(cube.image_ids):
            tp = cube.true_plane[ii] if cube.true_plane is not None else ""
            pp = cube.pred_plane[si, ii] if cube.pred_plane is not None else ""
            rows.append(f"{cube.condition},{seed},{img},{cube.true_class[ii]},"
                        f"{cube.pred_class[si, ii]},{tp},{pp}")
    with open(path, "wb") as fh:
        fh.write(("\n".join(rows) + "\n").encode("utf-8"))


HISTORY_KEYS = ("step", "val_loss", "val_tumour_acc", "real_in_batch", "batch_size")


@dataclass(frozen=True)
class HistoryEntry:
    step: int
    val_loss: float
    val_tumour_acc: float
    real_in_batch: int
    batch_size: int


@dataclass(frozen=True)
class TrainingHistory:
    model: str
    condition: str
    seed: int
    entries: tuple[HistoryEntry, ...]
    selected_index: int


def load_training_history(path: str | os.PathLike, model: str = "",
                          condition: str = "", seed: int = 0) -> TrainingHistory:
    """Parse a history JSONL; selected_index = earliest minimum val_loss."""
    entries = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: bad JSON: {exc}") from None
            missing = [k for k in HISTORY_KEYS if k not in obj]
            if missing:
                raise DataError(f"{path}: line {lineno}: missing fields {missing}")
            entries.append(HistoryEntry(
                step=int(obj["step"]), val_loss=float(obj["val_loss"]),
                val_tumour_acc=float(obj["val_tumour_acc"]),
                real_in_batch=int(obj["real_in_batch"]), batch_size=int(obj["batch_size"]),
            ))
    if not entries:
        raise DataError(f"{path}: empty training history")
    losses = [e.val_loss for e in entries]
    selected = int(np.argmin(losses))  # argmin returns the earliest minimum
    return TrainingHistory(model=model, condition=condition, seed=seed,
                           entries=tuple(entries), selected_index=selected)
