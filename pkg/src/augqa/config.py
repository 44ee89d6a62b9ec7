"""Run configuration: one flat TOML file, flag overrides, env overrides.

Every default matches the published protocol value where one exists
(seed 42, pHash threshold 6, blank-gate thresholds 30 / 0.08, pool
multiplier 2.5, Mahalanobis quantile 0.975, KID 100 subsets of at most
1,000, 5,000 permutation resamples, Holm alpha 0.05).  A digest of the
resolved configuration is embedded in every artifact's provenance.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "AUGQA_"


@dataclass(frozen=True)
class RunConfig:
    rng_seed: int = 42
    threads: int = 0                      # 0 = auto
    output_size: int = 128
    closing_iterations: tuple[int, ...] = (6, 6, 6, 6, 6)
    phash_max_distance: int = 6
    include_dc_in_median: bool = True
    gate_mean_threshold: float = 30.0
    gate_nonzero_threshold: float = 0.08
    pool_multiplier: float = 2.5
    filter_quantile: float = 0.975
    pca_max_components: int = 200
    selection_metric: str = "euclidean"
    cosine_threshold: float = 0.01
    kid_subsets: int = 100
    kid_subset_max: int = 1000
    knn_neighbours: int = 3
    score_tie_margin: float = 0.005
    permutation_resamples: int = 5000
    bootstrap_resamples: int = 5000
    holm_alpha: float = 0.05
    ci_level: float = 0.95

    def digest(self) -> str:
        doc = dataclasses.asdict(self)
        doc["closing_iterations"] = list(self.closing_iterations)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value):
    default = getattr(RunConfig(), name)
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        if str(value).lower() in ("1", "true", "yes"):
            return True
        if str(value).lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"config key {name!r}: cannot parse boolean from {value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    if isinstance(default, tuple):
        if isinstance(value, str):
            value = [v for v in value.split(",") if v != ""]
        return tuple(int(v) for v in value)
    return str(value)


def load_config(path: str | os.PathLike | None = None,
                overrides: dict | None = None,
                env: dict | None = None) -> RunConfig:
    """Defaults <- TOML file <- environment (AUGQA_*) <- explicit overrides."""
    values: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
        for key, val in doc.items():
            if key not in _FIELDS:
                raise ValueError(f"unknown config key {key!r} in {path}")
            values[key] = _coerce(key, val)
    env = os.environ if env is None else env
    for key in _FIELDS:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = _coerce(key, env[env_key])
    for key, val in (overrides or {}).items():
        if key not in _FIELDS:
            raise ValueError(f"unknown config override {key!r}")
        if val is not None:
            values[key] = _coerce(key, val)
    return RunConfig(**values)
