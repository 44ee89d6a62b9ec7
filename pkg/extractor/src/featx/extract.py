"""InceptionV3 pool3 embedding extraction.

Images are read as 8-bit grayscale or RGB, grayscale replicated to three
channels, bilinearly resized to 299x299, normalized, and pushed through an
InceptionV3 backbone whose classifier head is replaced by identity, so the
network output is the 2048-d global-average-pool (pool3) descriptor.

Weights come from a state-dict file pinned by SHA-256 in the config; when
no file is given, a seeded random initialization provides a reproducible
offline stand-in (descriptor geometry is then meaningless for quality
metrics, but every contract downstream of the wire format still holds).
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image
from torchvision.models import inception_v3

from .formats import ManifestRow, read_manifest, write_feat1

POOL3_DIM = 2048

# two common conventions; recorded in the FEAT1 feature name
NORMALIZATIONS = {
    "imagenet": ((0.485, 0.456, 0.406), (0.229, 0.224, 0.225)),
    "tf": ((0.5, 0.5, 0.5), (0.5, 0.5, 0.5)),
}


@dataclass(frozen=True)
class ExtractorConfig:
    manifest: str
    out: str
    resize: int = 299
    batch_size: int = 64
    device: str = "cpu"
    normalization: str = "imagenet"
    weights: str | None = None
    weights_sha256: str | None = None
    init_seed: int = 0  # used only when no weights file is supplied

    def feature_name(self) -> str:
        tag = f"inception_v3_pool3_{self.normalization}"
        if self.weights is None:
            tag += f"_randinit{self.init_seed}"
        return tag


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_backbone(config: ExtractorConfig) -> torch.nn.Module:
    if config.normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {config.normalization!r}; "
                         f"choose from {sorted(NORMALIZATIONS)}")
    torch.manual_seed(config.init_seed)
    model = inception_v3(weights=None, aux_logits=True, init_weights=True)
    if config.weights is not None:
        if config.weights_sha256:
            digest = _sha256(config.weights)
            if digest != config.weights_sha256.lower():
                raise ValueError(f"weights hash mismatch: {config.weights} has "
                                 f"{digest}, config pins {config.weights_sha256}")
        state = torch.load(config.weights, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    model.fc = torch.nn.Identity()  # network output becomes the pool3 vector
    model.eval()
    return model.to(config.device)


def load_image_tensor(path: str, resize: int, normalization: str) -> torch.Tensor:
    mean, std = NORMALIZATIONS[normalization]
    with Image.open(path) as im:
        rgb = im.convert("RGB")  # grayscale replicates to three channels
        rgb = rgb.resize((resize, resize), Image.Resampling.BILINEAR)
        arr = np.asarray(rgb, dtype=np.float32) / 255.0
    arr = (arr - np.asarray(mean, dtype=np.float32)) / np.asarray(std, dtype=np.float32)
    return torch.from_numpy(arr.transpose(2, 0, 1))


def extract_rows(rows: list[ManifestRow], config: ExtractorConfig,
                 model: torch.nn.Module | None = None) -> np.ndarray:
    """(n, 2048) float32 features in manifest row order."""
    if model is None:
        model = load_backbone(config)
    feats = np.empty((len(rows), POOL3_DIM), dtype=np.float32)
    with torch.no_grad():
        for start in range(0, len(rows), config.batch_size):
            batch_rows = rows[start:start + config.batch_size]
            tensors = []
            for row in batch_rows:
                try:
                    tensors.append(load_image_tensor(row.path, config.resize,
                                                     config.normalization))
                except (OSError, ValueError) as exc:
                    # features must stay complete for downstream row alignment
                    raise RuntimeError(f"unreadable image {row.id!r} ({row.path}): "
                                       f"{exc}") from None
            batch = torch.stack(tensors).to(config.device)
            out = model(batch)
            feats[start:start + len(batch_rows)] = out.cpu().numpy().astype(np.float32)
    return feats


def extract(config: ExtractorConfig) -> str:
    """Run the full manifest and write the FEAT1 file; returns the output path."""
    base = os.path.dirname(os.path.abspath(config.manifest))
    rows = [row if os.path.isabs(row.path) else
            ManifestRow(id=row.id, path=os.path.join(base, row.path))
            for row in read_manifest(config.manifest)]
    feats = extract_rows(rows, config)
    assert feats.shape[1] == POOL3_DIM
    write_feat1([r.id for r in rows], feats, config.feature_name(), config.out)
    return config.out
