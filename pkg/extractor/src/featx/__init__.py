"""InceptionV3 pool3 feature-extraction sidecar."""

from .extract import ExtractorConfig, extract, extract_rows, load_backbone
from .formats import read_manifest, write_feat1

__version__ = "0.1.0"
