import json
import os
from dataclasses import dataclass

import torch
from safetensors import safe_open
from safetensors.torch import save_file

from ..utils.constants import LATENT_FORMAT_VERSION
from ..utils.errors import CheckpointError, ShapeMismatchError

HEADER_KEY = "shapeshift"
LATENT_SUFFIX = ".safetensors"


@dataclass
class LatentGrid:
    """Position-aware code Z: channel-last values of shape (*k, m)."""

    values: torch.Tensor
    name: str = ""

    def __post_init__(self):
        self.values = torch.as_tensor(self.values)
        if self.values.dim() not in (3, 4):
            raise ShapeMismatchError(f"latent grid must be (k, k, m) or (k, k, k, m), got {list(self.values.shape)}")

    @property
    def dims(self):
        return self.values.dim() - 1

    @property
    def extents(self):
        return list(self.values.shape[:-1])

    @property
    def channels(self):
        return self.values.shape[-1]

    def save(self, path):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        header = json.dumps({"format_version": LATENT_FORMAT_VERSION, "name": self.name}, sort_keys=True)
        # a single metadata entry keeps the file bytes reproducible
        save_file({"latent": self.values.detach().contiguous().clone()}, path, metadata={HEADER_KEY: header})

    @classmethod
    def load(cls, path):
        try:
            with safe_open(path, framework="pt") as f:
                metadata = json.loads((f.metadata() or {}).get(HEADER_KEY, "{}"))
                values = f.get_tensor("latent")
        except Exception as e:
            raise CheckpointError(f"cannot read latent grid {path}: {e}") from e
        if metadata.get("format_version") != LATENT_FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported latent format {metadata.get('format_version')!r}")
        return cls(values, metadata.get("name", ""))


def stack_latents(latents):
    return torch.stack([l.values for l in latents])


def load_latents(directory, split=None):
    """LatentGrids of a directory in name order, restricted to ``<split>.txt`` when that file exists."""
    if not os.path.isdir(directory):
        raise CheckpointError(f"latent directory {directory} does not exist")
    names = sorted(f[:-len(LATENT_SUFFIX)] for f in os.listdir(directory) if f.endswith(LATENT_SUFFIX))
    split_file = os.path.join(directory, f"{split}.txt") if split else None
    if split_file and os.path.isfile(split_file):
        with open(split_file) as f:
            wanted = {line.strip() for line in f if line.strip()}
        names = [name for name in names if name in wanted]
    return [LatentGrid.load(os.path.join(directory, name + LATENT_SUFFIX)) for name in names]
