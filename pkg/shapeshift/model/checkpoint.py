"""Checkpoint container: one safetensors file per checkpoint.

Tensors are ``<network>.<param>`` plus optimizer moments under
``optim.<network>.``. The header is one JSON string holding the format version, the checkpoint
kind, every NetSpec and the training metadata.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict

import torch
from safetensors import safe_open
from safetensors.torch import save_file

from ..autodiff.optim import AdamState
from ..utils.constants import CHECKPOINT_FORMAT_VERSION
from ..utils.errors import CheckpointError
from .configuration import NetSpec
from .latent import HEADER_KEY
from .network import build_network

logger = logging.getLogger(__name__)

KINDS = ('autoencoder', 'translator')


@dataclass
class Checkpoint:
    kind: str
    networks: Dict[str, object]
    metadata: Dict[str, object] = field(default_factory=dict)
    optim: Dict[str, AdamState] = field(default_factory=dict)


def save_checkpoint(path, checkpoint):
    if checkpoint.kind not in KINDS:
        raise CheckpointError(f"unknown checkpoint kind {checkpoint.kind!r}")
    tensors = {}
    for net_name, network in checkpoint.networks.items():
        for param_name, value in network.params.items():
            tensors[f"{net_name}.{param_name}"] = value.detach().contiguous().clone()
    for net_name, state in checkpoint.optim.items():
        for key, value in state.state_dict(prefix=f"optim.{net_name}.").items():
            tensors[key] = value.detach().contiguous().clone()
    header = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "kind": checkpoint.kind,
        "specs": {name: net.spec.to_dict() for name, net in checkpoint.networks.items()},
        "optim_steps": {name: state.step for name, state in checkpoint.optim.items()},
        "metadata": checkpoint.metadata,
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp_path = f"{path}.tmp"
    try:
        save_file(tensors, tmp_path, metadata={HEADER_KEY: json.dumps(header, sort_keys=True)})
        os.replace(tmp_path, path)
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}") from e
    logger.info(f"saved {checkpoint.kind} checkpoint to {path}")
    return path


def load_checkpoint(path, kind=None):
    if not os.path.isfile(path):
        raise CheckpointError(f"checkpoint {path} does not exist")
    try:
        with safe_open(path, framework="pt") as f:
            header = json.loads((f.metadata() or {}).get(HEADER_KEY, "{}"))
            tensors = {key: f.get_tensor(key) for key in f.keys()}
    except Exception as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e

    version = header.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format {version!r}")
    if kind is not None and header.get("kind") != kind:
        raise CheckpointError(f"{path}: expected a {kind} checkpoint, found {header.get('kind')!r}")

    dtype = torch.get_default_dtype()
    networks = {}
    for net_name, spec_dict in header.get("specs", {}).items():
        prefix = f"{net_name}."
        params = {key[len(prefix):]: value.to(dtype) for key, value in tensors.items() if key.startswith(prefix)}
        networks[net_name] = build_network(NetSpec.from_dict(spec_dict), params)
    optim = {}
    for net_name, step in header.get("optim_steps", {}).items():
        prefix = f"optim.{net_name}."
        moments = {key: value.to(dtype) for key, value in tensors.items() if key.startswith(prefix)}
        optim[net_name] = AdamState.from_state_dict(moments, step, prefix=prefix)
    return Checkpoint(header["kind"], networks, header.get("metadata", {}), optim)
