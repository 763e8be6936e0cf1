"""Dense evaluation of a decoded implicit field."""
import logging
import math
import os

import numpy as np
import torch

from ..autodiff import no_record
from ..utils.constants import DEFAULT_EVAL_MEMORY_MB, EVAL_MEMORY_ENV, ISO_LEVEL
from ..utils.errors import MemoryBudgetError, ShapeMismatchError

logger = logging.getLogger(__name__)

MAX_CHUNK = 65536


def memory_budget_bytes():
    return int(float(os.environ.get(EVAL_MEMORY_ENV, DEFAULT_EVAL_MEMORY_MB)) * 2 ** 20)


def cell_centers(resolution, dims):
    """(resolution^dims, dims) cell-centre coordinates in row-major order."""
    axis = (np.arange(resolution) + 0.5) / resolution
    mesh = np.meshgrid(*([axis] * dims), indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _bytes_per_point(autoencoder):
    spec = autoencoder.decoder.spec
    widths = [spec.in_channels] + [layer.out_channels for layer in spec.layers]
    # activations plus the pre-activation copy of each layer
    return 2 * sum(widths) * torch.get_default_dtype().itemsize


def evaluate_field(autoencoder, latent, resolution, budget_bytes=None):
    """Decoder output at every cell centre of a ``resolution``^d grid.

    Points are evaluated in row-major chunks sized to the memory budget
    (``SHAPESHIFT_EVAL_MEMORY_MB``); the chunk order is fixed, so repeated
    evaluations give identical grids.
    """
    dims = autoencoder.dims
    if resolution < 2:
        raise ShapeMismatchError(f"resolution must be at least 2, got {resolution}")
    latent = torch.as_tensor(latent, dtype=torch.get_default_dtype())
    if latent.dim() != dims + 1:
        raise ShapeMismatchError(f"expected a single {dims}D latent grid, got shape {list(latent.shape)}")
    budget = memory_budget_bytes() if budget_bytes is None else budget_bytes
    cells = resolution ** dims
    itemsize = torch.get_default_dtype().itemsize
    per_point = _bytes_per_point(autoencoder) + dims * itemsize
    field_bytes = cells * itemsize
    min_chunk = min(cells, 1024)
    required = field_bytes + min_chunk * per_point
    if required > budget:
        raise MemoryBudgetError(
            f"evaluating {resolution}^{dims} needs at least {math.ceil(required / 2 ** 20)} MB, "
            f"budget is {budget // 2 ** 20} MB (set {EVAL_MEMORY_ENV})")
    chunk = int(min(MAX_CHUNK, cells, (budget - field_bytes) // per_point))

    centers = cell_centers(resolution, dims)
    values = np.empty(cells, dtype=np.float64)
    with no_record():
        for start in range(0, cells, chunk):
            points = torch.as_tensor(centers[start:start + chunk], dtype=latent.dtype)
            out = autoencoder.decode_field(latent, points)
            values[start:start + chunk] = out.numpy()
    logger.debug(f"evaluated {cells} points in chunks of {chunk}")
    return values.reshape([resolution] * dims)


def threshold(field, iso=ISO_LEVEL):
    return np.asarray(field) > iso
