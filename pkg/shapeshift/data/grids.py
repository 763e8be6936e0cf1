"""Binary occupancy rasters and the weighted point samples drawn from them."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..utils.constants import BOUNDARY_WEIGHT
from ..utils.errors import ShapeMismatchError
from ..utils.rng import substream

logger = logging.getLogger(__name__)


@dataclass
class OccupancyGrid:
    """Inside (True) / outside (False) cells of a 2D or 3D shape."""

    cells: np.ndarray
    name: str = ""

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim not in (2, 3):
            raise ShapeMismatchError(f"occupancy grids are 2D or 3D, got shape {cells.shape}")
        if cells.dtype != bool:
            if not np.isin(cells, (0, 1)).all():
                raise ValueError("occupancy cells must be 0 or 1")
            cells = cells.astype(bool)
        self.cells = cells

    @property
    def dims(self):
        return self.cells.ndim

    @property
    def extents(self):
        return list(self.cells.shape)

    def __eq__(self, other):
        return isinstance(other, OccupancyGrid) and np.array_equal(self.cells, other.cells)

    def complement(self):
        return OccupancyGrid(~self.cells, self.name)

    def as_float(self, dtype=np.float32):
        return self.cells.astype(dtype)


def as_grid(value):
    return value if isinstance(value, OccupancyGrid) else OccupancyGrid(value)


def boundary_mask(grid):
    """Cells with a differently occupied cell among their 8 (2D) / 26 (3D) neighbours."""
    cells = as_grid(grid).cells
    # edge replication only repeats values already inside the 3^d window
    hi = ndimage.maximum_filter(cells, size=3, mode='nearest')
    lo = ndimage.minimum_filter(cells, size=3, mode='nearest')
    return hi != lo


def downsample_max(grid, factor):
    grid = as_grid(grid)
    if factor < 1 or any(e % factor for e in grid.extents):
        raise ShapeMismatchError(f"factor {factor} does not divide extents {grid.extents}")
    if factor == 1:
        return OccupancyGrid(grid.cells.copy(), grid.name)
    shape = []
    for e in grid.extents:
        shape += [e // factor, factor]
    blocks = grid.cells.reshape(shape)
    return OccupancyGrid(blocks.max(axis=tuple(range(1, 2 * grid.dims, 2))), grid.name)


def resample_nearest(grid, resolution):
    """Occupancy at the cell centres of a ``resolution``^d lattice, taken from the covering cell."""
    grid = as_grid(grid)
    axes = [np.minimum(((np.arange(resolution) + 0.5) / resolution * e).astype(np.int64), e - 1)
            for e in grid.extents]
    return OccupancyGrid(grid.cells[np.ix_(*axes)], grid.name)


@dataclass
class TrainingSample:
    p: np.ndarray
    target: float
    weight: float


@dataclass
class TrainingSamples:
    """Column view of a sample set: points (N, d), targets (N,), weights (N,)."""

    points: np.ndarray
    targets: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.targets)

    def __iter__(self):
        for p, t, w in zip(self.points, self.targets, self.weights):
            yield TrainingSample(p, float(t), float(w))


def _draw(rng, pool, count, what):
    if count <= 0:
        return pool[:0]
    replace = count > len(pool)
    if replace:
        logger.debug(f"drawing {count} {what} samples from {len(pool)} cells with replacement")
    return rng.choice(pool, size=count, replace=replace)


def sample_training_points(grid, resolution, count, seed, boundary_fraction=0.5):
    """Cell-centre samples of the block-max downsampled grid.

    ``boundary_fraction`` of the samples come from boundary-adjacent cells
    (weight 2), the rest from the other cells (weight 1). Grids without
    boundary (or without interior) cells are sampled uniformly.
    """
    grid = as_grid(grid)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if any(e % resolution for e in grid.extents):
        raise ShapeMismatchError(f"resolution {resolution} does not divide extents {grid.extents}")
    coarse = downsample_max(grid, grid.extents[0] // resolution)
    mask = boundary_mask(coarse).ravel()
    occupancy = coarse.cells.ravel()
    rng = substream(seed, "sampling")

    cells = occupancy.size
    if count > cells:
        logger.warning(f"{count} samples requested from {cells} cells; sampling with replacement")
    boundary = np.flatnonzero(mask)
    rest = np.flatnonzero(~mask)
    if len(boundary) and len(rest):
        n_boundary = int(round(count * boundary_fraction))
        index = np.concatenate([_draw(rng, boundary, n_boundary, "boundary"),
                                _draw(rng, rest, count - n_boundary, "interior")])
    else:
        index = _draw(rng, np.arange(cells), count, "uniform")

    coords = np.stack(np.unravel_index(index, coarse.extents), axis=-1)
    points = (coords + 0.5) / resolution
    targets = occupancy[index].astype(np.float64)
    weights = np.where(mask[index], BOUNDARY_WEIGHT, 1.0)
    return TrainingSamples(points, targets, weights)
