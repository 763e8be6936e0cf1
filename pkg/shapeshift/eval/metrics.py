"""Shape comparison measures on occupancy grids and point sets."""
import numpy as np
from sklearn.neighbors import NearestNeighbors

from ..data.grids import OccupancyGrid
from ..extract.geometry import PointSet
from ..utils.constants import ISO_LEVEL
from ..utils.errors import ShapeMismatchError


def binarize(value, iso=ISO_LEVEL):
    """Boolean cells of a grid, a boolean array, or a float array thresholded at ``iso``."""
    if isinstance(value, OccupancyGrid):
        return value.cells
    value = np.asarray(value)
    return value if value.dtype == bool else value > iso


def _pair(a, b):
    a, b = binarize(a), binarize(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"grids differ in extents: {list(a.shape)} vs {list(b.shape)}")
    return a, b


def mse(a, b):
    """Fraction of disagreeing cells, i.e. the mean squared difference of {0, 1} rasters."""
    a, b = _pair(a, b)
    return float(np.mean(a != b))


def iou(a, b):
    a, b = _pair(a, b)
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def _points(value):
    points = value.points if isinstance(value, PointSet) else np.asarray(value, dtype=np.float64)
    return points.reshape(len(points), -1)


def one_sided_chamfer(source, target, squared=False):
    """Mean distance from each point of ``source`` to its nearest neighbour in ``target``.

    Distances are Euclidean unless ``squared`` is set. Not symmetric.
    """
    source, target = _points(source), _points(target)
    if len(source) == 0 or len(target) == 0:
        raise ValueError("one-sided Chamfer distance needs two non-empty point sets")
    if source.shape[1] != target.shape[1]:
        raise ShapeMismatchError(f"point dimensions differ: {source.shape[1]} vs {target.shape[1]}")
    nn = NearestNeighbors(n_neighbors=1, algorithm='kd_tree').fit(target)
    distances, _ = nn.kneighbors(source)
    distances = distances[:, 0]
    return float(np.mean(distances ** 2 if squared else distances))
