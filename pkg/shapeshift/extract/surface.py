import numpy as np

from ..utils.constants import SURFACE_SAMPLE_COUNT
from ..utils.rng import substream
from .geometry import PointSet


def sample_surface_points(mesh, count=SURFACE_SAMPLE_COUNT, seed=0):
    """Area-weighted triangle choice, uniform barycentric placement."""
    if mesh.is_empty:
        raise ValueError("cannot sample points from an empty mesh")
    areas = mesh.triangle_areas()
    rng = substream(seed, "surface")
    chosen = rng.choice(len(areas), size=count, p=areas / areas.sum())
    u = rng.random((count, 1))
    v = rng.random((count, 1))
    # fold the unit square onto the triangle
    flip = (u + v) > 1
    u = np.where(flip, 1 - u, u)
    v = np.where(flip, 1 - v, v)
    tri = mesh.vertices[mesh.faces[chosen]]
    points = tri[:, 0] + u * (tri[:, 1] - tri[:, 0]) + v * (tri[:, 2] - tri[:, 0])
    return PointSet(points)


def sample_contour_points(contours, count=SURFACE_SAMPLE_COUNT, seed=0):
    """Length-weighted segment choice, uniform placement along the segment."""
    segments = contours.segments()
    lengths = np.linalg.norm(segments[:, 1] - segments[:, 0], axis=-1) if len(segments) else np.zeros(0)
    if not len(segments) or lengths.sum() <= 0:
        raise ValueError("cannot sample points from an empty contour set")
    rng = substream(seed, "contour")
    chosen = rng.choice(len(segments), size=count, p=lengths / lengths.sum())
    t = rng.random((count, 1))
    seg = segments[chosen]
    return PointSet(seg[:, 0] + t * (seg[:, 1] - seg[:, 0]))


def sample_geometry_points(geometry, count=SURFACE_SAMPLE_COUNT, seed=0):
    if hasattr(geometry, 'faces'):
        return sample_surface_points(geometry, count, seed)
    return sample_contour_points(geometry, count, seed)
