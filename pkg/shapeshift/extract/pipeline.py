import numpy as np

from ..utils.constants import ISO_LEVEL
from .marching_cubes import marching_cubes
from .marching_squares import marching_squares


def pad_field(field, iso=ISO_LEVEL, pad=1):
    """Surround the field with ``pad`` layers of below-iso values so boundary shapes close."""
    field = np.asarray(field, dtype=np.float64)
    fill = min(float(field.min()), iso) - 1.0
    return np.pad(field, pad, mode="constant", constant_values=fill)


def extract_geometry(field, iso=ISO_LEVEL, pad=1):
    """ContourSet (2D) or TriMesh (3D) of the padded field, in the unpadded field's coordinates."""
    field = np.asarray(field, dtype=np.float64)
    padded = pad_field(field, iso, pad) if pad else field
    if field.ndim == 2:
        return marching_squares(padded, iso, pad=pad)
    if field.ndim == 3:
        return marching_cubes(padded, iso, pad=pad)
    raise ValueError(f"fields are 2D or 3D, got {field.ndim}D")
