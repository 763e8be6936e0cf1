"""Analytic measures that tell the synthetic domains apart.

Each recipe classifies a raster with one of these measures; values inside
the band between the two domains are reported as "uncertain".
"""
import math

import numpy as np
from scipy import ndimage

from ..extract.pipeline import extract_geometry
from .grids import as_grid

UNCERTAIN = "uncertain"


def area_and_perimeter(grid):
    """Pixel count and contour length (in pixels) of a 2D raster."""
    cells = as_grid(grid).cells
    area = float(cells.sum())
    if area == 0:
        return 0.0, 0.0
    contours = extract_geometry(cells.astype(np.float64))
    return area, contours.length() * cells.shape[0]


def stroke_width(grid):
    """2 * area / perimeter; equals the stroke width for rings and frames."""
    area, perimeter = area_and_perimeter(grid)
    return 2.0 * area / perimeter if perimeter else 0.0


def circularity(grid):
    """4 pi A / P^2: 1 for a disk, pi/4 for a square."""
    area, perimeter = area_and_perimeter(grid)
    return 4.0 * math.pi * area / perimeter ** 2 if perimeter else 0.0


def component_count(grid):
    cells = as_grid(grid).cells
    structure = np.ones((3,) * cells.ndim, dtype=bool)
    _, count = ndimage.label(cells, structure=structure)
    return int(count)


def _bbox(cells):
    occupied = np.argwhere(cells)
    return occupied.min(axis=0), occupied.max(axis=0) + 1


def height_ratio(grid):
    """Bounding-box height (axis 0) over its largest horizontal extent."""
    cells = as_grid(grid).cells
    if not cells.any():
        return 0.0
    lo, hi = _bbox(cells)
    size = hi - lo
    return float(size[0]) / float(max(size[1], size[2]))


def side_slab_fraction(grid):
    """Occupancy of the front half of the bounding box between 55% and 70% of its height.

    Seats fill the lower part and backs the rear, so only side slabs reach
    this window.
    """
    cells = as_grid(grid).cells
    if not cells.any():
        return 0.0
    lo, hi = _bbox(cells)
    size = hi - lo
    z0 = lo[0] + int(math.floor(0.55 * size[0]))
    z1 = lo[0] + max(int(math.ceil(0.70 * size[0])), z0 - lo[0] + 1)
    y1 = lo[1] + max(size[1] // 2, 1)
    window = cells[z0:z1, lo[1]:y1, lo[2]:hi[2]]
    return float(window.mean()) if window.size else 0.0


def classify(value, domain1_range, domain2_range):
    lo, hi = domain1_range
    if lo <= value <= hi:
        return "domain1"
    lo, hi = domain2_range
    if lo <= value <= hi:
        return "domain2"
    return UNCERTAIN
