"""2D recipes: stroke glyphs, dotted strokes and compact blobs."""
import numpy as np

from . import register_recipe
from .base import SyntheticRecipe, centers
from .. import oracle


def _ring(rng, extent, width, radius_range):
    s = extent / 64.0
    radius = rng.uniform(*radius_range) * s
    cy, cx = rng.uniform(radius + 2 * s, extent - radius - 2 * s, size=2)
    y, x = centers(extent, 2)
    dist = np.hypot(y - cy, x - cx)
    return (dist <= radius) & (dist > radius - width)


def _frame(rng, extent, width, half_range):
    s = extent / 64.0
    half = rng.uniform(*half_range) * s
    reach = half * np.sqrt(2.0)
    cy, cx = rng.uniform(reach + 2 * s, extent - reach - 2 * s, size=2)
    theta = rng.uniform(0, np.pi / 2)
    y, x = centers(extent, 2)
    u = np.cos(theta) * (y - cy) + np.sin(theta) * (x - cx)
    v = -np.sin(theta) * (y - cy) + np.cos(theta) * (x - cx)
    cheb = np.maximum(np.abs(u), np.abs(v))
    return (cheb <= half) & (cheb > half - width)


@register_recipe('thick-thin')
class ThickThinRecipe(SyntheticRecipe):
    """Rings and square frames drawn with thick (domain1) or thin (domain2) strokes."""

    dims = 2
    thick = (7.0, 8.4)
    thin = (2.6, 3.4)
    domain1_range = (6.0, 9.0)
    domain2_range = (2.0, 4.0)

    def draw(self, domain, rng, extent):
        s = extent / 64.0
        width = rng.uniform(*(self.thick if domain == "domain1" else self.thin)) * s
        if rng.integers(2) == 0:
            return _ring(rng, extent, width, (14.0, 24.0))
        return _frame(rng, extent, width, (12.0, 18.0))

    def measure(self, cells):
        # stroke width expressed at the 64-pixel reference extent
        return oracle.stroke_width(cells) * 64.0 / cells.shape[0]


@register_recipe('solid-dotted')
class SolidDottedRecipe(SyntheticRecipe):
    """Solid rings (domain1) against rings of separated dots (domain2)."""

    dims = 2
    domain1_range = (1, 2)
    domain2_range = (4, np.inf)

    def draw(self, domain, rng, extent):
        s = extent / 64.0
        if domain == "domain1":
            return _ring(rng, extent, rng.uniform(4.0, 5.0) * s, (14.0, 24.0))
        radius = rng.uniform(14.0, 24.0) * s
        dot = rng.uniform(2.0, 2.5) * s
        pitch = rng.uniform(9.0, 12.0) * s
        cy, cx = rng.uniform(radius + dot + 2 * s, extent - radius - dot - 2 * s, size=2)
        count = max(int(2 * np.pi * radius / pitch), 4)
        angles = rng.uniform(0, 2 * np.pi) + 2 * np.pi * np.arange(count) / count
        y, x = centers(extent, 2)
        cells = np.zeros((extent, extent), dtype=bool)
        for a in angles:
            cells |= np.hypot(y - cy - radius * np.sin(a), x - cx - radius * np.cos(a)) <= dot
        return cells

    def measure(self, cells):
        return oracle.component_count(cells)


@register_recipe('squares-disks')
class SquaresDisksRecipe(SyntheticRecipe):
    """Rotated boxes (domain1) against disks (domain2), told apart by circularity."""

    dims = 2
    domain1_range = (0.0, 0.8)
    domain2_range = (0.85, 1.5)

    def draw(self, domain, rng, extent):
        s = extent / 64.0
        y, x = centers(extent, 2)
        if domain == "domain2":
            radius = rng.uniform(10.0, 18.0) * s
            cy, cx = rng.uniform(radius + 2 * s, extent - radius - 2 * s, size=2)
            return np.hypot(y - cy, x - cx) <= radius
        long_side = rng.uniform(22.0, 34.0) * s
        short_side = long_side / rng.uniform(1.5, 2.0)
        reach = 0.5 * np.hypot(long_side, short_side)
        cy, cx = rng.uniform(reach + 2 * s, extent - reach - 2 * s, size=2)
        theta = rng.uniform(0, np.pi)
        u = np.cos(theta) * (y - cy) + np.sin(theta) * (x - cx)
        v = -np.sin(theta) * (y - cy) + np.cos(theta) * (x - cx)
        return (np.abs(u) <= long_side / 2) & (np.abs(v) <= short_side / 2)

    def measure(self, cells):
        return oracle.circularity(cells)
