"""3D recipes: blocky tables and chairs."""
import numpy as np

from . import register_recipe
from .base import SyntheticRecipe
from .. import oracle


def _box(cells, lo, hi):
    lo = [max(int(round(a)), 0) for a in lo]
    hi = [min(int(round(b)), e) for b, e in zip(hi, cells.shape)]
    cells[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True


@register_recipe('tall-short')
class TallShortRecipe(SyntheticRecipe):
    """Tables with a top slab on four legs; tall (domain1) or short (domain2). Axis 0 points up."""

    dims = 3
    domain1_range = (1.0, 5.0)
    domain2_range = (0.0, 0.85)

    def draw(self, domain, rng, extent):
        n = extent
        height = rng.uniform(0.70, 0.85) if domain == "domain1" else rng.uniform(0.22, 0.30)
        height, width, depth = height * n, rng.uniform(0.45, 0.6) * n, rng.uniform(0.45, 0.6) * n
        slab = max(0.08 * n, 1.0)
        leg = max(0.08 * n, 1.0)
        z0 = rng.uniform(1.0, n - height - 1.0)
        y0 = rng.uniform(1.0, n - width - 1.0)
        x0 = rng.uniform(1.0, n - depth - 1.0)
        cells = np.zeros((n, n, n), dtype=bool)
        _box(cells, (z0 + height - slab, y0, x0), (z0 + height, y0 + width, x0 + depth))
        for ly in (y0, y0 + width - leg):
            for lx in (x0, x0 + depth - leg):
                _box(cells, (z0, ly, lx), (z0 + height, ly + leg, lx + leg))
        return cells

    def measure(self, cells):
        return oracle.height_ratio(cells)


@register_recipe('armrest')
class ArmrestRecipe(SyntheticRecipe):
    """Block chairs with (domain1) or without (domain2) side slabs.

    Axis 0 points up, axis 1 runs from the front to the back, axis 2 is lateral.
    """

    dims = 3
    domain1_range = (0.1, 1.0)
    domain2_range = (0.0, 0.02)

    def draw(self, domain, rng, extent):
        n = extent
        total = rng.uniform(0.6, 0.8) * n
        seat = rng.uniform(0.35, 0.45) * total
        width = rng.uniform(0.45, 0.6) * n
        depth = rng.uniform(0.4, 0.55) * n
        thick = max(rng.uniform(0.08, 0.12) * n, 1.0)
        z0 = rng.uniform(1.0, n - total - 1.0)
        y0 = rng.uniform(1.0, n - depth - 1.0)
        x0 = rng.uniform(1.0, n - width - 1.0)
        cells = np.zeros((n, n, n), dtype=bool)
        _box(cells, (z0, y0, x0), (z0 + seat, y0 + depth, x0 + width))
        _box(cells, (z0, y0 + depth - thick, x0), (z0 + total, y0 + depth, x0 + width))
        if domain == "domain1":
            arm_top = z0 + 0.8 * total
            for ax in (x0, x0 + width - thick):
                _box(cells, (z0 + seat, y0, ax), (arm_top, y0 + depth - thick, ax + thick))
        return cells

    def measure(self, cells):
        return oracle.side_slab_fraction(cells)
