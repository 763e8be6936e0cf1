import numpy as np

from ...utils.constants import DOMAIN_NAMES
from ...utils.rng import substream
from ..grids import OccupancyGrid
from ..oracle import UNCERTAIN, classify


class SyntheticRecipe:
    """Two unpaired shape families drawn from randomized analytic primitives.

    Subclasses implement ``draw(domain, rng, extent)`` returning a boolean
    raster and ``measure(cells)`` returning the scalar the oracle thresholds.
    """

    name = None
    dims = 2
    default_extent = 64
    # inclusive oracle bands, in the units of ``measure``
    domain1_range = (0.0, 0.0)
    domain2_range = (0.0, 0.0)

    def draw(self, domain, rng, extent):
        raise NotImplementedError

    def measure(self, cells):
        raise NotImplementedError

    def params(self):
        return {"domain1_range": list(self.domain1_range), "domain2_range": list(self.domain2_range)}

    def generate(self, count, extent, seed):
        """(domain1 grids, domain2 grids); shape i of domain d uses its own substream."""
        domains = []
        for d, domain in enumerate(DOMAIN_NAMES):
            shapes = []
            for i in range(count):
                rng = substream(seed, "data", d, i)
                cells = self.draw(domain, rng, extent)
                shapes.append(OccupancyGrid(cells, f"{domain}_{i:04d}"))
            domains.append(shapes)
        return domains[0], domains[1]

    def classify(self, cells):
        cells = np.asarray(cells, dtype=bool)
        if not cells.any():
            return UNCERTAIN
        return classify(self.measure(cells), self.domain1_range, self.domain2_range)


def centers(extent, dims):
    """Pixel-centre coordinates in pixel units, one array per axis."""
    axis = np.arange(extent) + 0.5
    return np.meshgrid(*([axis] * dims), indexing='ij')
