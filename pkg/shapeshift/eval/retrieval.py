import logging

import numpy as np
from einops import rearrange

from ..data.grid_io import write_gray_pgm
from ..data.grids import as_grid, resample_nearest
from .metrics import binarize, iou, mse

logger = logging.getLogger(__name__)

RETRIEVAL_METRICS = {"iou": (iou, max), "mse": (mse, min)}


def retrieve_nearest(query, gallery, metric="iou"):
    """Index of the gallery shape closest to ``query``: highest IoU or lowest MSE.

    Ties go to the lowest index.
    """
    if metric not in RETRIEVAL_METRICS:
        raise ValueError(f"unknown retrieval metric {metric!r}; expected one of {sorted(RETRIEVAL_METRICS)}")
    if not gallery:
        raise ValueError("retrieval needs a non-empty gallery")
    measure, better = RETRIEVAL_METRICS[metric]
    scores = [measure(query, item) for item in gallery]
    best = better(scores)
    return scores.index(best)


def _panel_tile(grid, extent):
    grid = as_grid(grid)
    if grid.extents[0] != extent:
        grid = resample_nearest(grid, extent)
    # white background, black shape
    return np.where(binarize(grid), 0.0, 1.0)


def _at_extent(grid, extent):
    return grid if grid.extents[0] == extent else resample_nearest(grid, extent)


def retrieval_panel(query, translated, gallery, path, separator=2, input_gallery=None):
    """Contact sheet: query | translated output | training shape nearest to the query |
    nearest gallery shape to the output by IoU | nearest by MSE.

    ``input_gallery`` holds the training shapes searched for the query and
    defaults to ``gallery``. All tiles are 2D and brought to the query's
    extent. Returns the three retrieved indices (query by IoU, output by
    IoU, output by MSE).
    """
    input_gallery = gallery if input_gallery is None else input_gallery
    if not gallery or not input_gallery:
        raise ValueError("retrieval needs a non-empty gallery")
    query = as_grid(query)
    if query.dims != 2:
        raise ValueError("retrieval panels are drawn for 2D shapes only")
    translated = as_grid(translated)
    by_input = retrieve_nearest(_at_extent(query, as_grid(input_gallery[0]).extents[0]), input_gallery, "iou")
    output = _at_extent(translated, as_grid(gallery[0]).extents[0])
    by_iou = retrieve_nearest(output, gallery, "iou")
    by_mse = retrieve_nearest(output, gallery, "mse")
    extent = query.extents[0]
    columns = (query, translated, input_gallery[by_input], gallery[by_iou], gallery[by_mse])
    tiles = np.stack([_panel_tile(g, extent) for g in columns])
    # grey gutter on the right of every tile
    tiles = np.pad(tiles, ((0, 0), (0, 0), (0, separator)), constant_values=0.5)
    sheet = rearrange(tiles, 'n h w -> h (n w)')
    sheet = sheet[:, :sheet.shape[1] - separator]
    write_gray_pgm(path, sheet)
    logger.debug(f"retrieval panel {path}: input -> {by_input}, iou -> {by_iou}, mse -> {by_mse}")
    return by_input, by_iou, by_mse
