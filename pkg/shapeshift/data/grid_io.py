"""PGM (P5) and RAWGRID readers and writers.

RAWGRID layout: b"RGRD", version byte, dimension-count byte, one
little-endian u32 extent per axis, then the row-major cells packed eight per
byte (most significant bit first, last byte zero-padded).
"""
import math
import os

import numpy as np
from PIL import Image

from ..utils.constants import PGM_THRESHOLD, RAWGRID_MAGIC, RAWGRID_VERSION
from ..utils.errors import DatasetError
from .grids import OccupancyGrid, as_grid

PGM_SUFFIX = ".pgm"
RAWGRID_SUFFIX = ".rgrd"
GRID_SUFFIXES = (PGM_SUFFIX, RAWGRID_SUFFIX)


def write_pgm(path, grid):
    grid = as_grid(grid)
    if grid.dims != 2:
        raise DatasetError(f"PGM holds 2D grids only, got {grid.dims}D", [path])
    # dark pixels are inside
    pixels = np.where(grid.cells, 0, 255).astype(np.uint8)
    Image.fromarray(pixels).save(path, format="PPM")


def read_pgm(path):
    with Image.open(path) as image:
        pixels = np.asarray(image.convert("L"))
    return OccupancyGrid(pixels < PGM_THRESHOLD, _stem(path))


def write_gray_pgm(path, values):
    """Grayscale PGM of a float array in [0, 1] (1 = white)."""
    pixels = np.clip(np.round(np.asarray(values) * 255), 0, 255).astype(np.uint8)
    Image.fromarray(pixels).save(path, format="PPM")


def encode_rawgrid(grid):
    grid = as_grid(grid)
    header = RAWGRID_MAGIC + bytes([RAWGRID_VERSION, grid.dims])
    extents = np.asarray(grid.extents, dtype="<u4").tobytes()
    return header + extents + np.packbits(grid.cells.ravel(order="C")).tobytes()


def decode_rawgrid(data, name=""):
    if data[:4] != RAWGRID_MAGIC:
        raise DatasetError("not a RAWGRID file (bad magic)", [name])
    if len(data) < 6 or data[4] != RAWGRID_VERSION:
        raise DatasetError(f"unsupported RAWGRID version {data[4] if len(data) > 4 else None}", [name])
    ndim = data[5]
    if ndim not in (2, 3):
        raise DatasetError(f"RAWGRID dimension count must be 2 or 3, got {ndim}", [name])
    header_len = 6 + 4 * ndim
    if len(data) < header_len:
        raise DatasetError("truncated RAWGRID header", [name])
    extents = [int(e) for e in np.frombuffer(data[6:header_len], dtype="<u4")]
    count = math.prod(extents)
    payload = data[header_len:]
    if len(payload) != (count + 7) // 8:
        raise DatasetError(
            f"RAWGRID payload has {len(payload)} bytes, extents {extents} need {(count + 7) // 8}", [name])
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), count=count)
    return OccupancyGrid(bits.reshape(extents).astype(bool), name)


def write_rawgrid(path, grid):
    with open(path, "wb") as f:
        f.write(encode_rawgrid(grid))


def read_rawgrid(path):
    with open(path, "rb") as f:
        return decode_rawgrid(f.read(), _stem(path))


def save_grid(path, grid):
    if path.endswith(PGM_SUFFIX):
        write_pgm(path, grid)
    elif path.endswith(RAWGRID_SUFFIX):
        write_rawgrid(path, grid)
    else:
        raise DatasetError(f"unknown grid file suffix (expected {' or '.join(GRID_SUFFIXES)})", [path])


def load_grid(path):
    if path.endswith(PGM_SUFFIX):
        return read_pgm(path)
    if path.endswith(RAWGRID_SUFFIX):
        return read_rawgrid(path)
    raise DatasetError(f"unknown grid file suffix (expected {' or '.join(GRID_SUFFIXES)})", [path])


def grid_suffix(dims):
    return PGM_SUFFIX if dims == 2 else RAWGRID_SUFFIX


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]
