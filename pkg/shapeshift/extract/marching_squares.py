"""Iso-contours of a 2D field sampled at cell centres."""
import numpy as np

from .geometry import ContourSet

# corner order around a cell: (0,0) (0,1) (1,1) (1,0); edge e joins corners e and e+1
_CORNERS = np.array([[0, 0], [0, 1], [1, 1], [1, 0]])
_EDGES = [(0, 1), (1, 2), (2, 3), (3, 0)]


def _cell_segments(inside, center_inside):
    """Edge pairs crossed by the contour inside one cell."""
    crossed = [e for e, (a, b) in enumerate(_EDGES) if inside[a] != inside[b]]
    if len(crossed) == 2:
        return [tuple(crossed)]
    if len(crossed) == 4:
        # saddle: cut off the corners whose sign differs from the cell centre
        lonely = [c for c in range(4) if inside[c] != center_inside]
        return [((c - 1) % 4, c) for c in lonely]
    return []


def _edge_key(i, j, e):
    """Global id of edge e of cell (i, j) as (row, col, axis)."""
    if e == 0:
        return (i, j, 1)
    if e == 1:
        return (i, j + 1, 0)
    if e == 2:
        return (i + 1, j, 1)
    return (i, j, 0)


def to_normalized(index_points, extents, pad=0):
    """Fractional sample indices -> normalized coordinates of the unpadded field."""
    extents = np.asarray(extents, dtype=np.float64) - 2 * pad
    return (np.asarray(index_points, dtype=np.float64) - pad + 0.5) / extents


def marching_squares(field, iso=0.5, pad=0):
    """Contours of ``field`` at ``iso`` with inside (above iso) on the left of each polyline.

    Field value [i, j] sits at ((i + 0.5) / n0, (j + 0.5) / n1); ``pad`` layers
    added around the field by the caller are removed from the coordinates.
    """
    field = np.asarray(field, dtype=np.float64)
    if field.ndim != 2 or min(field.shape) < 2:
        raise ValueError(f"marching squares needs a field of at least 2x2, got {field.shape}")
    above = field > iso
    corners = np.stack([above[:-1, :-1], above[:-1, 1:], above[1:, 1:], above[1:, :-1]])
    active = np.argwhere(corners.any(axis=0) & ~corners.all(axis=0))

    position = {}
    next_key = {}
    for i, j in active.tolist():
        values = [field[i + a, j + b] for a, b in _CORNERS]
        inside = [v > iso for v in values]
        center_inside = np.mean(values) > iso
        for e1, e2 in _cell_segments(inside, center_inside):
            ends = []
            for e in (e1, e2):
                key = _edge_key(i, j, e)
                if key not in position:
                    a, b = _EDGES[e]
                    va, vb = values[a], values[b]
                    t = (iso - va) / (vb - va)
                    position[key] = np.array([i, j]) + _CORNERS[a] + t * (_CORNERS[b] - _CORNERS[a])
                ends.append(key)
            p, q = ends
            if not _inside_on_left(position[p], position[q], i, j, inside, (e1, e2)):
                p, q = q, p
            next_key[p] = q

    polylines, closed = [], []
    starts = set(next_key) - set(next_key.values())
    visited = set()
    # open chains begin where nothing flows in; the rest are loops
    for start in sorted(starts) + sorted(next_key):
        if start in visited:
            continue
        chain = [start]
        visited.add(start)
        key = start
        is_closed = False
        while key in next_key:
            key = next_key[key]
            if key == start:
                is_closed = True
                break
            if key in visited:
                break
            chain.append(key)
            visited.add(key)
        if len(chain) < 2:
            continue
        line = _dedupe(np.array([position[k] for k in chain]), is_closed)
        if len(line) >= 2:
            polylines.append(to_normalized(line, field.shape, pad))
            closed.append(is_closed)
    return ContourSet(polylines, closed)


def _inside_on_left(p, q, i, j, inside, edges):
    corner_ids = {c for e in edges for c in _EDGES[e]}
    pos = [np.array([i, j]) + _CORNERS[c] for c in corner_ids if inside[c]]
    neg = [np.array([i, j]) + _CORNERS[c] for c in corner_ids if not inside[c]]
    toward_inside = np.mean(pos, axis=0) - np.mean(neg, axis=0)
    d = q - p
    left = np.array([-d[1], d[0]])
    return float(left @ toward_inside) > 0


def _dedupe(line, is_closed):
    keep = [0]
    for k in range(1, len(line)):
        if np.linalg.norm(line[k] - line[keep[-1]]) > 1e-12:
            keep.append(k)
    line = line[keep]
    if is_closed and len(line) > 1 and np.linalg.norm(line[0] - line[-1]) <= 1e-12:
        line = line[:-1]
    return line
