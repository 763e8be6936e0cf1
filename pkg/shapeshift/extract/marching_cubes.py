"""Iso-surfaces of a 3D field sampled at cell centres.

The 256-entry case table is built once by walking the iso-crossings around
the six faces of the cube. On every face each crossing segment is oriented
so that the above-iso side lies to its left when seen from outside the
cube; an ambiguous face always isolates its above-iso corners. Because the
rule only looks at the four values on a face, neighbouring cubes agree on
their shared face and the resulting mesh is closed wherever the above-iso
region stays off the field border.
"""
import functools
import itertools
import logging

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .geometry import TriMesh
from .marching_squares import to_normalized

logger = logging.getLogger(__name__)

# corner c sits at offset (c & 1, c >> 1 & 1, c >> 2 & 1) along axes (0, 1, 2)
CORNER_OFFSETS = np.array([[c & 1, (c >> 1) & 1, (c >> 2) & 1] for c in range(8)])
EDGES = [(a, b) for a in range(8) for b in range(a + 1, 8) if bin(a ^ b).count("1") == 1]
EDGE_AXIS = [int(np.log2(a ^ b)) for a, b in EDGES]
_EDGE_INDEX = {pair: e for e, pair in enumerate(EDGES)}

# crossings this close to a lattice point (in cell units) are placed on it
WELD_EPS = 1e-9
DEGENERATE_AREA = 1e-12


def _faces():
    """(corners in cyclic order, outward normal) for each cube face."""
    faces = []
    for axis in range(3):
        u, v = [a for a in range(3) if a != axis]
        for side in (0, 1):
            base = side << axis
            ring = [base, base | 1 << u, base | 1 << u | 1 << v, base | 1 << v]
            normal = np.zeros(3)
            normal[axis] = 1 if side else -1
            faces.append((ring, normal))
    return faces


def _edge(a, b):
    return _EDGE_INDEX[(min(a, b), max(a, b))]


def _midpoint(e):
    a, b = EDGES[e]
    return (CORNER_OFFSETS[a] + CORNER_OFFSETS[b]) / 2.0


def _face_segments(config, ring, normal):
    inside = [bool(config >> c & 1) for c in ring]
    crossed = [k for k in range(4) if inside[k] != inside[(k + 1) % 4]]
    if len(crossed) == 2:
        pairs = [tuple(crossed)]
    elif len(crossed) == 4:
        pairs = [((k - 1) % 4, k) for k in range(4) if inside[k]]
    else:
        return []
    segments = []
    for k1, k2 in pairs:
        corners = {ring[k1], ring[(k1 + 1) % 4], ring[k2], ring[(k2 + 1) % 4]}
        pos = np.mean([CORNER_OFFSETS[c] for c in corners if config >> c & 1], axis=0)
        neg = np.mean([CORNER_OFFSETS[c] for c in corners if not config >> c & 1], axis=0)
        p = _edge(ring[k1], ring[(k1 + 1) % 4])
        q = _edge(ring[k2], ring[(k2 + 1) % 4])
        if np.cross(_midpoint(q) - _midpoint(p), normal) @ (pos - neg) < 0:
            p, q = q, p
        segments.append((p, q))
    return segments


def _case_triangles(config):
    successor = {}
    for ring, normal in _faces():
        for p, q in _face_segments(config, ring, normal):
            assert p not in successor, f"edge {p} leaves twice in case {config}"
            successor[p] = q
    triangles = []
    remaining = dict(successor)
    while remaining:
        start = min(remaining)
        cycle = [start]
        e = remaining.pop(start)
        while e != start:
            cycle.append(e)
            e = remaining.pop(e)
        for k in range(1, len(cycle) - 1):
            triangles.append((cycle[0], cycle[k], cycle[k + 1]))
    return triangles


@functools.lru_cache(maxsize=1)
def case_table():
    """Triangles (as edge-index triples) for each of the 256 corner configurations."""
    return tuple(tuple(_case_triangles(config)) for config in range(256))


def _rotations():
    """The 24 proper rotations of the cube as corner permutations."""
    perms = set()
    for axes in itertools.permutations(range(3)):
        for flips in itertools.product((0, 1), repeat=3):
            m = np.zeros((3, 3), dtype=int)
            for row, (col, flip) in enumerate(zip(axes, flips)):
                m[row, col] = -1 if flip else 1
            if round(np.linalg.det(m)) != 1:
                continue
            perm = []
            for c in range(8):
                x = 2 * CORNER_OFFSETS[c] - 1
                y = (m @ x + 1) // 2
                perm.append(int(y[0] | y[1] << 1 | y[2] << 2))
            perms.add(tuple(perm))
    return sorted(perms)


def case_classes():
    """Orbits of the 256 configurations under rotation and complement (the classic base cases)."""
    rotations = _rotations()
    seen, classes = set(), []
    for config in range(256):
        if config in seen:
            continue
        orbit = set()
        for perm in rotations:
            image = sum(1 << perm[c] for c in range(8) if config >> c & 1)
            orbit.update((image, image ^ 0xFF))
        seen |= orbit
        classes.append(sorted(orbit))
    return classes


def marching_cubes(field, iso=0.5, pad=0):
    """Triangle mesh of the ``iso`` level set of ``field``; normals point away from the above-iso side.

    Crossings that land on a lattice point are welded into one vertex and triangles of area
    at most 1e-12 are collapsed away, so the mesh stays closed when the field has exact ties.
    """
    field = np.asarray(field, dtype=np.float64)
    if field.ndim != 3 or min(field.shape) < 2:
        raise ValueError(f"marching cubes needs a field of at least 2x2x2, got {field.shape}")
    above = field > iso
    n0, n1, n2 = field.shape
    config = np.zeros((n0 - 1, n1 - 1, n2 - 1), dtype=np.int64)
    for c, (a, b, d) in enumerate(CORNER_OFFSETS):
        config |= above[a:n0 - 1 + a, b:n1 - 1 + b, d:n2 - 1 + d].astype(np.int64) << c

    table = case_table()
    lower = np.array([CORNER_OFFSETS[a] for a, _ in EDGES])
    tris = []
    for case in np.unique(config):
        if not table[case]:
            continue
        cells = np.argwhere(config == case)
        local = np.asarray(table[case])  # (T, 3) edge indices
        # global edge id: lattice point of the edge's lower corner, times 3, plus axis
        points = cells[:, None, :] + lower[None, :, :]
        flat = (points[..., 0] * n1 + points[..., 1]) * n2 + points[..., 2]
        edge_ids = flat * 3 + np.array(EDGE_AXIS)[None, :]
        tris.append(edge_ids[:, local].reshape(-1, 3))
    if not tris:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    tri_keys = np.concatenate(tris)
    unique, inverse = np.unique(tri_keys, return_inverse=True)
    faces = inverse.reshape(-1, 3)

    axis = unique % 3
    lattice = unique // 3
    start = np.stack(np.unravel_index(lattice, field.shape), axis=-1)
    end = start.copy()
    end[np.arange(len(end)), axis] += 1
    v0 = field[tuple(start.T)]
    v1 = field[tuple(end.T)]
    t = np.clip((iso - v0) / (v1 - v0), 0.0, 1.0)
    t = np.where(t < WELD_EPS, 0.0, np.where(t > 1.0 - WELD_EPS, 1.0, t))
    # a crossing on a lattice point is one vertex for every edge that meets there
    end_lattice = np.ravel_multi_index(tuple(end.T), field.shape)
    on_point = np.where(t == 0.0, lattice, np.where(t == 1.0, end_lattice, -1))
    keys = np.where(on_point >= 0, -1 - on_point, unique)
    keys, first, welded = np.unique(keys, return_index=True, return_inverse=True)
    index_points = start[first] + t[first, None] * (end[first] - start[first])
    vertices = to_normalized(index_points, field.shape, pad)
    faces = welded.reshape(-1)[faces]
    return _compact(TriMesh(vertices, _collapse_degenerate(vertices, faces)))


def _drop_collapsed(faces):
    keep = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 2] != faces[:, 0])
    return faces[keep]


def _cancel_opposite_pairs(faces):
    """Remove pairs of coincident triangles wound in opposite directions."""
    if len(faces) < 2:
        return faces
    rolled = faces[np.arange(len(faces))[:, None], (faces.argmin(axis=1)[:, None] + np.arange(3)) % 3]
    forward = rolled[:, 1] < rolled[:, 2]
    key = np.stack([rolled[:, 0], rolled[:, 1:].min(axis=1), rolled[:, 1:].max(axis=1)], axis=1)
    _, group = np.unique(key, axis=0, return_inverse=True)
    group = group.reshape(-1)
    keep = np.ones(len(faces), dtype=bool)
    for g in np.unique(group[np.bincount(group)[group] > 1]):
        members = np.flatnonzero(group == g)
        fwd, bwd = members[forward[members]], members[~forward[members]]
        pairs = min(len(fwd), len(bwd))
        keep[fwd[:pairs]] = False
        keep[bwd[:pairs]] = False
    return faces[keep]


def _collapse_degenerate(vertices, faces):
    """Merge the ends of the shortest edge of every near-zero-area triangle until none is left.

    Merging a vertex pair collapses the triangles on both sides of the edge at once, so the
    surrounding triangles stay paired edge for edge.
    """
    n = len(vertices)
    while True:
        faces = _cancel_opposite_pairs(_drop_collapsed(faces))
        degenerate = np.flatnonzero(TriMesh(vertices, faces).triangle_areas() <= DEGENERATE_AREA)
        if not len(degenerate):
            return faces
        logger.debug(f"collapsing {len(degenerate)} degenerate triangles")
        tri = faces[degenerate]
        corners = vertices[tri]
        lengths = np.linalg.norm(np.roll(corners, -1, axis=1) - corners, axis=-1)
        k = lengths.argmin(axis=1)
        a, b = tri[np.arange(len(tri)), k], tri[np.arange(len(tri)), (k + 1) % 3]
        merges = sparse.coo_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
        _, labels = csgraph.connected_components(merges, directed=False)
        representative = np.full(labels.max() + 1, n)
        np.minimum.at(representative, labels, np.arange(n))
        faces = representative[labels][faces]


def _compact(mesh):
    if mesh.is_empty:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    used, faces = np.unique(mesh.faces, return_inverse=True)
    return TriMesh(mesh.vertices[used], faces.reshape(-1, 3))
