from collections import Counter
from dataclasses import dataclass, field
from typing import List

import numpy as np


@dataclass
class ContourSet:
    """Polylines in normalized [0, 1]^2; ``closed[i]`` tells whether polyline i loops."""

    polylines: List[np.ndarray] = field(default_factory=list)
    closed: List[bool] = field(default_factory=list)

    def __len__(self):
        return len(self.polylines)

    @property
    def is_empty(self):
        return not self.polylines

    def segments(self):
        """All segments as an (S, 2, 2) array."""
        parts = []
        for line, is_closed in zip(self.polylines, self.closed):
            if len(line) < 2:
                continue
            ends = np.roll(line, -1, axis=0) if is_closed else line[1:]
            starts = line if is_closed else line[:-1]
            parts.append(np.stack([starts, ends], axis=1))
        return np.concatenate(parts) if parts else np.zeros((0, 2, 2))

    def length(self):
        seg = self.segments()
        return float(np.linalg.norm(seg[:, 1] - seg[:, 0], axis=-1).sum())

    def vertices(self):
        return np.concatenate(self.polylines) if self.polylines else np.zeros((0, 2))


@dataclass
class TriMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(self.faces) and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")

    @property
    def is_empty(self):
        return len(self.faces) == 0

    def triangle_areas(self):
        tri = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)

    def is_watertight(self):
        """Every edge is used by exactly two triangles, once in each direction."""
        if self.is_empty:
            return False
        directed = Counter()
        for a, b, c in self.faces.tolist():
            directed.update(((a, b), (b, c), (c, a)))
        for (a, b), count in directed.items():
            if count != 1 or directed.get((b, a), 0) != 1:
                return False
        return True

    def signed_volume(self):
        tri = self.vertices[self.faces]
        return float(np.einsum('ij,ij->i', tri[:, 0], np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0)


@dataclass
class PointSet:
    points: np.ndarray

    def __len__(self):
        return len(self.points)
