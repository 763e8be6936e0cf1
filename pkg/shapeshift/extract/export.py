import numpy as np

from .geometry import ContourSet, PointSet, TriMesh


def write_obj(path, mesh, comment=None):
    with open(path, "w") as f:
        if comment:
            f.write(f"# {comment}\n")
        for x, y, z in mesh.vertices:
            f.write(f"v {x:.9g} {y:.9g} {z:.9g}\n")
        for a, b, c in mesh.faces + 1:
            f.write(f"f {a} {b} {c}\n")


def read_obj(path):
    vertices, faces = [], []
    with open(path) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return TriMesh(np.array(vertices).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def write_xyz(path, points):
    points = points.points if isinstance(points, PointSet) else np.asarray(points)
    np.savetxt(path, points, fmt="%.9g")


def read_xyz(path):
    return PointSet(np.atleast_2d(np.loadtxt(path)))


def write_svg(path, contours, size=256, comment=None):
    """Contours as SVG paths; point (p0, p1) maps to x = p1 * size, y = p0 * size."""
    paths = []
    for line, closed in zip(contours.polylines, contours.closed):
        coords = " L ".join(f"{p[1] * size:.3f} {p[0] * size:.3f}" for p in line)
        paths.append(f'  <path d="M {coords}{" Z" if closed else ""}" fill="none" stroke="black" stroke-width="1"/>')
    header = f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">'
    body = [header]
    if comment:
        body.append(f"  <!-- {comment} -->")
    body += paths + ["</svg>"]
    with open(path, "w") as f:
        f.write("\n".join(body) + "\n")
