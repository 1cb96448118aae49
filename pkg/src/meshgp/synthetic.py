"""Deterministic synthetic meshes for benchmarks, demos, and tests."""

import numpy as np

from .mesh import TriMesh


def tetrahedron():
    """Regular tetrahedron, the smallest closed triangle mesh."""
    v = np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    )
    f = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    return TriMesh(v, f)


def unit_square_grid(n):
    """Regular n-by-n vertex triangulation of the unit square in the z=0 plane.

    Each grid cell is split along the same diagonal, giving right triangles
    whose cotangent weights reduce to the classic five-point stencil.
    """
    if n < 2:
        raise ValueError("need at least a 2x2 vertex grid")
    xs = np.linspace(0.0, 1.0, n)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    v = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(n * n)])

    faces = []
    for i in range(n - 1):
        for j in range(n - 1):
            a = i * n + j
            b = a + 1
            c = a + n
            d = c + 1
            faces.append([a, b, d])
            faces.append([a, d, c])
    return TriMesh(v, np.array(faces))


def bent_tube(subdivisions=3, tube_radius=0.35, half_length=2.0,
              bend_degrees=240.0):
    """Horseshoe-shaped closed surface: an elongated icosphere bent into an
    arc.

    The two ends sit close together in space but far apart along the
    surface, so straight-line distance badly misrepresents on-surface
    proximity -- the geometry that separates a surface-aware covariance
    from a chord-distance one.
    """
    base = icosphere(subdivisions, radius=1.0)
    v = base.vertices.copy()
    v[:, 0] *= tube_radius
    v[:, 1] *= tube_radius
    v[:, 2] *= half_length

    total_angle = np.radians(bend_degrees)
    bend_radius = 2.0 * half_length / total_angle
    phi = v[:, 2] / bend_radius
    r = bend_radius + v[:, 1]
    bent = np.column_stack([v[:, 0], r * np.cos(phi) - bend_radius, r * np.sin(phi)])
    return TriMesh(bent, base.faces)


def icosphere(subdivisions=3, radius=1.0):
    """Geodesic sphere from repeated midpoint subdivision of an icosahedron.

    ``subdivisions`` of 2, 3, 4 give 162, 642, and 2562 vertices.
    """
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in verts]

    for _ in range(subdivisions):
        midpoint = {}

        def split(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in midpoint:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = split(a, b), split(b, c), split(c, a)
            new_faces.extend(
                [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
            )
        faces = new_faces

    v = radius * np.array(verts)
    return TriMesh(v, np.array(faces))
