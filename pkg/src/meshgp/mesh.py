"""Triangle meshes, the cotangent Laplace operator, its eigenbasis, and
on-surface geodesic distances.

The Laplace operator is assembled from cotangent edge weights with a
barycentric lumped mass matrix (one third of the incident triangle area per
vertex).  The sign convention keeps the stiffness matrix positive
semidefinite, so the discrete operator acting on vertex values ``u`` is
``-(M^-1 C u)`` and the eigenproblem ``C phi = lambda M phi`` yields the
nonnegative spectrum of the negated surface Laplacian.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.sparse.linalg import eigsh

from .errors import (
    DegenerateFaceError,
    DisconnectedMeshError,
    NonTriangleFaceError,
    OFFParseError,
)

# Faces thinner than this fraction of the squared bounding-box diagonal are
# rejected at construction time.
DEGENERATE_AREA_FRACTION = 1e-12


class TriMesh:
    """An immutable triangle mesh with a connected edge graph.

    Parameters
    ----------
    vertices : (N, 3) array_like
        Vertex coordinates.
    faces : (F, 3) array_like
        Triangles as vertex-index triples into ``vertices``.

    Raises
    ------
    DegenerateFaceError
        If a face repeats a vertex or its area is numerically zero.
    DisconnectedMeshError
        If the edge graph has more than one component.
    """

    def __init__(self, vertices, faces):
        v = np.asarray(vertices, dtype=float)
        f = np.asarray(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (N, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise ValueError(f"faces must be (F, 3), got {f.shape}")
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        if len(f) == 0:
            raise ValueError("mesh has no faces")

        if any(len(set(face)) != 3 for face in f.tolist()):
            raise DegenerateFaceError("face with repeated vertex indices")

        areas = _face_areas(v, f)
        bbox_diag_sq = float(np.sum((v.max(axis=0) - v.min(axis=0)) ** 2))
        if np.any(areas < DEGENERATE_AREA_FRACTION * bbox_diag_sq):
            bad = int(np.argmin(areas))
            raise DegenerateFaceError(
                f"face {bad} has area {areas[bad]:.3e}, below tolerance"
            )

        self.vertices = v
        self.faces = f
        self.face_areas = areas
        self.edge_graph = _edge_length_graph(v, f)

        n_comp, _ = connected_components(self.edge_graph, directed=False)
        if n_comp != 1:
            raise DisconnectedMeshError(f"edge graph has {n_comp} components")

        self.vertices.flags.writeable = False
        self.faces.flags.writeable = False
        self.face_areas.flags.writeable = False

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_faces(self):
        return len(self.faces)

    @property
    def total_area(self):
        return float(self.face_areas.sum())

    def __repr__(self):
        return f"TriMesh(N={self.num_vertices}, F={self.num_faces})"


@dataclass
class LaplaceOperator:
    """Cotangent stiffness matrix and lumped (diagonal) mass matrix.

    ``stiffness`` is symmetric positive semidefinite with zero row sums;
    ``mass`` holds the strictly positive lumped vertex areas.
    """

    stiffness: sparse.csr_matrix
    mass: np.ndarray

    @property
    def num_vertices(self):
        return len(self.mass)

    def apply(self, u):
        """Evaluate the discrete surface Laplacian ``-(M^-1 C u)``."""
        return -(self.stiffness @ u) / self.mass


@dataclass
class SpectralBasis:
    """The lowest eigenpairs of the generalized problem ``C phi = lambda M phi``.

    ``eigenvectors`` has one mass-orthonormal column per eigenvalue
    (``Phi.T @ diag(mass) @ Phi = I``), eigenvalues sorted ascending.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass: np.ndarray

    @property
    def count(self):
        return len(self.eigenvalues)


@dataclass
class GeodesicField:
    """Single-source shortest-path distances along mesh edges."""

    source: int
    distances: np.ndarray


def _face_areas(v, f):
    cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    return 0.5 * np.linalg.norm(cross, axis=1)


def _edge_length_graph(v, f):
    """Sparse symmetric matrix of Euclidean edge lengths."""
    n = len(v)
    i = np.concatenate([f[:, 0], f[:, 1], f[:, 2], f[:, 1], f[:, 2], f[:, 0]])
    j = np.concatenate([f[:, 1], f[:, 2], f[:, 0], f[:, 0], f[:, 1], f[:, 2]])
    pattern = sparse.coo_matrix(
        (np.ones(len(i), dtype=bool), (i, j)), shape=(n, n)
    ).tocsr()
    rows, cols = pattern.nonzero()
    lengths = np.linalg.norm(v[rows] - v[cols], axis=1)
    return sparse.csr_matrix((lengths, (rows, cols)), shape=(n, n))


def load_mesh(path):
    """Read an ASCII OFF file into a :class:`TriMesh`.

    Only triangle faces are accepted.  Comment lines (``#``) and blank
    lines are ignored; a count line ``N F E`` must follow the ``OFF``
    header.

    Raises
    ------
    OFFParseError
        On any structural problem with the file.
    NonTriangleFaceError
        If a face does not have exactly three vertices.
    """
    try:
        with open(path, "r") as fh:
            raw = fh.read()
    except OSError as exc:
        raise OFFParseError(f"cannot read {path}: {exc}") from exc

    tokens = []
    for line in raw.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens:
        raise OFFParseError("empty file")
    if tokens[0] != "OFF":
        raise OFFParseError(f"missing OFF header, found {tokens[0]!r}")

    pos = 1
    try:
        n_vert, n_face = int(tokens[pos]), int(tokens[pos + 1])
        pos += 3  # skip the (unused) edge count
    except (IndexError, ValueError) as exc:
        raise OFFParseError("malformed counts line") from exc
    if n_vert <= 0 or n_face <= 0:
        raise OFFParseError("vertex and face counts must be positive")

    need = 3 * n_vert
    if len(tokens) < pos + need:
        raise OFFParseError("truncated vertex block")
    try:
        verts = np.array(tokens[pos : pos + need], dtype=float).reshape(n_vert, 3)
    except ValueError as exc:
        raise OFFParseError("non-numeric vertex coordinate") from exc
    pos += need

    faces = np.empty((n_face, 3), dtype=np.int64)
    for k in range(n_face):
        try:
            cnt = int(tokens[pos])
        except (IndexError, ValueError) as exc:
            raise OFFParseError(f"malformed face line {k}") from exc
        if cnt != 3:
            raise NonTriangleFaceError(f"non-triangle face with {cnt} vertices")
        try:
            faces[k] = [int(t) for t in tokens[pos + 1 : pos + 4]]
        except (IndexError, ValueError) as exc:
            raise OFFParseError(f"malformed face line {k}") from exc
        pos += 4

    if faces.min() < 0 or faces.max() >= n_vert:
        raise OFFParseError("face index out of range")
    return TriMesh(verts, faces)


def save_mesh(mesh, path):
    """Write a :class:`TriMesh` as an ASCII OFF file."""
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.num_vertices} {mesh.num_faces} 0\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        for a, b, c in mesh.faces:
            fh.write(f"3 {a} {b} {c}\n")


def cotan_laplacian(mesh):
    """Assemble the cotangent stiffness and barycentric lumped mass matrix.

    Off-diagonal stiffness entries are ``-(cot a + cot b)/2`` over the one
    or two triangles sharing an edge; diagonals make each row sum to zero.
    The mass diagonal is one third of the incident triangle area.
    """
    v, f = mesh.vertices, mesh.faces
    n = mesh.num_vertices

    rows, cols, vals = [], [], []
    for corner in range(3):
        # edge (j, k) lies opposite the angle at vertex i
        i = f[:, corner]
        j = f[:, (corner + 1) % 3]
        k = f[:, (corner + 2) % 3]
        e1 = v[j] - v[i]
        e2 = v[k] - v[i]
        cross = np.linalg.norm(np.cross(e1, e2), axis=1)
        if np.any(cross <= 0):
            raise DegenerateFaceError("zero-area triangle in cotangent assembly")
        cot = np.einsum("ij,ij->i", e1, e2) / cross
        w = 0.5 * cot
        rows.extend([j, k])
        cols.extend([k, j])
        vals.extend([-w, -w])

    C = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    diag = -np.asarray(C.sum(axis=1)).ravel()
    C = C + sparse.diags(diag)

    mass = np.zeros(n)
    third = mesh.face_areas / 3.0
    for corner in range(3):
        np.add.at(mass, f[:, corner], third)

    return LaplaceOperator(stiffness=C.tocsr(), mass=mass)


def spectral_basis(lap, count):
    """Solve ``C phi = lambda M phi`` for the ``count`` smallest eigenpairs.

    Works through the symmetric transform ``M^-1/2 C M^-1/2`` so the
    returned eigenvectors are mass-orthonormal.  Eigenvector signs are
    fixed by making the largest-magnitude component positive, and tiny
    negative eigenvalues from round-off are clamped to zero.
    """
    n = lap.num_vertices
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    if np.any(lap.mass <= 0):
        raise ValueError("mass matrix has a non-positive entry")

    inv_sqrt_m = 1.0 / np.sqrt(lap.mass)

    use_iterative = n > 800 and count <= n // 4
    if use_iterative:
        try:
            vals, vecs = _eigs_iterative(lap, count)
        except Exception:
            vals, vecs = _eigs_dense(lap, count, inv_sqrt_m)
    else:
        vals, vecs = _eigs_dense(lap, count, inv_sqrt_m)

    order = np.argsort(vals)
    vals = np.maximum(vals[order], 0.0)
    vecs = vecs[:, order]

    # reproducible sign: largest-magnitude component is positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs

    return SpectralBasis(eigenvalues=vals, eigenvectors=vecs, mass=lap.mass.copy())


def _eigs_dense(lap, count, inv_sqrt_m):
    A = lap.stiffness.toarray() * inv_sqrt_m[:, None] * inv_sqrt_m[None, :]
    A = 0.5 * (A + A.T)
    vals, psi = eigh(A, subset_by_index=[0, count - 1])
    return vals, inv_sqrt_m[:, None] * psi


def _eigs_iterative(lap, count):
    C = lap.stiffness.tocsc()
    M = sparse.diags(lap.mass).tocsc()
    # small negative shift keeps the shift-inverted matrix definite
    sigma = -1e-8 * float(lap.stiffness.diagonal().mean())
    vals, vecs = eigsh(C, k=count, M=M, sigma=sigma, which="LM")
    return vals, vecs


def max_eigenvalue(lap):
    """Largest eigenvalue of ``M^-1 C``, used for explicit-step stability."""
    n = lap.num_vertices
    inv_sqrt_m = 1.0 / np.sqrt(lap.mass)
    if n <= 400:
        A = lap.stiffness.toarray() * inv_sqrt_m[:, None] * inv_sqrt_m[None, :]
        A = 0.5 * (A + A.T)
        return float(eigh(A, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])
    D = sparse.diags(inv_sqrt_m)
    A = (D @ lap.stiffness @ D).tocsc()
    return float(eigsh(A, k=1, which="LA", return_eigenvectors=False)[0])


def geodesic_distances(mesh, source):
    """Exact single-source shortest-path distances on the edge graph."""
    n = mesh.num_vertices
    if not 0 <= source < n:
        raise ValueError(f"source {source} out of range [0, {n})")
    d = dijkstra(mesh.edge_graph, directed=False, indices=source)
    if not np.all(np.isfinite(d)):
        raise DisconnectedMeshError(f"vertex unreachable from {source}")
    return GeodesicField(source=int(source), distances=d)


def geodesic_distance_matrix(mesh, sources):
    """Shortest-path distances from each source vertex, one row per source."""
    sources = np.asarray(sources, dtype=np.int64)
    if sources.size == 0:
        return np.empty((0, mesh.num_vertices))
    d = dijkstra(mesh.edge_graph, directed=False, indices=sources)
    if not np.all(np.isfinite(d)):
        raise DisconnectedMeshError("unreachable vertex in geodesic sweep")
    return np.atleast_2d(d)


def write_geodesic_csv(field, path):
    """Export a geodesic field as ``vertex_id,distance`` rows."""
    with open(path, "w") as fh:
        fh.write("vertex_id,distance\n")
        for i, d in enumerate(field.distances):
            fh.write(f"{i},{float(d)!r}\n")
