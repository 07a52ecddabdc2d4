"""Simplicial mesh representation: tetrahedral in 3D, triangular in 2D.

Topology (element adjacency, oriented boundary faces) is built eagerly;
boundary feature maps (vertex/edge incidence) are cached lazily and
invalidated when vertex positions change.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import DegenerateFace, NonManifold, ZeroNormal

BOUNDARY = -1

# Local face k is opposite element vertex k; the listed order gives an
# outward normal when the element has positive signed volume.
LOCAL_FACES_3D = ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1))
LOCAL_FACES_2D = ((1, 2), (2, 0), (0, 1))


@dataclass(frozen=True)
class BoundaryFeature:
    """Where a closest point sits on a boundary face.

    kind is 'face', 'edge', or 'vertex'. For 'edge', verts is the global
    vertex pair; for 'vertex' it is a 1-tuple. face_id always names the
    boundary face the point was computed on.
    """

    kind: str
    face_id: int
    verts: tuple = ()


def local_faces(dim):
    return LOCAL_FACES_3D if dim == 3 else LOCAL_FACES_2D


def build_adjacency(elements):
    """Element adjacency from an (m, dim+1) index array.

    Returns (adjacency, adj_local): neighbor element id (BOUNDARY where
    none) and the neighbor's local index of the shared face, both aligned
    with the local face numbering (face k opposite vertex k).

    Raises NonManifold if any face is shared by more than two elements.
    """
    elements = np.asarray(elements, dtype=np.int64)
    dim = elements.shape[1] - 1
    lf = local_faces(dim)
    n_elem = len(elements)
    adjacency = np.full((n_elem, dim + 1), BOUNDARY, dtype=np.int64)
    adj_local = np.full((n_elem, dim + 1), -1, dtype=np.int64)
    face_owner = {}
    for e in range(n_elem):
        elem = elements[e]
        for k, idx in enumerate(lf):
            key = tuple(sorted(int(elem[i]) for i in idx))
            prev = face_owner.get(key)
            if prev is not None:
                other, ok = prev
                if other is None:
                    raise NonManifold(key, [e])
                adjacency[e, k] = other
                adj_local[e, k] = ok
                adjacency[other, ok] = e
                adj_local[other, ok] = k
                face_owner[key] = (None, None)  # seen twice; a third owner errors
            else:
                face_owner[key] = (e, k)
    return adjacency, adj_local


class SimplicialMesh:
    def __init__(self, vertices, elements, names=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.elements = np.ascontiguousarray(elements, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] not in (2, 3):
            raise ValueError("vertices must be (n, 2) or (n, 3)")
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("vertex coordinates must be finite")
        self.dim = self.vertices.shape[1]
        if self.elements.ndim != 2 or self.elements.shape[1] != self.dim + 1:
            raise ValueError("elements must be (m, dim+1)")
        if self.elements.size and (
            self.elements.min() < 0 or self.elements.max() >= len(self.vertices)
        ):
            from .errors import IndexOutOfRange

            raise IndexOutOfRange("element references a vertex out of range")
        self.names = dict(names) if names else {}
        self.version = 0
        self._build_topology()
        self._refresh_geometry()

    # -- construction ------------------------------------------------------

    def _build_topology(self):
        lf = local_faces(self.dim)
        n_elem = len(self.elements)
        self.adjacency, self.adj_local = build_adjacency(self.elements)

        boundary = []
        owners = []
        owner_local = []
        self._boundary_id_of = {}
        for e in range(n_elem):
            elem = self.elements[e]
            for k, idx in enumerate(lf):
                if self.adjacency[e, k] == BOUNDARY:
                    self._boundary_id_of[(e, k)] = len(boundary)
                    boundary.append([int(elem[i]) for i in idx])
                    owners.append(e)
                    owner_local.append(k)
        self.boundary_faces = np.asarray(boundary, dtype=np.int64).reshape(-1, self.dim)
        self.boundary_owner = np.asarray(owners, dtype=np.int64)
        self.boundary_owner_local = np.asarray(owner_local, dtype=np.int64)

    def _refresh_geometry(self):
        vols = np.empty(len(self.elements))
        for e in range(len(self.elements)):
            vols[e] = geometry.signed_volume_of(self.vertices[self.elements[e]])
        self.signed_volumes = vols
        self.inverted_flags = vols < 0.0
        self.degenerate_flags = vols == 0.0
        self._boundary_cache = None

    def set_vertices(self, vertices):
        """Replace vertex positions. Invalidates cached geometry; any BVH
        built over this mesh must be refit by the caller."""
        vertices = np.ascontiguousarray(vertices, dtype=float)
        if vertices.shape != self.vertices.shape:
            raise ValueError("vertex array shape must not change")
        self.vertices = vertices
        self.version += 1
        self._refresh_geometry()

    # -- basic queries -----------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_boundary_faces(self):
        return len(self.boundary_faces)

    def signed_volume(self, e):
        return float(self.signed_volumes[e])

    def element_skipped(self, e):
        """Inverted or degenerate elements are excluded from candidate
        generation and collision detection."""
        return bool(self.inverted_flags[e] or self.degenerate_flags[e])

    @property
    def boundary_face_skipped(self):
        """Per boundary face: owner is inverted or degenerate."""
        return self.inverted_flags[self.boundary_owner] | self.degenerate_flags[
            self.boundary_owner
        ]

    @property
    def has_inverted_interior(self):
        owns_boundary = np.zeros(len(self.elements), dtype=bool)
        owns_boundary[self.boundary_owner] = True
        bad = self.inverted_flags | self.degenerate_flags
        return bool(np.any(bad & ~owns_boundary))

    def element_contains(self, e, p, tol=0.0):
        b = geometry.barycentric_coords(p, self.vertices[self.elements[e]])
        return bool(np.all(np.isfinite(b)) and np.all(b >= -tol))

    def locate_point(self, p, tol=1e-12):
        """Linear scan point location; returns the first containing element
        or None. Test / setup helper, not a runtime fast path."""
        for e in range(len(self.elements)):
            if self.element_skipped(e):
                continue
            if self.element_contains(e, p, tol):
                return e
        return None

    def boundary_face_vertices(self, face_id):
        return self.vertices[self.boundary_faces[face_id]]

    def boundary_face_normal(self, face_id):
        """Outward area-weighted normal (not unit) of a boundary face, per
        the owning element's orientation."""
        v = self.boundary_face_vertices(face_id)
        if self.dim == 3:
            return geometry.triangle_area_normal(v[0], v[1], v[2])
        return geometry.edge_outward_normal_2d(v[0], v[1])

    # -- boundary feature topology ------------------------------------------

    def _boundary_topology(self):
        if self._boundary_cache is None:
            vertex_faces = {}
            edge_faces = {}
            vertex_neighbors = {}
            for fid, face in enumerate(self.boundary_faces):
                face = [int(g) for g in face]
                for g in face:
                    vertex_faces.setdefault(g, []).append(fid)
                n = len(face)
                for i in range(n if self.dim == 3 else 1):
                    a, b = face[i], face[(i + 1) % n]
                    edge_faces.setdefault((min(a, b), max(a, b)), []).append(fid)
                    vertex_neighbors.setdefault(a, set()).add(b)
                    vertex_neighbors.setdefault(b, set()).add(a)
            self._boundary_cache = (vertex_faces, edge_faces, vertex_neighbors)
        return self._boundary_cache

    def boundary_vertex_neighbors(self, gv):
        return sorted(self._boundary_topology()[2].get(gv, ()))

    def boundary_faces_of_vertex(self, gv):
        return list(self._boundary_topology()[0].get(gv, ()))

    def boundary_faces_of_edge(self, a, b):
        key = (min(int(a), int(b)), max(int(a), int(b)))
        return list(self._boundary_topology()[1].get(key, ()))

    def boundary_faces_containing_vertex(self, gv):
        return set(self.boundary_faces_of_vertex(gv))

    # -- closest point / normals ---------------------------------------------

    def closest_point_on_face(self, p, face_id, feature_tol=1e-12):
        """Euclidean closest point to p on a boundary face, with feature
        classification. A point within feature_tol * diameter of an edge or
        vertex is classified as that feature."""
        gids = self.boundary_faces[face_id]
        verts = self.vertices[gids]
        if self.dim == 3:
            diam = max(
                np.linalg.norm(verts[1] - verts[0]),
                np.linalg.norm(verts[2] - verts[1]),
                np.linalg.norm(verts[0] - verts[2]),
            )
            if diam == 0.0 or np.linalg.norm(
                geometry.triangle_area_normal(*verts)
            ) <= 1e-30 * max(diam, 1.0):
                raise DegenerateFace(f"boundary face {face_id} is degenerate")
            q, _ = geometry.closest_point_on_triangle(p, *verts)
            tol = feature_tol * diam
            for i in range(3):
                if np.linalg.norm(q - verts[i]) <= tol:
                    return q, BoundaryFeature("vertex", face_id, (int(gids[i]),))
            for i in range(3):
                a, b = verts[i], verts[(i + 1) % 3]
                eq, _ = geometry.closest_point_on_segment(q, a, b)
                if np.linalg.norm(q - eq) <= tol:
                    pair = (int(gids[i]), int(gids[(i + 1) % 3]))
                    return q, BoundaryFeature("edge", face_id, pair)
            return q, BoundaryFeature("face", face_id)
        diam = float(np.linalg.norm(verts[1] - verts[0]))
        if diam == 0.0:
            raise DegenerateFace(f"boundary face {face_id} is degenerate")
        q, t = geometry.closest_point_on_segment(p, verts[0], verts[1])
        tol = feature_tol * diam
        for i in range(2):
            if np.linalg.norm(q - verts[i]) <= tol:
                return q, BoundaryFeature("vertex", face_id, (int(gids[i]),))
        return q, BoundaryFeature("face", face_id)

    def pseudo_normal(self, feature):
        """Unit outward normal at a boundary feature: the face normal on a
        face interior, the area-weighted average of adjacent boundary face
        normals on an edge or vertex."""
        if feature.kind == "face":
            n = self.boundary_face_normal(feature.face_id)
        elif feature.kind == "edge":
            fids = self.boundary_faces_of_edge(*feature.verts)
            n = sum(self.boundary_face_normal(f) for f in fids)
        elif feature.kind == "vertex":
            fids = self.boundary_faces_of_vertex(feature.verts[0])
            n = sum(self.boundary_face_normal(f) for f in fids)
        else:
            raise ValueError(f"unknown feature kind {feature.kind!r}")
        norm = float(np.linalg.norm(n))
        if norm == 0.0:
            raise ZeroNormal(f"pseudo-normal vanishes at {feature}")
        return n / norm


class TetMesh(SimplicialMesh):
    def __init__(self, vertices, elements, names=None):
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ValueError("TetMesh needs 3D vertices")
        super().__init__(vertices, elements, names)


class TriMesh2(SimplicialMesh):
    def __init__(self, vertices, elements, names=None):
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError("TriMesh2 needs 2D vertices")
        super().__init__(vertices, elements, names)


def make_mesh(vertices, elements, names=None):
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape[1] == 3:
        return TetMesh(vertices, elements, names)
    return TriMesh2(vertices, elements, names)
