"""Robust topological ray traversal.

Decides whether the straight segment from a boundary point to an interior
point is covered by a chain of face-adjacent elements. Numerical ties near
vertices/edges branch the traversal instead of failing; loops are cut with
a recently-visited ring and recovered from via the candidate face stack;
an optional backward mode handles inverted interior elements.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry
from .errors import ZeroLengthSegment
from .mesh import BOUNDARY, local_faces


@dataclass(frozen=True)
class RayFrame:
    """Ray origin plus an orthonormal frame; u (and v in 3D) span the plane
    perpendicular to the ray direction."""

    origin: np.ndarray
    direction: np.ndarray
    u: np.ndarray
    v: np.ndarray | None  # None in 2D
    length: float  # |target - origin|


def make_ray_frame(origin, target):
    origin = np.asarray(origin, dtype=float)
    target = np.asarray(target, dtype=float)
    delta = target - origin
    length = float(np.linalg.norm(delta))
    if length <= 1e-14:
        raise ZeroLengthSegment("origin and target coincide")
    d = delta / length
    if len(d) == 3:
        u, v = geometry.orthonormal_basis(d)
    else:
        u, v = geometry.perpendicular_2d(d), None
    return RayFrame(origin=origin, direction=d, u=u, v=v, length=length)


@dataclass
class TraversalConfig:
    epsilon_i: float = 1e-10
    visited_capacity: int = 16
    static_stack_capacity: int = 32
    allow_backward: bool = False
    cutoff_factor: float = 2.0
    intersection_free_early_out: bool = False
    trace: bool = False

    def __post_init__(self):
        if self.visited_capacity < 4:
            raise ValueError("visited_capacity must be >= 4")
        if self.cutoff_factor < 1.0:
            raise ValueError("cutoff_factor must be >= 1")
        if self.epsilon_i < 0.0:
            raise ValueError("epsilon_i must be >= 0")


class _VisitedRing:
    """Fixed-capacity circular list of recently entered elements; promoted
    to an unbounded set when the static stacks overflow."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.ring = []
        self.head = 0
        self.overflow = None

    def reset(self):
        self.ring.clear()
        self.head = 0
        self.overflow = None

    def add(self, e):
        if self.overflow is not None:
            self.overflow.add(e)
            return
        if len(self.ring) < self.capacity:
            self.ring.append(e)
        else:
            self.ring[self.head] = e
            self.head = (self.head + 1) % self.capacity

    def promote(self):
        if self.overflow is None:
            self.overflow = set(self.ring)

    def __contains__(self, e):
        if self.overflow is not None:
            return e in self.overflow
        return e in self.ring


@dataclass
class TraversalScratch:
    """Caller-owned reusable buffers; one per in-flight traversal."""

    config: TraversalConfig = field(default_factory=TraversalConfig)
    face_stack: list = field(default_factory=list)
    elem_stack: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    def __post_init__(self):
        self.visited = _VisitedRing(self.config.visited_capacity)

    def reset(self, config):
        self.face_stack.clear()
        self.elem_stack.clear()
        self.trace.clear()
        if self.visited.capacity != config.visited_capacity:
            self.visited = _VisitedRing(config.visited_capacity)
        else:
            self.visited.reset()


@dataclass
class TraversalResult:
    valid: bool
    reason: str  # 'reached' | 'hit_boundary' | 'exhausted'
    end_element: int = -1
    elements_visited: int = 0
    steps: int = 0
    loop_events: int = 0
    budget_breached: bool = False


def exit_face_selection(mesh, element, in_local, frame, epsilon_i):
    """Local indices of the faces the ray may exit through, given that it
    entered `element` through local face `in_local`.

    The sign tests run on vertex positions projected to the plane
    perpendicular to the ray, using the orientation sign of the projected
    incoming face, so they stay correct for inverted elements and backward
    rays. With the tolerance, several faces can pass near vertices/edges;
    an empty set signals numerical starvation.
    """
    elem = mesh.elements[element]
    order = local_faces(mesh.dim)[in_local]
    verts = mesh.vertices
    o = frame.origin
    eps = epsilon_i
    if mesh.dim == 3:
        u, v = frame.u, frame.v
        proj = []
        for i in order:
            x = verts[elem[i]] - o
            proj.append((float(np.dot(x, u)), float(np.dot(x, v))))
        x3 = verts[elem[in_local]] - o
        p3 = (float(np.dot(x3, u)), float(np.dot(x3, v)))
        e01 = (proj[1][0] - proj[0][0], proj[1][1] - proj[0][1])
        e02 = (proj[2][0] - proj[0][0], proj[2][1] - proj[0][1])
        det = geometry.det2(e01, e02)
        if abs(det) <= eps:
            # the entry face projects to a (near-)degenerate triangle: the
            # ray grazes along its plane (e.g. a path hugging a flat
            # boundary patch). The side tests below would inherit an
            # arbitrary roundoff sign, so branch into every face instead.
            return [int(k) for k in order]
        sgn = np.sign(det)
        d = [sgn * geometry.det2(p3, q) for q in proj]
        out = []
        if d[1] >= -eps and d[2] <= eps:
            out.append(int(order[0]))  # face opposite incoming vertex 0
        if d[2] >= -eps and d[0] <= eps:
            out.append(int(order[1]))
        if d[0] >= -eps and d[1] <= eps:
            out.append(int(order[2]))
        return out
    u = frame.u
    p0 = float(np.dot(verts[elem[order[0]]] - o, u))
    p1 = float(np.dot(verts[elem[order[1]]] - o, u))
    p2 = float(np.dot(verts[elem[in_local]] - o, u))
    # the ray projects to the origin; an edge is a possible exit when its
    # projected interval contains it. Interval containment (rather than a
    # side test against p2 alone) keeps the vertex-tie branches when the
    # ray passes through an endpoint of the incoming edge.
    out = []
    if min(p1, p2) <= eps and max(p1, p2) >= -eps:
        out.append(int(order[0]))  # edge opposite incoming vertex 0
    if min(p0, p2) <= eps and max(p0, p2) >= -eps:
        out.append(int(order[1]))
    return out


def _crossing_parameter(mesh, element, lf, frame):
    """Ray parameter where the ray line crosses the plane of a face.

    Falls back to the projection of the face centroid for near-parallel
    faces; only used for cutoffs and trace output, never for validity."""
    face = mesh.elements[element][list(local_faces(mesh.dim)[lf])]
    pts = mesh.vertices[face]
    d = frame.direction
    if mesh.dim == 3:
        n = geometry.triangle_area_normal(pts[0], pts[1], pts[2])
    else:
        n = geometry.edge_outward_normal_2d(pts[0], pts[1])
    denom = float(np.dot(n, d))
    scale = float(np.linalg.norm(n))
    if abs(denom) <= 1e-14 * max(scale, 1.0):
        return float(np.dot(pts.mean(axis=0) - frame.origin, d))
    return float(np.dot(n, pts[0] - frame.origin)) / denom


def is_valid_path(
    mesh, s, start_face, p, p_element_hint=None, config=None, scratch=None
):
    """Whether the segment from boundary point s (on boundary face
    `start_face`) to p is a valid path. Traversal always launches from the
    boundary end. Raises ZeroLengthSegment when s and p coincide."""
    if config is None:
        config = TraversalConfig()
    frame = make_ray_frame(s, p)
    if scratch is None:
        scratch = TraversalScratch(config)
    return _traverse(mesh, frame, start_face, p, config, scratch)


def is_valid_path_inverted(
    mesh, s, start_face, p, p_element_hint=None, config=None, scratch=None
):
    """Backward-enabled variant for meshes with inverted interior elements.

    Callers never start from an inverted boundary element (those are
    skipped as candidates)."""
    if config is None:
        config = TraversalConfig()
    if not config.allow_backward:
        config = replace(config, allow_backward=True)
    return is_valid_path(mesh, s, start_face, p, p_element_hint, config, scratch)


def _traverse(mesh, frame, start_face, p, config, scratch):
    eps = config.epsilon_i
    adjacency = mesh.adjacency
    adj_local = mesh.adj_local
    scratch.reset(config)
    visited = scratch.visited
    faces = scratch.face_stack
    elems = scratch.elem_stack

    e0 = int(mesh.boundary_owner[start_face])
    k0 = int(mesh.boundary_owner_local[start_face])
    visited.add(e0)
    n_visited = 1
    steps = 0
    loops = 0
    if config.trace:
        scratch.trace.append((e0, k0, 0.0, 0))
    if mesh.element_contains(e0, p, eps):
        return TraversalResult(True, "reached", e0, n_visited, steps, loops)

    for lf in exit_face_selection(mesh, e0, k0, frame, eps):
        faces.append(lf)
        elems.append(e0)

    # Faces per element bounds legitimate work; the extra factor absorbs
    # branching near ties before the breach flag trips.
    budget = max(8 * mesh.n_elements * (mesh.dim + 1), 256)
    cutoff = config.cutoff_factor * frame.length
    dynamic = False
    hit_boundary = False

    while faces:
        steps += 1
        if steps > budget:
            return TraversalResult(
                False, "exhausted", -1, n_visited, steps, loops, budget_breached=True
            )
        lf = faces.pop()
        e = elems.pop()
        nb = int(adjacency[e, lf])
        if nb == BOUNDARY:
            # the branch exits the mesh; tie branches may still reach p
            hit_boundary = True
            continue
        if nb in visited:
            loops += 1
            continue
        if config.allow_backward:
            if abs(_crossing_parameter(mesh, e, lf, frame)) > cutoff:
                continue
        elif config.intersection_free_early_out:
            # distance from s, not signed parameter: a branch running behind
            # the origin is just as dead under the no-intersection assumption
            if abs(_crossing_parameter(mesh, e, lf, frame)) > frame.length:
                continue
        visited.add(nb)
        n_visited += 1
        in_local = int(adj_local[e, lf])
        if config.trace:
            scratch.trace.append(
                (nb, in_local, _crossing_parameter(mesh, e, lf, frame), len(faces))
            )
        if mesh.element_contains(nb, p, eps):
            return TraversalResult(True, "reached", nb, n_visited, steps, loops)
        for lf2 in exit_face_selection(mesh, nb, in_local, frame, eps):
            faces.append(lf2)
            elems.append(nb)
        if not dynamic and len(faces) > config.static_stack_capacity:
            dynamic = True
            visited.promote()

    reason = "hit_boundary" if hit_boundary else "exhausted"
    return TraversalResult(False, reason, -1, n_visited, steps, loops)


def format_trace(trace):
    """Line-delimited trace records: element, entry face, ray parameter,
    branch depth."""
    return "\n".join(
        f"element={e} entry_face={f} t={t:.17g} depth={d}" for e, f, t, d in trace
    )
