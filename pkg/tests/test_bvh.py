import numpy as np
import pytest

from boundarypath import shapes
from boundarypath.bvh import AabbTree, BoundaryBvh, ElementBvh, NearPrimIter
from boundarypath.errors import EmptyBoundary
from boundarypath.mesh import make_mesh


def brute_face_distance(mesh, f, p):
    q, _ = mesh.closest_point_on_face(p, f)
    return float(np.linalg.norm(q - p))


def test_cube_center_enumerates_all(cube):
    bvh = BoundaryBvh(cube)
    hits = list(bvh.nearest_faces(np.full(3, 0.5)))
    assert len(hits) == 12
    # lower bounds non-decreasing
    lbs = [lb for _, lb in hits]
    assert lbs == sorted(lbs)


def test_radius_pruning_never_drops_close_faces(cube):
    p = np.full(3, 0.5)
    bvh = BoundaryBvh(cube)
    got = {f for f, _ in bvh.nearest_faces(p, radius=0.6)}
    for f in range(cube.n_boundary_faces):
        if brute_face_distance(cube, f, p) < 0.6:
            assert f in got


def test_lower_bound_is_a_lower_bound(folded3d, rng):
    bvh = BoundaryBvh(folded3d)
    for _ in range(20):
        p = rng.normal(size=3)
        for f, lb in bvh.nearest_faces(p, radius=1.0):
            assert lb <= brute_face_distance(folded3d, f, p) + 1e-12


def test_shrink_stops_enumeration(cube):
    it = NearPrimIter(BoundaryBvh(cube).tree, np.full(3, 0.5))
    first = next(it)
    it.shrink(first[1])  # nothing can beat the current lower bound
    remaining = list(it)
    assert all(lb <= first[1] for _, lb in remaining)


def test_refit_translation(cube):
    mesh = make_mesh(cube.vertices, cube.elements)
    bvh = BoundaryBvh(mesh)
    before = {f for f, _ in bvh.nearest_faces(np.full(3, 0.5), radius=0.51)}
    mesh.set_vertices(mesh.vertices + np.array([1.0, 0, 0]))
    bvh.refit(mesh)
    after = {f for f, _ in bvh.nearest_faces(np.array([1.5, 0.5, 0.5]), radius=0.51)}
    assert before == after


def test_empty_boundary_raises():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], float)
    mesh = make_mesh(verts, np.array([[0, 1, 2, 3]]))
    mesh.boundary_faces = mesh.boundary_faces[:0]

    class Empty:
        n_boundary_faces = 0

    with pytest.raises(EmptyBoundary):
        BoundaryBvh(Empty())


def test_element_bvh_containment(grid3d, rng):
    bvh = ElementBvh(grid3d)
    for _ in range(20):
        p = rng.random(3)
        cands = bvh.elements_containing(p)
        truth = grid3d.locate_point(p)
        if truth is not None:
            assert truth in cands


def test_box_overlap_matches_brute(grid3d):
    bvh = ElementBvh(grid3d)
    lo, hi = np.array([0.2, 0.2, 0.2]), np.array([0.5, 0.4, 0.6])
    got = set(bvh.elements_overlapping(lo, hi))
    for e in range(grid3d.n_elements):
        pts = grid3d.vertices[grid3d.elements[e]]
        overlaps = np.all(pts.max(axis=0) >= lo) and np.all(pts.min(axis=0) <= hi)
        assert (e in got) == overlaps


def test_single_primitive_tree():
    tree = AabbTree(np.array([[[0.0, 0.0], [1.0, 1.0]]]))
    assert tree.containing_point(np.array([0.5, 0.5])) == [0]
    assert tree.containing_point(np.array([2.0, 0.5])) == []
