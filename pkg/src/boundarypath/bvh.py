"""Axis-aligned bounding box hierarchies.

One tree type backs both the boundary-face hierarchy (shrinking-radius
closest-primitive enumeration) and the element-level hierarchy used by
discrete collision detection. Trees support O(n) refit after vertex
motion; rebuild is only needed on topology change.
"""

import heapq

import numpy as np

from .errors import EmptyBoundary


class AabbTree:
    """Binary AABB tree, median split on the longest centroid axis.

    Nodes are stored in arrays with children after their parent, so a
    reverse sweep refits the tree bottom-up.
    """

    def __init__(self, boxes):
        boxes = np.asarray(boxes, dtype=float)
        n = len(boxes)
        if n == 0:
            raise ValueError("cannot build a tree over zero primitives")
        self.n_prims = n
        max_nodes = 2 * n - 1
        self.lo = np.empty((max_nodes, boxes.shape[2]))
        self.hi = np.empty((max_nodes, boxes.shape[2]))
        self.left = np.full(max_nodes, -1, dtype=np.int64)
        self.right = np.full(max_nodes, -1, dtype=np.int64)
        self.prim = np.full(max_nodes, -1, dtype=np.int64)
        self._n_nodes = 0
        centroids = 0.5 * (boxes[:, 0] + boxes[:, 1])
        # iterative build: (node index, primitive id array)
        root = self._alloc()
        stack = [(root, np.arange(n))]
        while stack:
            node, ids = stack.pop()
            sub = boxes[ids]
            self.lo[node] = sub[:, 0].min(axis=0)
            self.hi[node] = sub[:, 1].max(axis=0)
            if len(ids) == 1:
                self.prim[node] = ids[0]
                continue
            cen = centroids[ids]
            axis = int(np.argmax(cen.max(axis=0) - cen.min(axis=0)))
            order = np.argsort(cen[:, axis], kind="stable")
            half = len(ids) // 2
            l, r = self._alloc(), self._alloc()
            self.left[node] = l
            self.right[node] = r
            stack.append((l, ids[order[:half]]))
            stack.append((r, ids[order[half:]]))

    def _alloc(self):
        i = self._n_nodes
        self._n_nodes += 1
        return i

    def refit(self, boxes):
        boxes = np.asarray(boxes, dtype=float)
        for node in range(self._n_nodes - 1, -1, -1):
            pid = self.prim[node]
            if pid >= 0:
                self.lo[node] = boxes[pid, 0]
                self.hi[node] = boxes[pid, 1]
            else:
                l, r = self.left[node], self.right[node]
                self.lo[node] = np.minimum(self.lo[l], self.lo[r])
                self.hi[node] = np.maximum(self.hi[l], self.hi[r])

    def _box_dist(self, node, p):
        d = np.maximum(self.lo[node] - p, 0.0) + np.maximum(p - self.hi[node], 0.0)
        return float(np.linalg.norm(d))

    def box_overlap(self, lo, hi):
        """Primitive ids whose boxes intersect [lo, hi]."""
        out = []
        stack = [0]
        while stack:
            node = stack.pop()
            if np.any(self.lo[node] > hi) or np.any(self.hi[node] < lo):
                continue
            pid = self.prim[node]
            if pid >= 0:
                out.append(int(pid))
            else:
                stack.append(int(self.left[node]))
                stack.append(int(self.right[node]))
        return out

    def containing_point(self, p):
        return self.box_overlap(p, p)


class NearPrimIter:
    """Best-first enumeration of primitives by lower-bound distance to a
    point. `shrink(r)` tightens the search radius; nodes farther than the
    current radius are pruned. Yields each primitive at most once, in
    non-decreasing lower-bound order."""

    def __init__(self, tree, point, radius=np.inf):
        self.tree = tree
        self.point = np.asarray(point, dtype=float)
        self.radius = float(radius)
        self._heap = [(tree._box_dist(0, self.point), 0)]
        self._count = 0

    def shrink(self, radius):
        if radius < self.radius:
            self.radius = float(radius)

    def __iter__(self):
        return self

    def __next__(self):
        tree = self.tree
        while self._heap:
            dist, node = heapq.heappop(self._heap)
            if dist > self.radius:
                self._heap.clear()
                break
            pid = tree.prim[node]
            if pid >= 0:
                return int(pid), dist
            for child in (int(tree.left[node]), int(tree.right[node])):
                d = tree._box_dist(child, self.point)
                if d <= self.radius:
                    heapq.heappush(self._heap, (d, child))
        raise StopIteration


def _face_boxes(mesh):
    pts = mesh.vertices[mesh.boundary_faces]  # (m, dim, dim)
    return np.stack([pts.min(axis=1), pts.max(axis=1)], axis=1)


def _element_boxes(mesh):
    pts = mesh.vertices[mesh.elements]
    return np.stack([pts.min(axis=1), pts.max(axis=1)], axis=1)


class BoundaryBvh:
    """Hierarchy over boundary faces for closest-candidate enumeration."""

    def __init__(self, mesh):
        if mesh.n_boundary_faces == 0:
            raise EmptyBoundary("mesh has no boundary faces")
        self.tree = AabbTree(_face_boxes(mesh))
        self.mesh_version = mesh.version

    def refit(self, mesh):
        self.tree.refit(_face_boxes(mesh))
        self.mesh_version = mesh.version

    def nearest_faces(self, point, radius=np.inf):
        return NearPrimIter(self.tree, point, radius)


def build_boundary_bvh(mesh):
    return BoundaryBvh(mesh)


class ElementBvh:
    """Hierarchy over elements for point-in-element and edge-vs-element
    collision candidate queries."""

    def __init__(self, mesh):
        if mesh.n_elements == 0:
            raise ValueError("mesh has no elements")
        self.tree = AabbTree(_element_boxes(mesh))
        self.mesh_version = mesh.version

    def refit(self, mesh):
        self.tree.refit(_element_boxes(mesh))
        self.mesh_version = mesh.version

    def elements_containing(self, point):
        return self.tree.containing_point(np.asarray(point, dtype=float))

    def elements_overlapping(self, lo, hi):
        return self.tree.box_overlap(np.asarray(lo, float), np.asarray(hi, float))
