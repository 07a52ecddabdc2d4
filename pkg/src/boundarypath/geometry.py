"""Low-level geometric predicates for simplicial meshes in 2D and 3D."""

import numpy as np

from .errors import DegenerateFace, ZeroLengthSegment


def signed_volume_of(verts):
    """Signed volume of a tetrahedron (4x3 array) or signed area of a
    triangle (3x2 array)."""
    verts = np.asarray(verts, dtype=float)
    if verts.shape == (4, 3):
        a = verts[1] - verts[0]
        b = verts[2] - verts[0]
        c = verts[3] - verts[0]
        return float(np.dot(a, np.cross(b, c))) / 6.0
    if verts.shape == (3, 2):
        a = verts[1] - verts[0]
        b = verts[2] - verts[0]
        return float(a[0] * b[1] - a[1] * b[0]) / 2.0
    raise ValueError(f"bad simplex shape {verts.shape}")


def barycentric_coords(p, verts):
    """Barycentric coordinates of p w.r.t. a simplex (tet in 3D, tri in 2D).

    Solved as a small linear system; degenerate simplices give large or
    non-finite coordinates, which callers treat as 'outside'.
    """
    verts = np.asarray(verts, dtype=float)
    p = np.asarray(p, dtype=float)
    d = verts.shape[1]
    A = (verts[1:] - verts[0]).T
    try:
        x = np.linalg.solve(A, p - verts[0])
    except np.linalg.LinAlgError:
        return np.full(d + 1, np.inf)
    out = np.empty(d + 1)
    out[1:] = x
    out[0] = 1.0 - x.sum()
    return out


def point_in_simplex(p, verts, tol=0.0):
    b = barycentric_coords(p, verts)
    return bool(np.all(np.isfinite(b)) and np.all(b >= -tol))


def closest_point_on_segment(p, a, b):
    """Closest point to p on segment ab; returns (point, t) with t in [0,1]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom == 0.0:
        return a.copy(), 0.0
    t = float(np.dot(np.asarray(p, dtype=float) - a, ab)) / denom
    t = min(1.0, max(0.0, t))
    return a + t * ab, t


def closest_point_on_triangle(p, a, b, c):
    """Closest point to p on triangle abc (3D). Returns (point, bary).

    Region classification after Ericson's real-time collision detection
    formulation; bary is (u, v, w) w.r.t. (a, b, c).
    """
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = float(np.dot(ab, ap))
    d2 = float(np.dot(ac, ap))
    if d1 <= 0.0 and d2 <= 0.0:
        return a.copy(), np.array([1.0, 0.0, 0.0])

    bp = p - b
    d3 = float(np.dot(ab, bp))
    d4 = float(np.dot(ac, bp))
    if d3 >= 0.0 and d4 <= d3:
        return b.copy(), np.array([0.0, 1.0, 0.0])

    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        denom = d1 - d3
        v = d1 / denom if denom != 0.0 else 0.0
        return a + v * ab, np.array([1.0 - v, v, 0.0])

    cp = p - c
    d5 = float(np.dot(ab, cp))
    d6 = float(np.dot(ac, cp))
    if d6 >= 0.0 and d5 <= d6:
        return c.copy(), np.array([0.0, 0.0, 1.0])

    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        denom = d2 - d6
        w = d2 / denom if denom != 0.0 else 0.0
        return a + w * ac, np.array([1.0 - w, 0.0, w])

    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        denom = (d4 - d3) + (d5 - d6)
        w = (d4 - d3) / denom if denom != 0.0 else 0.0
        return b + w * (c - b), np.array([0.0, 1.0 - w, w])

    denom = va + vb + vc
    if denom == 0.0:
        raise DegenerateFace("triangle has (near-)zero area")
    v = vb / denom
    w = vc / denom
    return a + ab * v + ac * w, np.array([1.0 - v - w, v, w])


def triangle_area_normal(a, b, c):
    """Cross-product normal; its magnitude is twice the triangle area."""
    return np.cross(np.asarray(b, float) - a, np.asarray(c, float) - a)


def edge_outward_normal_2d(a, b):
    """Outward normal of a boundary edge a->b of a CCW-oriented triangle."""
    d = np.asarray(b, float) - np.asarray(a, float)
    return np.array([d[1], -d[0]])


def orthonormal_basis(direction):
    """Two unit vectors orthogonal to each other and to a unit direction.

    Branchless construction following Duff et al.'s frame-building trick.
    """
    d = np.asarray(direction, dtype=float)
    sign = 1.0 if d[2] >= 0.0 else -1.0
    a = -1.0 / (sign + d[2])
    b = d[0] * d[1] * a
    u = np.array([1.0 + sign * d[0] * d[0] * a, sign * b, -sign * d[0]])
    v = np.array([b, sign + d[1] * d[1] * a, -d[1]])
    return u, v


def perpendicular_2d(direction):
    d = np.asarray(direction, dtype=float)
    return np.array([-d[1], d[0]])


def normalize(v, zero_length_error=False):
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        if zero_length_error:
            raise ZeroLengthSegment("cannot normalize zero vector")
        return v.copy()
    return v / n


def det2(a, b):
    return a[0] * b[1] - a[1] * b[0]
