"""Convex polytopes in Weyl-coordinate space.

Incremental (quickhull-flavoured) 3D convex hull with explicit handling
of degenerate inputs: coplanar point sets fall back to a 2D hull inside
their affine plane, collinear sets to a segment, and coincident sets to
a single point.  Containment for degenerate polytopes combines distance
to the affine hull with the lower-dimensional hull test.

Inputs here are small (a few thousand points per hull), so an O(n_vertex
* n_points) incremental pass with vectorized visibility tests is plenty.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyInput

__all__ = ["ConvexPolytope3", "convex_hull3"]

_RANK_TOL = 1e-6      # spatial extent below which a dimension collapses
_BUILD_EPS = 1e-9     # strict-visibility threshold during construction


@dataclass(frozen=True)
class ConvexPolytope3:
    """Convex hull as vertices plus supporting halfspaces n . x <= b.

    rank < 3 marks a degenerate (zero-volume) polytope; the halfspace
    list then contains the affine-hull plane constraints (as equality
    pairs) followed by the in-plane facet constraints.
    """

    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    rank: int

    @property
    def degenerate(self) -> bool:
        return self.rank < 3

    def contains(self, x, tol: float = 1e-8) -> bool:
        return bool(self.contains_batch(np.atleast_2d(np.asarray(x, float)), tol)[0])

    def contains_batch(self, xs: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.normals.size == 0:
            # single point
            return np.linalg.norm(xs - self.vertices[0], axis=1) <= tol
        return (xs @ self.normals.T <= self.offsets + tol).all(axis=1)

    def volume(self) -> float:
        """Euclidean volume (0 for degenerate polytopes)."""
        if self.rank < 3:
            return 0.0
        centroid = self.vertices.mean(axis=0)
        vol = 0.0
        for tri in _face_triangles(self):
            a, b, c = self.vertices[list(tri)]
            vol += abs(np.dot(np.cross(b - a, c - a), centroid - a)) / 6.0
        return vol


def convex_hull3(points: np.ndarray) -> ConvexPolytope3:
    """Hull of a point cloud in 3D, degenerate inputs allowed."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise EmptyInput("cannot hull an empty point set")
    if pts.shape[1] != 3:
        raise ValueError("points must be 3D")
    pts = np.unique(np.round(pts, 10), axis=0)

    origin = pts.mean(axis=0)
    centered = pts - origin
    # principal directions fix the affine rank
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    svals = np.pad(svals, (0, max(0, 3 - len(svals))))
    rank = int(np.sum(svals > _RANK_TOL))

    if rank == 0:
        return ConvexPolytope3(
            vertices=pts[:1],
            normals=np.zeros((0, 3)),
            offsets=np.zeros(0),
            rank=0,
        )
    if rank == 1:
        return _segment_hull(pts, origin, vt[0])
    if rank == 2:
        return _planar_hull(pts, origin, vt[:2], vt[2] if len(vt) > 2 else _ortho(vt[:2]))
    return _hull_3d(pts)


def _ortho(basis2: np.ndarray) -> np.ndarray:
    n = np.cross(basis2[0], basis2[1])
    return n / np.linalg.norm(n)


def _segment_hull(pts, origin, direction) -> ConvexPolytope3:
    t = (pts - origin) @ direction
    lo, hi = t.min(), t.max()
    v = np.vstack([origin + lo * direction, origin + hi * direction])
    # two perpendicular plane pairs pin the line, two halfspaces cap it
    perp = _perp_frame(direction)
    normals = np.vstack([perp[0], -perp[0], perp[1], -perp[1], direction, -direction])
    offsets = np.array(
        [
            perp[0] @ origin, -(perp[0] @ origin),
            perp[1] @ origin, -(perp[1] @ origin),
            direction @ origin + hi, -(direction @ origin + lo),
        ]
    )
    return ConvexPolytope3(vertices=v, normals=normals, offsets=offsets, rank=1)


def _perp_frame(direction: np.ndarray) -> np.ndarray:
    probe = np.array([1.0, 0.0, 0.0])
    if abs(direction @ probe) > 0.9:
        probe = np.array([0.0, 1.0, 0.0])
    e1 = np.cross(direction, probe)
    e1 /= np.linalg.norm(e1)
    return np.vstack([e1, np.cross(direction, e1)])


def _planar_hull(pts, origin, basis2, plane_normal) -> ConvexPolytope3:
    uv = (pts - origin) @ basis2.T
    idx = _hull_2d(uv)
    verts2 = uv[idx]
    vertices = origin + verts2 @ basis2
    # edge constraints in-plane, plus the plane itself as an equality pair
    normals = [plane_normal, -plane_normal]
    offsets = [plane_normal @ origin, -(plane_normal @ origin)]
    m = len(verts2)
    centroid2 = verts2.mean(axis=0)
    for i in range(m):
        a, b = verts2[i], verts2[(i + 1) % m]
        edge = b - a
        n2 = np.array([edge[1], -edge[0]])
        norm = np.linalg.norm(n2)
        if norm < 1e-14:
            continue
        n2 /= norm
        if n2 @ (centroid2 - a) > 0:
            n2 = -n2
        n3 = n2 @ basis2
        normals.append(n3)
        offsets.append(n3 @ vertices[i])
    return ConvexPolytope3(
        vertices=vertices,
        normals=np.asarray(normals),
        offsets=np.asarray(offsets),
        rank=2,
    )


def _hull_2d(uv: np.ndarray) -> list[int]:
    """Andrew's monotone chain; returns vertex indices in ccw order."""
    order = np.lexsort((uv[:, 1], uv[:, 0]))

    def half(indices):
        chain: list[int] = []
        for i in indices:
            while len(chain) >= 2:
                o, a = uv[chain[-2]], uv[chain[-1]]
                if np.cross(a - o, uv[i] - o) <= 1e-14:
                    chain.pop()
                else:
                    break
            chain.append(i)
        return chain

    lower = half(order)
    upper = half(order[::-1])
    return lower[:-1] + upper[:-1] if len(lower) > 1 else lower


def _initial_simplex(pts: np.ndarray) -> list[int]:
    spread = pts.max(axis=0) - pts.min(axis=0)
    ax = int(np.argmax(spread))
    i0 = int(np.argmin(pts[:, ax]))
    i1 = int(np.argmax(pts[:, ax]))
    d = pts[i1] - pts[i0]
    d /= np.linalg.norm(d)
    off = pts - pts[i0]
    perp = off - np.outer(off @ d, d)
    i2 = int(np.argmax(np.linalg.norm(perp, axis=1)))
    n = np.cross(pts[i1] - pts[i0], pts[i2] - pts[i0])
    n /= np.linalg.norm(n)
    i3 = int(np.argmax(np.abs(off @ n)))
    return [i0, i1, i2, i3]


def _hull_3d(pts: np.ndarray) -> ConvexPolytope3:
    n_pts = len(pts)
    simplex = _initial_simplex(pts)
    interior = pts[simplex].mean(axis=0)

    faces: dict[int, tuple[int, int, int]] = {}
    face_normals: dict[int, np.ndarray] = {}
    face_offsets: dict[int, float] = {}
    next_id = 0

    def add_face(tri):
        nonlocal next_id
        a, b, c = pts[tri[0]], pts[tri[1]], pts[tri[2]]
        nrm = np.cross(b - a, c - a)
        area = np.linalg.norm(nrm)
        if area < 1e-14:
            return None
        nrm = nrm / area
        off = nrm @ a
        if nrm @ interior > off:
            nrm, off = -nrm, -off
        fid = next_id
        next_id += 1
        faces[fid] = tuple(tri)
        face_normals[fid] = nrm
        face_offsets[fid] = off
        return fid

    import itertools

    for tri in itertools.combinations(simplex, 3):
        add_face(tri)

    # conflict assignment: each point tracks the face it violates most
    active = np.ones(n_pts, dtype=bool)
    active[simplex] = False

    def best_violation(point_idx, fids):
        if not fids or point_idx.size == 0:
            return np.full(point_idx.shape, -1), np.full(point_idx.shape, -np.inf)
        nm = np.array([face_normals[f] for f in fids])
        of = np.array([face_offsets[f] for f in fids])
        viol = pts[point_idx] @ nm.T - of
        j = np.argmax(viol, axis=1)
        best = viol[np.arange(len(point_idx)), j]
        fid_arr = np.array(fids)[j]
        fid_arr[best <= _BUILD_EPS] = -1
        return fid_arr, best

    assign_idx = np.where(active)[0]
    fid_arr, _ = best_violation(assign_idx, list(faces))
    conflict: dict[int, list[int]] = {f: [] for f in faces}
    for p, f in zip(assign_idx, fid_arr):
        if f >= 0:
            conflict[f].append(int(p))

    while True:
        pending = [(f, ps) for f, ps in conflict.items() if ps]
        if not pending:
            break
        fid, plist = pending[0]
        parr = np.array(plist)
        viol = pts[parr] @ face_normals[fid] - face_offsets[fid]
        p = int(parr[np.argmax(viol)])

        # visible faces for p (checked against all faces; face count is small)
        vis = [
            f
            for f in faces
            if pts[p] @ face_normals[f] - face_offsets[f] > _BUILD_EPS
        ]
        if not vis:
            conflict[fid] = [q for q in conflict[fid] if q != p]
            continue
        edge_count: dict[tuple[int, int], list] = {}
        for f in vis:
            tri = faces[f]
            for e in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = tuple(sorted(e))
                edge_count.setdefault(key, []).append(f)
        horizon = [e for e, fs in edge_count.items() if len(fs) == 1]

        orphans: list[int] = []
        for f in vis:
            orphans.extend(conflict.pop(f, []))
            del faces[f], face_normals[f], face_offsets[f]
        orphans = [q for q in orphans if q != p]

        new_ids = []
        for a, b in horizon:
            nf = add_face((a, b, p))
            if nf is not None:
                new_ids.append(nf)
                conflict[nf] = []
        if orphans:
            oarr = np.array(orphans)
            fid_arr, _ = best_violation(oarr, new_ids)
            for q, f in zip(oarr, fid_arr):
                if f >= 0:
                    conflict[f].append(int(q))

    used = sorted({i for tri in faces.values() for i in tri})
    remap = {old: new for new, old in enumerate(used)}
    vertices = pts[used]
    tris = [tuple(remap[i] for i in tri) for tri in faces.values()]
    normals = np.array([face_normals[f] for f in faces])
    offsets = np.array([face_offsets[f] for f in faces])
    normals, offsets = _dedupe_planes(normals, offsets)
    poly = ConvexPolytope3(
        vertices=vertices, normals=normals, offsets=offsets, rank=3
    )
    object.__setattr__(poly, "_tris", tris)
    return poly


def _dedupe_planes(normals: np.ndarray, offsets: np.ndarray):
    key = np.round(np.column_stack([normals, offsets]), 8)
    _, idx = np.unique(key, axis=0, return_index=True)
    idx = np.sort(idx)
    return normals[idx], offsets[idx]


def _face_triangles(poly: ConvexPolytope3):
    tris = getattr(poly, "_tris", None)
    if tris is not None:
        return tris
    # reconstructed polytopes (e.g. loaded from JSON): fan-triangulate
    # each facet's coplanar vertices around the facet centroid
    out = []
    for n, b in zip(poly.normals, poly.offsets):
        on_face = np.where(np.abs(poly.vertices @ n - b) <= 1e-7)[0]
        if len(on_face) < 3:
            continue
        pts = poly.vertices[on_face]
        centroid = pts.mean(axis=0)
        e1 = pts[0] - centroid
        nrm = np.linalg.norm(e1)
        if nrm < 1e-12:
            continue
        e1 /= nrm
        e2 = np.cross(n, e1)
        ang = np.arctan2((pts - centroid) @ e2, (pts - centroid) @ e1)
        order = on_face[np.argsort(ang)]
        for i in range(1, len(order) - 1):
            out.append((order[0], order[i], order[i + 1]))
    return out
