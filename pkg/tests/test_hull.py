"""Convex hull construction and containment, including degenerate inputs."""
import numpy as np
import pytest

from basisgate.exceptions import EmptyInput
from basisgate.hull import convex_hull3


def brute_inside(points, x):
    """Oracle: x in conv(points) iff barycentric weights exist (LP feasibility)."""
    from scipy.optimize import linprog

    v = np.asarray(points)
    a_eq = np.vstack([v.T, np.ones(len(v))])
    b_eq = np.append(x, 1.0)
    res = linprog(np.zeros(len(v)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None))
    return res.status == 0


CUBE = np.array(
    [[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float
)


class TestFullRankHull:
    def test_cube_corners_with_center(self):
        pts = np.vstack([CUBE, [[0.5, 0.5, 0.5]]])
        poly = convex_hull3(pts)
        assert poly.rank == 3
        assert len(poly.vertices) == 8
        assert len(poly.normals) == 6
        assert poly.volume() == pytest.approx(1.0, abs=1e-9)

    def test_every_vertex_satisfies_halfspaces(self):
        rng = np.random.default_rng(40)
        pts = rng.normal(size=(500, 3))
        poly = convex_hull3(pts)
        slack = poly.vertices @ poly.normals.T - poly.offsets
        assert slack.max() <= 1e-9
        assert poly.contains_batch(poly.vertices).all()

    def test_interior_points_contained(self):
        rng = np.random.default_rng(41)
        pts = rng.normal(size=(200, 3))
        poly = convex_hull3(pts)
        assert poly.contains_batch(pts, tol=1e-8).all()
        outside = pts * 3.0 + np.array([10.0, 0, 0])
        assert not poly.contains_batch(outside).any()

    def test_random_points_in_tetrahedron(self):
        rng = np.random.default_rng(42)
        corners = np.array(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float
        )
        # barycentric samples, corners included so the hull is the simplex
        w = rng.dirichlet(np.ones(4) * 0.7, size=1000)
        pts = np.vstack([w @ corners, corners])
        poly = convex_hull3(pts)
        assert poly.volume() == pytest.approx(1.0 / 6.0, abs=1e-9)
        assert sorted(map(tuple, np.round(poly.vertices, 9).tolist())) == sorted(
            map(tuple, corners.tolist())
        )

    def test_matches_brute_membership(self):
        rng = np.random.default_rng(43)
        pts = rng.normal(size=(60, 3))
        poly = convex_hull3(pts)
        probes = rng.normal(size=(40, 3)) * 0.8
        for x in probes:
            assert poly.contains(x, tol=1e-7) == brute_inside(pts, x)


class TestDegenerateHulls:
    def test_single_point(self):
        poly = convex_hull3(np.tile([[1.0, 2.0, 3.0]], (5, 1)))
        assert poly.rank == 0
        assert poly.contains([1.0, 2.0, 3.0])
        assert not poly.contains([1.0, 2.0, 3.1])

    def test_segment(self):
        t = np.linspace(0, 1, 17)[:, None]
        pts = t * np.array([[1.0, 1.0, 0.0]])
        poly = convex_hull3(pts)
        assert poly.rank == 1
        assert poly.contains([0.5, 0.5, 0.0])
        assert not poly.contains([0.5, 0.5, 0.2])
        assert not poly.contains([1.5, 1.5, 0.0])

    def test_planar_set(self):
        rng = np.random.default_rng(44)
        uv = rng.uniform(-1, 1, size=(300, 2))
        basis = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]]) / np.array([[1.0], [np.sqrt(2)]])
        pts = uv @ basis
        poly = convex_hull3(pts)
        assert poly.rank == 2
        assert poly.contains(0.2 * basis[0] + 0.3 * basis[1])
        assert not poly.contains([0.0, 0.5, -0.5])  # off-plane
        assert not poly.contains(5.0 * basis[0])    # in-plane, outside hull

    def test_planar_set_with_noise_within_tol(self):
        rng = np.random.default_rng(45)
        uv = rng.uniform(0, 1, size=(200, 2))
        pts = np.column_stack([uv, rng.uniform(-1e-8, 1e-8, 200)])
        poly = convex_hull3(pts)
        assert poly.rank == 2
        assert poly.contains([0.5, 0.5, 0.0])

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            convex_hull3(np.zeros((0, 3)))


class TestHullSoundness:
    def test_hull_never_loses_its_data(self):
        rng = np.random.default_rng(46)
        for trial in range(10):
            pts = rng.normal(size=(rng.integers(5, 400), 3))
            poly = convex_hull3(pts)
            assert poly.contains_batch(pts, tol=1e-8).all(), trial
