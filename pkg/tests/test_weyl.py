"""Invariant and coordinate arithmetic, checked against brute-force oracles."""
import numpy as np
import pytest

from basisgate.exceptions import NonUnitaryInput
from basisgate.gates import (
    CNOT,
    I4,
    ISWAP,
    MAGIC,
    SWAP,
    WEYL_B,
    WEYL_CNOT,
    WEYL_IDENTITY,
    WEYL_ISWAP,
    WEYL_SQISWAP,
    WEYL_SWAP,
    canonical,
    kron2,
)
from basisgate.weyl import (
    WeylPoint,
    canonical_coordinate,
    canonical_coordinates_batch,
    coordinate_distance,
    haar_random_local,
    haar_random_unitary4,
    haar_random_unitary4_batch,
    in_weyl_chamber,
    invariants_from_coordinate,
    makhlin_invariants,
    makhlin_invariants_batch,
    makhlin_loss,
)

PI = np.pi


def oracle_invariants(u):
    """Independent evaluation of the defining magic-basis formula."""
    m4 = MAGIC.conj().T @ u @ MAGIC
    m = m4.T @ m4
    det = np.linalg.det(u)
    g1 = np.trace(m) ** 2 / (16 * det)
    g2 = (np.trace(m) ** 2 - np.trace(m @ m)) / (4 * det)
    return np.array([g1.real, g1.imag, g2.real])


class TestMakhlinInvariants:
    def test_identity(self):
        assert np.allclose(makhlin_invariants(I4).as_array(), [1, 0, 3], atol=1e-12)

    def test_cnot(self):
        assert np.allclose(makhlin_invariants(CNOT).as_array(), [0, 0, 1], atol=1e-12)

    def test_swap(self):
        assert np.allclose(makhlin_invariants(SWAP).as_array(), [-1, 0, -3], atol=1e-12)

    def test_matches_oracle_on_random_unitaries(self):
        rng = np.random.default_rng(3)
        us = haar_random_unitary4_batch(rng, 50)
        got = makhlin_invariants_batch(us)
        want = np.array([oracle_invariants(u) for u in us])
        assert np.abs(got - want).max() < 1e-10

    def test_local_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            u = haar_random_unitary4(rng)
            k1, k2 = haar_random_local(rng)
            k3, k4 = haar_random_local(rng)
            dressed = kron2(k1, k2) @ u @ kron2(k3, k4)
            diff = makhlin_invariants(u).as_array() - makhlin_invariants(dressed).as_array()
            assert np.abs(diff).max() < 1e-8

    def test_rejects_non_unitary(self):
        with pytest.raises(NonUnitaryInput):
            makhlin_invariants(np.ones((4, 4), dtype=complex))


class TestCanonicalCoordinate:
    @pytest.mark.parametrize(
        "gate,point",
        [
            (I4, WEYL_IDENTITY),
            (CNOT, WEYL_CNOT),
            (ISWAP, WEYL_ISWAP),
            (SWAP, WEYL_SWAP),
        ],
    )
    def test_named_gates(self, gate, point):
        got = canonical_coordinate(gate)
        assert coordinate_distance(got, np.asarray(point)) < 1e-10

    def test_round_trip_canonical_gates(self):
        rng = np.random.default_rng(5)
        pts = [WEYL_CNOT, WEYL_ISWAP, WEYL_SWAP, WEYL_B, WEYL_SQISWAP]
        while len(pts) < 60:
            c1 = rng.uniform(0, PI)
            c2 = rng.uniform(0, min(c1, PI - c1))
            c3 = rng.uniform(0, c2)
            pts.append((c1, c2, c3))
        for c in pts:
            got = canonical_coordinate(canonical(*c)).as_array()
            want = np.asarray(c)
            # floor points may legitimately mirror to the left half
            if want[2] < 1e-7 and want[0] > PI / 2:
                want = np.array([PI - want[0], want[1], want[2]])
            assert np.abs(got - want).max() < 1e-7, (c, got)

    def test_local_invariance_of_coordinates(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            u = haar_random_unitary4(rng)
            k1, k2 = haar_random_local(rng)
            k3, k4 = haar_random_local(rng)
            dressed = kron2(k1, k2) @ u @ kron2(k3, k4)
            d = coordinate_distance(canonical_coordinate(u), canonical_coordinate(dressed))
            assert d < 1e-7

    def test_conjugate_mirror(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            u = haar_random_unitary4(rng)
            c = canonical_coordinate(u)
            cm = canonical_coordinate(u.conj())
            assert coordinate_distance(cm, c.mirror()) < 1e-7

    def test_coordinates_live_in_chamber(self):
        rng = np.random.default_rng(8)
        cs = canonical_coordinates_batch(haar_random_unitary4_batch(rng, 2000))
        assert in_weyl_chamber(cs).all()

    def test_consistent_with_invariants(self):
        rng = np.random.default_rng(9)
        us = haar_random_unitary4_batch(rng, 300)
        cs = canonical_coordinates_batch(us)
        want = makhlin_invariants_batch(us)
        got = invariants_from_coordinate(cs)
        assert np.abs(got - want).max() < 1e-7


class TestHaarSampling:
    def test_unitarity(self):
        rng = np.random.default_rng(10)
        us = haar_random_unitary4_batch(rng, 200)
        eye = np.eye(4)
        err = np.linalg.norm(us @ np.conj(np.swapaxes(us, -1, -2)) - eye, axis=(1, 2))
        assert err.max() < 1e-10

    def test_trace_moment(self):
        # E |tr U|^2 = 1 for the Haar measure on U(n)
        rng = np.random.default_rng(11)
        us = haar_random_unitary4_batch(rng, 100_000)
        m = np.mean(np.abs(np.trace(us, axis1=1, axis2=2)) ** 2)
        assert abs(m - 1.0) < 0.02

    def test_seed_determinism(self):
        a = haar_random_unitary4(np.random.default_rng(42))
        b = haar_random_unitary4(np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_local_pair(self):
        rng = np.random.default_rng(12)
        k1, k2 = haar_random_local(rng)
        for k in (k1, k2):
            assert np.linalg.norm(k @ k.conj().T - np.eye(2)) < 1e-10


class TestMakhlinLoss:
    def test_zero_for_same_class(self):
        target = makhlin_invariants(CNOT)
        assert makhlin_loss(CNOT, target) == 0

    def test_locally_dressed_cnot(self):
        rng = np.random.default_rng(13)
        target = makhlin_invariants(CNOT)
        for _ in range(50):
            k1, k2 = haar_random_local(rng)
            k3, k4 = haar_random_local(rng)
            dressed = kron2(k1, k2) @ CNOT @ kron2(k3, k4)
            assert makhlin_loss(dressed, target) < 1e-14

    def test_identity_to_cnot_is_five(self):
        # |1-0|^2 + 0 + |3-1|^2 from the two invariant triples
        target = makhlin_invariants(CNOT)
        assert abs(makhlin_loss(I4, target) - 5.0) < 1e-12


class TestWeylPoint:
    def test_mirror_on_floor_resolves_left(self):
        p = WeylPoint(3 * PI / 4, PI / 8, 0.0)
        assert p.mirror().c1 == pytest.approx(PI / 4)
        assert p.mirror().mirror().c1 == pytest.approx(PI / 4)

    def test_interior_mirror_moves(self):
        p = WeylPoint(1.0, 0.6, 0.3)
        assert p.mirror().c1 == pytest.approx(PI - 1.0)
