"""Coupler evolutions: closed form vs generic exponential oracle."""
import numpy as np
import pytest

from basisgate.exceptions import BothZero, NonHermitianInput
from basisgate.gates import WEYL_CNOT, WEYL_ISWAP
from basisgate.hamiltonian import (
    INFINITE_RATIO,
    ConversionGainParams,
    ParallelDriveParams,
    conversion_gain_hamiltonian,
    conversion_gain_unitary,
    drive_ratio,
    hermitian_expm4,
    parallel_drive_unitary,
)
from basisgate.weyl import canonical_coordinate, coordinate_distance, is_unitary

PI = np.pi


class TestConversionGainUnitary:
    def test_pure_conversion_half_pi_is_iswap_class(self):
        p = ConversionGainParams(g_c=PI / 2, g_g=0.0, t=1.0)
        u = conversion_gain_unitary(p)
        # gain block is identity, conversion block swaps with -i
        assert np.allclose(u[np.ix_([0, 3], [0, 3])], np.eye(2), atol=1e-12)
        assert np.allclose(
            u[np.ix_([1, 2], [1, 2])], np.array([[0, -1j], [-1j, 0]]), atol=1e-12
        )
        assert coordinate_distance(canonical_coordinate(u), np.asarray(WEYL_ISWAP)) < 1e-9

    def test_equal_drives_quarter_pi_is_cnot_class(self):
        p = ConversionGainParams(g_c=PI / 4, g_g=PI / 4, t=1.0)
        u = conversion_gain_unitary(p)
        assert coordinate_distance(canonical_coordinate(u), np.asarray(WEYL_CNOT)) < 1e-9

    def test_zero_drive_is_identity(self):
        p = ConversionGainParams(g_c=0.0, g_g=0.0, phi_c=1.2, phi_g=0.3, t=1.0)
        assert np.allclose(conversion_gain_unitary(p), np.eye(4), atol=1e-14)

    def test_closed_form_matches_expm_oracle(self):
        rng = np.random.default_rng(20)
        worst = 0.0
        for _ in range(1000):
            gc, gg = rng.uniform(0, PI, 2)
            pc, pg = rng.uniform(0, 2 * PI, 2)
            t = rng.uniform(0, 2.0)
            p = ConversionGainParams(g_c=gc, g_g=gg, phi_c=pc, phi_g=pg, t=t)
            h = conversion_gain_hamiltonian(gc, gg, pc, pg)
            diff = np.linalg.norm(conversion_gain_unitary(p) - hermitian_expm4(h, t))
            worst = max(worst, diff)
        assert worst < 1e-9

    def test_phase_covariance_leaves_coordinate_fixed(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            gc = rng.uniform(0.1, PI / 2)
            base = canonical_coordinate(
                conversion_gain_unitary(ConversionGainParams(g_c=gc, g_g=0.0, t=1.0))
            )
            pc = rng.uniform(0, 2 * PI)
            shifted = canonical_coordinate(
                conversion_gain_unitary(
                    ConversionGainParams(g_c=gc, g_g=0.0, phi_c=pc, t=1.0)
                )
            )
            assert coordinate_distance(base, shifted) < 1e-7

    def test_family_stays_on_chamber_floor(self):
        rng = np.random.default_rng(22)
        for _ in range(300):
            gc, gg = rng.uniform(0, PI / 2, 2)
            u = conversion_gain_unitary(ConversionGainParams(g_c=gc, g_g=gg, t=1.0))
            c = canonical_coordinate(u)
            assert c.c3 < 1e-7

    def test_angle_accessors(self):
        p = ConversionGainParams(g_c=0.5, g_g=0.25, t=2.0)
        assert p.theta_c == pytest.approx(1.0)
        assert p.theta_g == pytest.approx(0.5)


class TestHermitianExpm:
    def test_zero_matrix(self):
        assert np.allclose(hermitian_expm4(np.zeros((4, 4)), 3.7), np.eye(4))

    def test_semigroup_property(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            h = (a + a.conj().T) / 2
            ta, tb = rng.uniform(0, 2, 2)
            lhs = hermitian_expm4(h, ta) @ hermitian_expm4(h, tb)
            rhs = hermitian_expm4(h, ta + tb)
            assert np.linalg.norm(lhs - rhs) < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            hermitian_expm4(np.triu(np.ones((4, 4))), 1.0)

    def test_unitary_output(self):
        rng = np.random.default_rng(24)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u = hermitian_expm4((a + a.conj().T) / 2, 1.3)
        assert is_unitary(u, 1e-10)


class TestParallelDrive:
    def test_zero_drive_reduces_to_closed_form(self):
        base = ConversionGainParams(g_c=0.7, g_g=0.3, phi_c=0.2, phi_g=1.1, t=1.0)
        p = ParallelDriveParams(base=base, eps1=(0, 0, 0, 0), eps2=(0, 0, 0, 0))
        assert np.linalg.norm(
            parallel_drive_unitary(p) - conversion_gain_unitary(base)
        ) < 1e-10

    def test_published_cnot_seed_lands_near_cnot(self):
        base = ConversionGainParams(g_c=PI / 2, g_g=0.0, t=1.0)
        p = ParallelDriveParams(base=base, eps1=(3, 3, 3, 3), eps2=(0, 0, 0, 0))
        c = canonical_coordinate(parallel_drive_unitary(p))
        assert coordinate_distance(c, np.asarray(WEYL_CNOT)) < 0.05

    def test_unitarity_over_random_draws(self):
        rng = np.random.default_rng(25)
        for _ in range(1000):
            base = ConversionGainParams(
                g_c=rng.uniform(0, PI / 2),
                g_g=rng.uniform(0, PI / 2),
                phi_c=rng.uniform(0, 2 * PI),
                phi_g=rng.uniform(0, 2 * PI),
                t=rng.uniform(0.1, 1.5),
            )
            p = ParallelDriveParams(
                base=base,
                eps1=tuple(rng.uniform(0, 2 * PI, 4)),
                eps2=tuple(rng.uniform(0, 2 * PI, 4)),
            )
            assert is_unitary(parallel_drive_unitary(p), 1e-9)

    def test_step_refinement_exact_for_constant_drive(self):
        base = ConversionGainParams(g_c=0.9, g_g=0.2, t=1.0)
        coarse = ParallelDriveParams(base=base, eps1=(1.5, 2.5), eps2=(0.4, 0.1))
        fine = ParallelDriveParams(
            base=base, eps1=(1.5, 1.5, 2.5, 2.5), eps2=(0.4, 0.4, 0.1, 0.1)
        )
        assert np.linalg.norm(
            parallel_drive_unitary(coarse) - parallel_drive_unitary(fine)
        ) < 1e-9

    def test_length_mismatch_rejected(self):
        base = ConversionGainParams(g_c=0.5, g_g=0.0, t=1.0)
        with pytest.raises(ValueError):
            ParallelDriveParams(base=base, eps1=(1, 2), eps2=(1,))


class TestDriveRatio:
    def test_equal_angles(self):
        p = ConversionGainParams(g_c=PI / 4, g_g=PI / 4, t=1.0)
        assert drive_ratio(p) == pytest.approx(1.0)

    def test_pure_conversion(self):
        assert drive_ratio(ConversionGainParams(g_c=1.0, g_g=0.0, t=1.0)) == 0.0

    def test_pure_gain_marker(self):
        assert drive_ratio(ConversionGainParams(g_c=0.0, g_g=1.0, t=1.0)) is INFINITE_RATIO

    def test_both_zero_raises(self):
        with pytest.raises(BothZero):
            drive_ratio(ConversionGainParams(g_c=0.0, g_g=0.0, t=1.0))
