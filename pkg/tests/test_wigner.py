"""Tests for the four-sphere phase-space representation."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from spinctl import wigner as wg
from spinctl.spin_algebra import (
    SpinSystem,
    angular_momentum,
    coupled_tensor_basis,
)


@pytest.fixture(scope="module")
def cesium():
    return SpinSystem.cesium()


@pytest.fixture(scope="module")
def cat_state(cesium):
    psi = np.zeros(16, dtype=complex)
    psi[cesium.basis_index(4, 4)] = 1 / math.sqrt(2)
    psi[cesium.basis_index(3, -3)] = 1 / math.sqrt(2)
    return psi


def random_mixed_state(dim, seed, rank=None):
    rng = np.random.default_rng(seed)
    rank = rank or dim
    m = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def haar_vector(dim, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


class TestSphericalHarmonic:
    def test_monopole_is_constant(self):
        theta = np.linspace(0, math.pi, 7)
        phi = np.linspace(0, 2 * math.pi, 7)
        vals = wg.spherical_harmonic(0, 0, theta, phi)
        assert_allclose(vals, 1 / math.sqrt(4 * math.pi), atol=1e-14)

    def test_dipole_closed_form(self):
        theta = np.linspace(0, math.pi, 9)
        vals = wg.spherical_harmonic(1, 0, theta, 0.0)
        assert_allclose(vals, np.sqrt(3 / (4 * math.pi)) * np.cos(theta), atol=1e-14)

    def test_conjugation_symmetry(self):
        rng = np.random.default_rng(11)
        theta = rng.uniform(0, math.pi, 40)
        phi = rng.uniform(0, 2 * math.pi, 40)
        for k, q in [(3, 2), (5, -4), (8, 7), (2, 0)]:
            plus = wg.spherical_harmonic(k, q, theta, phi)
            minus = wg.spherical_harmonic(k, -q, theta, phi)
            assert_allclose(minus, (-1) ** q * np.conj(plus), atol=1e-13)

    def test_orthonormal_under_gauss_legendre(self):
        # Products of harmonics with equal q are polynomials in cos(theta),
        # so Gauss-Legendre in cos(theta) plus a uniform phi sum is exact.
        x, w = np.polynomial.legendre.leggauss(32)
        theta = np.arccos(x)
        n_phi = 64
        phi = np.linspace(0, 2 * math.pi, n_phi, endpoint=False)
        tt, pp = theta[:, None], phi[None, :]
        cases = [((4, 2), (4, 2), 1.0), ((4, 2), (6, 2), 0.0), ((3, -1), (3, -1), 1.0)]
        for (k1, q1), (k2, q2), expect in cases:
            y1 = wg.spherical_harmonic(k1, q1, tt, pp)
            y2 = wg.spherical_harmonic(k2, q2, tt, pp)
            integral = (w[:, None] * y1 * np.conj(y2)).sum() * 2 * math.pi / n_phi
            assert abs(integral - expect) < 1e-12

    def test_invalid_indices_rejected(self):
        with pytest.raises(ValueError):
            wg.spherical_harmonic(-1, 0, 0.1, 0.0)
        with pytest.raises(ValueError):
            wg.spherical_harmonic(2, 3, 0.1, 0.0)
        with pytest.raises(ValueError):
            wg.spherical_harmonic(1.5, 0, 0.1, 0.0)

    def test_theta_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            wg.spherical_harmonic(1, 0, 3.5, 0.0)


class TestAsDensityMatrix:
    def test_vector_becomes_projector(self, cat_state):
        rho = wg.as_density_matrix(cat_state)
        assert_allclose(rho, np.outer(cat_state, cat_state.conj()), atol=1e-15)

    def test_unnormalized_vector_rejected(self):
        with pytest.raises(ValueError):
            wg.as_density_matrix(np.ones(4, dtype=complex))

    def test_non_hermitian_rejected(self):
        bad = np.eye(4, dtype=complex) / 4
        bad[0, 1] = 0.3
        with pytest.raises(ValueError):
            wg.as_density_matrix(bad)

    def test_wrong_trace_rejected(self):
        with pytest.raises(ValueError):
            wg.as_density_matrix(np.eye(4, dtype=complex))

    def test_negative_eigenvalue_rejected(self):
        bad = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
        with pytest.raises(ValueError):
            wg.as_density_matrix(bad)

    def test_dimension_check(self, cat_state):
        with pytest.raises(ValueError):
            wg.as_density_matrix(cat_state, dim=9)


class TestSu2Wigner:
    def test_maximally_mixed_block_is_constant(self):
        j = 3.0
        p = 0.6
        rho = p * np.eye(7, dtype=complex) / 7
        theta = np.linspace(0, math.pi, 5)
        field = wg.su2_wigner(rho, j, theta, 0.3)
        expect = p / math.sqrt(7) / math.sqrt(4 * math.pi)
        assert_allclose(field, expect, atol=1e-14)

    def test_coherent_state_peaks_at_pole(self, cesium):
        psi = np.zeros(9, dtype=complex)
        psi[0] = 1.0  # |4, 4> within the F=4 block
        rho = np.outer(psi, psi.conj())
        grid = np.linspace(0, math.pi, 64)
        field = wg.su2_wigner(rho, 4.0, grid[:, None], np.linspace(0, 6.2, 32)[None, :])
        assert field[0].std() < 1e-12  # pole value independent of phi
        assert np.argmax(field.max(axis=1)) == 0

    def test_rotation_covariance_about_y(self):
        j = 4.0
        rho = random_mixed_state(9, seed=5, rank=3)
        jx, jy, jz = angular_momentum(j)
        alpha = 0.7
        rot = expm(-1j * alpha * jy)
        rho_rot = rot @ rho @ rot.conj().T

        theta = np.linspace(0, math.pi, 24)
        phi = np.linspace(0, 2 * math.pi, 25, endpoint=False)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        field_rot = wg.su2_wigner(rho_rot, j, tt, pp)

        # Pull each grid direction back through the inverse rotation.
        x = np.sin(tt) * np.cos(pp)
        y = np.sin(tt) * np.sin(pp)
        z = np.cos(tt)
        xb = np.cos(alpha) * x - np.sin(alpha) * z
        zb = np.sin(alpha) * x + np.cos(alpha) * z
        theta_b = np.arccos(np.clip(zb, -1, 1))
        phi_b = np.arctan2(y, xb)
        field_back = wg.su2_wigner(rho, j, theta_b, phi_b)
        assert np.abs(field_rot - field_back).max() < 1e-6

    def test_rotation_covariance_about_z(self):
        j = 3.0
        rho = random_mixed_state(7, seed=9)
        _, _, jz = angular_momentum(j)
        alpha = 1.1
        rot = expm(-1j * alpha * jz)
        rho_rot = rot @ rho @ rot.conj().T
        phi = np.linspace(0, 2 * math.pi, 16, endpoint=False)
        theta = np.full_like(phi, 1.2)
        field_rot = wg.su2_wigner(rho_rot, j, theta, phi)
        field_shift = wg.su2_wigner(rho, j, theta, phi - alpha)
        assert_allclose(field_rot, field_shift, atol=1e-10)

    def test_wrong_block_shape_rejected(self):
        with pytest.raises(ValueError):
            wg.su2_wigner(np.eye(5, dtype=complex) / 5, 3.0, 0.1, 0.0)

    def test_non_hermitian_block_rejected(self):
        bad = np.eye(7, dtype=complex) / 7
        bad[0, 2] = 0.4
        theta = np.linspace(0, math.pi, 8)[:, None]
        phi = np.linspace(0, 2 * math.pi, 9, endpoint=False)[None, :]
        with pytest.raises(ValueError):
            wg.su2_wigner(bad, 3.0, theta, phi)


class TestCoherenceWigner:
    def test_block_diagonal_gives_zero_field(self, cesium):
        rho = np.zeros((16, 16), dtype=complex)
        rho[:9, :9] = random_mixed_state(9, seed=1) * 0.5
        rho[9:, 9:] = random_mixed_state(7, seed=2) * 0.5
        field = wg.coherence_wigner(
            rho, cesium, np.linspace(0, math.pi, 6)[:, None], np.linspace(0, 6, 7)
        )
        assert np.abs(field).max() < 1e-14

    def test_cat_state_field(self, cesium, cat_state):
        rho = np.outer(cat_state, cat_state.conj())
        theta = np.linspace(0, math.pi, 33)
        phi = np.linspace(0, 2 * math.pi, 16, endpoint=False)
        field = wg.coherence_wigner(rho, cesium, theta[:, None], phi[None, :])
        assert np.abs(field).max() > 0.1
        # Single (k=7, |q|=7) component: |W| is phi-independent, peaks at the
        # equator, and vanishes at both poles.
        mag = np.abs(field)
        assert mag.std(axis=1).max() < 1e-12
        assert np.argmax(mag[:, 0]) == 16
        assert mag[0, 0] < 1e-14 and mag[-1, 0] < 1e-14

    def test_cat_coefficient_real_positive(self, cesium, cat_state):
        rho = np.outer(cat_state, cat_state.conj())
        coeffs = wg.coherence_coefficients(rho, cesium)
        nonzero = {kq: a for kq, a in coeffs.items() if abs(a) > 1e-12}
        assert set(nonzero) == {(7, -7)}
        assert nonzero[(7, -7)].real == pytest.approx(0.5, abs=1e-12)
        assert abs(nonzero[(7, -7)].imag) < 1e-12

    def test_linearity(self, cesium):
        rho1 = np.outer(haar_vector(16, 3), haar_vector(16, 3).conj())
        rho2 = np.outer(haar_vector(16, 4), haar_vector(16, 4).conj())
        theta = np.linspace(0, math.pi, 5)
        phi = np.linspace(0, 5.0, 5)
        mixed = 0.3 * rho1 + 0.7 * rho2
        f = wg.coherence_wigner(mixed, cesium, theta, phi)
        f1 = wg.coherence_wigner(rho1, cesium, theta, phi)
        f2 = wg.coherence_wigner(rho2, cesium, theta, phi)
        assert_allclose(f, 0.3 * f1 + 0.7 * f2, atol=1e-12)


class TestParseval:
    @pytest.mark.parametrize("seed,rank", [(0, None), (1, 4), (2, 1)])
    def test_coefficient_norm_equals_purity(self, cesium, seed, rank):
        rho = random_mixed_state(16, seed=seed, rank=rank)
        basis = coupled_tensor_basis(cesium)
        total = sum(abs(np.trace(rho @ T)) ** 2 for T in basis.values())
        assert abs(total - np.trace(rho @ rho).real) < 1e-10

    def test_pure_state_norm_is_one(self, cesium, cat_state):
        rho = np.outer(cat_state, cat_state.conj())
        basis = coupled_tensor_basis(cesium)
        total = sum(abs(np.trace(rho @ T)) ** 2 for T in basis.values())
        assert abs(total - 1.0) < 1e-10


class TestSphereRadii:
    def test_pure_upper_manifold(self, cesium):
        psi = np.zeros(16, dtype=complex)
        psi[0] = 1.0
        radii = wg.sphere_radii(np.outer(psi, psi.conj()), cesium)
        assert radii.r_plus == pytest.approx(1.0, abs=1e-12)
        assert radii.r_minus == pytest.approx(0.0, abs=1e-12)
        assert radii.coherence == pytest.approx(0.0, abs=1e-12)
        assert radii.r_real == 0.0 and radii.r_imag == 0.0

    def test_cat_state_radii(self, cesium, cat_state):
        radii = wg.sphere_radii(np.outer(cat_state, cat_state.conj()), cesium)
        assert radii.r_plus == pytest.approx(0.5, abs=1e-12)
        assert radii.r_minus == pytest.approx(0.5, abs=1e-12)
        assert radii.coherence == pytest.approx(0.5, abs=1e-12)
        # The lone |q| = 7 harmonic splits its norm evenly between the real
        # and imaginary parts of the field.
        assert radii.r_real == pytest.approx(0.25, abs=1e-12)
        assert radii.r_imag == pytest.approx(0.25, abs=1e-12)

    def test_mixture_loses_coherence(self, cesium):
        # 50/50 incoherent mixture of |4,0> and the in-manifold cat
        # (|3,3>+|3,-3>)/sqrt 2: same populations as a coherent state but no
        # inter-manifold coherence at all.
        up = np.zeros(16, dtype=complex)
        up[cesium.basis_index(4, 0)] = 1.0
        low = np.zeros(16, dtype=complex)
        low[cesium.basis_index(3, 3)] = 1 / math.sqrt(2)
        low[cesium.basis_index(3, -3)] = 1 / math.sqrt(2)
        rho = 0.5 * np.outer(up, up.conj()) + 0.5 * np.outer(low, low.conj())
        radii = wg.sphere_radii(rho, cesium)
        assert radii.r_plus == pytest.approx(0.5, abs=1e-12)
        assert radii.r_minus == pytest.approx(0.5, abs=1e-12)
        assert radii.coherence == pytest.approx(0.0, abs=1e-12)

    def test_axial_superposition_is_fully_real(self, cesium):
        # (|4,0> + |3,0>)/sqrt 2: only q = 0 coefficients survive and all the
        # harmonics Y(k, 0) are real, so the imaginary sphere is empty.
        psi = np.zeros(16, dtype=complex)
        psi[cesium.basis_index(4, 0)] = 1 / math.sqrt(2)
        psi[cesium.basis_index(3, 0)] = 1 / math.sqrt(2)
        radii = wg.sphere_radii(np.outer(psi, psi.conj()), cesium)
        assert radii.coherence == pytest.approx(0.5, abs=1e-12)
        assert radii.r_real == pytest.approx(radii.coherence, abs=1e-10)
        assert radii.r_imag == pytest.approx(0.0, abs=1e-10)

    def test_quarter_phase_flips_split_to_imaginary(self, cesium):
        psi = np.zeros(16, dtype=complex)
        psi[cesium.basis_index(4, 0)] = 1 / math.sqrt(2)
        psi[cesium.basis_index(3, 0)] = 1j / math.sqrt(2)
        radii = wg.sphere_radii(np.outer(psi, psi.conj()), cesium)
        assert radii.r_real == pytest.approx(0.0, abs=1e-10)
        assert radii.r_imag == pytest.approx(radii.coherence, abs=1e-10)

    def test_split_consistent_with_grid_quadrature(self, cesium):
        # Independent check of the closed-form norm shares: integrate the
        # sampled field with sin(theta) weights on a fine grid.
        psi = haar_vector(16, seed=8)
        rho = np.outer(psi, psi.conj())
        radii = wg.sphere_radii(rho, cesium)
        n_t, n_p = 400, 256
        theta = np.linspace(0, math.pi, n_t)
        phi = np.linspace(0, 2 * math.pi, n_p, endpoint=False)
        field = wg.coherence_wigner(rho, cesium, theta[:, None], phi[None, :])
        weight = np.sin(theta)[:, None]
        d_omega = (math.pi / (n_t - 1)) * (2 * math.pi / n_p)
        re2 = float((weight * field.real**2).sum() * d_omega)
        im2 = float((weight * field.imag**2).sum() * d_omega)
        share = re2 / (re2 + im2)
        assert radii.r_real / radii.coherence == pytest.approx(share, abs=2e-3)

    @pytest.mark.parametrize("seed", range(6))
    def test_invariants_on_random_states(self, cesium, seed):
        if seed % 2:
            rho = random_mixed_state(16, seed=seed, rank=4)
        else:
            psi = haar_vector(16, seed=seed)
            rho = np.outer(psi, psi.conj())
        radii = wg.sphere_radii(rho, cesium)
        assert radii.r_plus >= -1e-12 and radii.r_minus >= -1e-12
        assert radii.r_plus + radii.r_minus == pytest.approx(1.0, abs=1e-8)
        assert radii.coherence <= math.sqrt(radii.r_plus * radii.r_minus) + 1e-10
        assert radii.r_real + radii.r_imag == pytest.approx(
            radii.coherence, abs=1e-12
        )

    def test_pure_state_saturates_cauchy_schwarz(self, cesium):
        psi = haar_vector(16, seed=13)
        radii = wg.sphere_radii(np.outer(psi, psi.conj()), cesium)
        assert radii.coherence == pytest.approx(
            math.sqrt(radii.r_plus * radii.r_minus), abs=1e-10
        )


class TestSphereGrid:
    def test_default_resolution(self, cesium, cat_state):
        grid = wg.sphere_grid(cat_state, cesium)
        assert grid.n_theta == 64 and grid.n_phi == 128
        assert grid.field_plus.shape == (64, 128)
        assert grid.theta[0] == 0.0 and grid.theta[-1] == pytest.approx(math.pi)
        assert grid.phi[-1] < 2 * math.pi

    def test_fields_real_dtype(self, cesium, cat_state):
        grid = wg.sphere_grid(cat_state, cesium, n_theta=8, n_phi=16)
        for name in ("field_plus", "field_minus", "coherence_real", "coherence_imag"):
            assert getattr(grid, name).dtype == np.float64

    def test_too_small_grid_rejected(self, cesium, cat_state):
        with pytest.raises(ValueError):
            wg.sphere_grid(cat_state, cesium, n_theta=1, n_phi=4)


class TestExportRoundTrip:
    def test_round_trip_exact(self, cesium, cat_state, tmp_path):
        path = tmp_path / "grid.csv"
        written = wg.export_grid(cat_state, cesium, path, n_theta=12, n_phi=24)
        loaded = wg.read_grid_csv(path)
        assert loaded.f_plus == written.f_plus
        assert loaded.f_minus == written.f_minus
        assert_allclose(loaded.theta, written.theta, atol=1e-12)
        assert_allclose(loaded.phi, written.phi, atol=1e-12)
        for name in ("field_plus", "field_minus", "coherence_real", "coherence_imag"):
            assert_allclose(
                getattr(loaded, name), getattr(written, name), atol=1e-12
            )
        for attr in ("r_plus", "r_minus", "r_real", "r_imag", "coherence"):
            assert getattr(loaded.radii, attr) == getattr(written.radii, attr)

    def test_row_count(self, cesium, cat_state, tmp_path):
        path = tmp_path / "grid.csv"
        wg.export_grid(cat_state, cesium, path, n_theta=6, n_phi=10)
        lines = path.read_text().splitlines()
        assert len(lines) == 6 * 10 + 2

    def test_fiducial_state_radius(self, cesium, tmp_path):
        psi = np.zeros(16, dtype=complex)
        psi[0] = 1.0
        grid = wg.export_grid(psi, cesium, tmp_path / "g.csv", n_theta=6, n_phi=8)
        assert grid.radii.r_plus == pytest.approx(1.0, abs=1e-12)

    def test_bad_version_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# spinctl-wigner/99 f_plus=4\nheader\n")
        with pytest.raises(ValueError):
            wg.read_grid_csv(path)

    def test_truncated_body_rejected(self, cesium, cat_state, tmp_path):
        path = tmp_path / "grid.csv"
        wg.export_grid(cat_state, cesium, path, n_theta=4, n_phi=6)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-3]) + "\n")
        with pytest.raises(ValueError):
            wg.read_grid_csv(path)
