import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_chain import (
    BlochBasis,
    ChainConfig,
    Density,
    ExplicitTerms,
    GaussianFamily,
    InputError,
    PerParticle,
    Term,
    build_laplacian,
    dispersion,
    eigenvalues,
    group_velocity,
    infinite_chain_element,
    periodized_first_row,
    synthesize_laplacian,
)
from nonlocal_chain.errors import QuadratureError
from nonlocal_chain.spectral import infinite_chain_elements, mode_wavenumbers
from strategies import admissible_specs, random_admissible_spec

LINEAR = ExplicitTerms((Term(1, 1, 1.0),))
SQUARE = ExplicitTerms((Term(2, 1, 1.0),))


def test_mode_wavenumbers_fold_into_zone():
    k = mode_wavenumbers(8)
    assert k[4] == pytest.approx(np.pi)
    assert k[5] == pytest.approx(-3 * np.pi / 4)
    assert np.all((k > -np.pi) & (k <= np.pi))


class TestBlochBasis:
    def test_orthonormal(self):
        v = BlochBasis(12).matrix()
        assert np.allclose(v.conj().T @ v, np.eye(12), atol=1e-14)

    def test_diagonalizes_laplacian(self):
        lap = build_laplacian(ExplicitTerms((Term(1, 1, 1.0), Term(3, -1, 0.01))), ChainConfig(10))
        v = BlochBasis(10).matrix()
        d = v.conj().T @ lap.matrix() @ v
        assert np.allclose(d, np.diag(eigenvalues(lap)), atol=1e-13)

    def test_modal_round_trip(self):
        basis = BlochBasis(9)
        u = np.random.default_rng(0).standard_normal(9)
        u_hat = basis.modal_amplitudes(u)
        assert np.allclose(u_hat, basis.matrix().conj().T @ u, atol=1e-14)
        assert np.allclose(basis.from_modal(u_hat).real, u, atol=1e-14)


class TestDispersion:
    def test_zone_boundary_linear(self):
        table = dispersion(LINEAR, ChainConfig(8))
        assert table.omega_sq[4] == 4.0
        assert table.omega_sq[0] == 0.0

    def test_zone_boundary_square(self):
        assert dispersion(SQUARE, ChainConfig(8)).omega_sq[4] == pytest.approx(16.0, rel=1e-15)

    def test_rows(self):
        rows = list(dispersion(LINEAR, ChainConfig(4)).rows())
        assert len(rows) == 4
        assert rows[2][:3] == (2, pytest.approx(np.pi), 4.0)

    @settings(max_examples=30, deadline=None)
    @given(admissible_specs(), st.integers(3, 48))
    def test_dispersion_is_minus_eigenvalues_over_mass(self, spec, n):
        config = ChainConfig(n, 1.0, PerParticle(2.5))
        table = dispersion(spec, config)
        eig = np.linalg.eigvalsh(build_laplacian(spec, config).matrix())
        assert np.allclose(np.sort(-config.mu * table.omega_sq), np.sort(eig), atol=1e-12 * np.abs(eig).max())
        assert np.all(table.omega_sq >= 0)


def test_linear_eigenvalues():
    lap = build_laplacian(LINEAR, ChainConfig(8))
    expected = -4 * np.sin(np.pi * np.arange(8) / 8) ** 2
    assert np.allclose(eigenvalues(lap), expected, atol=1e-15)
    assert eigenvalues(lap)[0] == 0.0


def test_square_eigenvalues():
    lap = build_laplacian(SQUARE, ChainConfig(8))
    expected = -16 * np.sin(np.pi * np.arange(8) / 8) ** 4
    assert np.allclose(eigenvalues(lap), expected, atol=1e-14)


class TestSynthesis:
    def test_recovers_born_von_karman(self):
        row = synthesize_laplacian(LINEAR, ChainConfig(8)).first_row
        assert np.allclose(row, [-2, 1, 0, 0, 0, 0, 0, 1], atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(admissible_specs(max_order=10), st.integers(3, 64), st.floats(0.5, 2.0))
    def test_matches_direct_build(self, spec, n, h):
        config = ChainConfig(n, h)
        direct = build_laplacian(spec, config).first_row
        synth = synthesize_laplacian(spec, config).first_row
        assert np.max(np.abs(direct - synth)) <= 1e-12 * np.max(np.abs(direct))

    def test_wrap_case(self):
        spec = ExplicitTerms((Term(1, 1, 1.0), Term(6, 1, 1e-3)))
        config = ChainConfig(5)
        assert np.allclose(
            synthesize_laplacian(spec, config).first_row,
            build_laplacian(spec, config).first_row,
            rtol=0,
            atol=1e-13,
        )

    def test_gaussian_matches_truncated_series(self):
        spec = GaussianFamily(1.0, 1.0, 1.0, 40)
        config = ChainConfig(32, 1.0, Density(1.0))
        diff = synthesize_laplacian(spec, config).first_row - build_laplacian(spec, config).first_row
        assert np.max(np.abs(diff)) < 1e-12

    def test_gaussian_closed_form_at_strong_nonlocality(self):
        # series is unusable at gamma = 10; synthesis still works
        spec = GaussianFamily(1.0, 10.0, 1.0)
        lap = synthesize_laplacian(spec, ChainConfig(64, 1.0, Density(1.0)))
        lam = 4 * np.sin(mode_wavenumbers(64) / 2) ** 2
        assert np.allclose(eigenvalues(lap), -lam * np.exp(-10 * lam), atol=1e-15)


class TestContour:
    def test_linear_elements(self):
        values = [infinite_chain_element(LINEAR, r) for r in (0, 1, 2)]
        assert values == pytest.approx([-2, 1, 0], abs=1e-12)

    def test_square_elements(self):
        values = [infinite_chain_element(SQUARE, r) for r in (0, 1, 2, 3)]
        assert values == pytest.approx([-6, 4, -1, 0], abs=1e-12)

    def test_symmetric_in_offset(self):
        assert infinite_chain_element(SQUARE, -2) == infinite_chain_element(SQUARE, 2)

    @given(st.integers(1, 8), st.integers(0, 12))
    def test_binomial_elements(self, m, r):
        spec = ExplicitTerms((Term(m, 1, 1.0),))
        expected = -((-1) ** r) * math.comb(2 * m, m + r) if r <= m else 0.0
        assert infinite_chain_element(spec, r) == pytest.approx(expected, abs=1e-10 * 4**m)

    def test_gaussian_elements_decay(self):
        spec = GaussianFamily(1.0, 1.0, 1.0)
        elements = infinite_chain_elements(spec, 20, mass=1.0)
        assert abs(elements[20]) < 1e-12 * abs(elements[0])
        assert elements.sum() + elements[1:].sum() == pytest.approx(0.0, abs=1e-13)

    def test_too_few_points(self):
        with pytest.raises(InputError):
            infinite_chain_element(LINEAR, 0, quadrature_points=16)

    def test_unresolved_quadrature_detected(self):
        # a very long-range Gaussian (gamma = 1e4) is not resolved by 64 points
        with pytest.raises(QuadratureError):
            infinite_chain_elements(GaussianFamily(1.0, 1e4, 1.0), 1, 64, tolerance=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(admissible_specs(), st.integers(3, 32))
    def test_periodization_matches_direct(self, spec, n):
        config = ChainConfig(n, 1.0, PerParticle(0.7))
        direct = build_laplacian(spec, config).first_row
        periodized = periodized_first_row(spec, config)
        assert np.max(np.abs(direct - periodized)) <= 1e-10 * np.max(np.abs(direct))

    def test_periodization_gaussian(self):
        spec = GaussianFamily(1.0, 2.0, 1.0)
        config = ChainConfig(16, 1.0, Density(1.0))
        diff = periodized_first_row(spec, config) - synthesize_laplacian(spec, config).first_row
        assert np.max(np.abs(diff)) < 1e-12


class TestGroupVelocity:
    def test_linear_chain_closed_form(self):
        kappa = np.linspace(-np.pi, np.pi, 101)
        v = group_velocity(LINEAR, ChainConfig(8), kappa)
        assert np.allclose(v, np.sign(kappa) * np.cos(kappa / 2), atol=1e-12)
        assert group_velocity(LINEAR, ChainConfig(8), 0.0) == 1.0

    def test_odd_in_kappa(self):
        config = ChainConfig(8, 0.5)
        spec = ExplicitTerms((Term(1, 1, 1.0), Term(2, 1, 0.3)))
        k = np.array([1e-9, 0.3, 2.0])
        assert np.array_equal(group_velocity(spec, config, -k), -group_velocity(spec, config, k))

    def test_gaussian_stationary_at_critical_point(self):
        spec = GaussianFamily(1.0, 1.0, 1.0)
        v = group_velocity(spec, ChainConfig(16, 1.0, Density(1.0)), 2 * math.asin(0.5))
        assert abs(v) < 1e-15

    @given(admissible_specs(), st.floats(0.2, 3.0))
    def test_zone_boundary_zero(self, spec, h):
        assert abs(group_velocity(spec, ChainConfig(8, h), np.pi)) < 1e-10

    @settings(max_examples=30)
    @given(admissible_specs(), st.floats(0.05, 3.0))
    def test_matches_finite_difference(self, spec, kappa):
        config = ChainConfig(8, 1.3)
        step = 1e-6
        omega = lambda k: np.sqrt(spec.evaluate(4 * np.sin(k / 2) ** 2))
        fd = config.spacing * (omega(kappa + step) - omega(kappa - step)) / (2 * step)
        assert group_velocity(spec, config, kappa) == pytest.approx(float(fd), rel=1e-6, abs=1e-8)

    def test_outside_zone_rejected(self):
        with pytest.raises(InputError):
            group_velocity(LINEAR, ChainConfig(8), 4.0)


def test_random_spec_triangle_with_wrap():
    rng = np.random.default_rng(3)
    spec = random_admissible_spec(rng)
    while spec.max_order < 4:
        spec = random_admissible_spec(rng)
    config = ChainConfig(2 * spec.max_order - 1)
    direct = build_laplacian(spec, config).first_row
    assert np.allclose(periodized_first_row(spec, config), direct, rtol=0, atol=1e-11 * np.abs(direct).max())
