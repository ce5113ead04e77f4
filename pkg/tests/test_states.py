import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherent_kit import fock
from coherent_kit.errors import ConfigurationError
from coherent_kit.grid import PhysicalConstants, apply_operator, inner_product, make_grid, moments
from coherent_kit.sampling import random_gaussian_state
from coherent_kit.states import (
    CoherentLabel,
    alpha_from_moments,
    apply_drift_grid,
    coherent_closed_form,
    coherent_via_number_series,
    coherent_via_ode,
    moments_from_alpha,
    number_state,
    number_states,
    overlap_closed_form,
    series_tail,
)

finite = st.floats(-50, 50, allow_nan=False)


def test_alpha_examples(constants):
    assert alpha_from_moments(0, 0, constants) == 0
    assert alpha_from_moments(1, 0, constants) == pytest.approx(1 / math.sqrt(2))
    assert alpha_from_moments(0, math.sqrt(2), constants) == pytest.approx(1j)


@given(x0=finite, p0=finite, lam=st.floats(0.1, 10), hbar=st.floats(0.1, 10))
def test_label_round_trip(x0, p0, lam, hbar):
    c = PhysicalConstants(hbar=hbar, lam=lam)
    x, p = CoherentLabel.from_moments(x0, p0, c).centroid(c)
    assert x == pytest.approx(x0, rel=1e-14, abs=1e-14)
    assert p == pytest.approx(p0, rel=1e-14, abs=1e-14)


def test_closed_form_ground_state(grid, constants):
    psi = coherent_closed_form(grid, 0, constants)
    assert np.abs(psi.samples.imag).max() == 0
    assert np.allclose(psi.samples, psi.samples[::-1][np.r_[-1, 0:grid.n_points - 1]])  # even about x=0
    j0 = grid.n_points // 2
    assert grid.x[j0] == 0
    assert psi.samples[j0].real == pytest.approx((2 * np.pi * 0.5) ** -0.25, rel=1e-15)


def test_closed_form_moments(grid, constants):
    m = moments(coherent_closed_form(grid, CoherentLabel.from_moments(1, 0, constants), constants), constants)
    assert (m.mean_x, m.mean_p, m.delta_x, m.delta_p) == pytest.approx(
        (1, 0, 1 / math.sqrt(2), 1 / math.sqrt(2)), abs=1e-10
    )


def test_closed_form_envelope_and_phase(grid, constants):
    # textbook Gaussian times the constant exp(-i x0 p0 / (2 hbar))
    x0, p0 = 1.3, -0.8
    psi = coherent_closed_form(grid, CoherentLabel.from_moments(x0, p0, constants), constants)
    dx2 = 0.5
    x = grid.x
    textbook = (2 * np.pi * dx2) ** -0.25 * np.exp(-((x - x0) ** 2) / (4 * dx2) + 1j * p0 * x)
    assert np.abs(psi.samples - cmath.exp(-0.5j * x0 * p0) * textbook).max() < 1e-14


def test_closed_form_eigen_residual(grid, constants):
    a = 1 + 2j
    psi = coherent_closed_form(grid, a, constants)
    assert (apply_operator(psi, "A", constants) - a * psi).norm() <= 1e-8


@pytest.mark.parametrize("alpha", [11, 1j * 60, 0])
def test_closed_form_guards(alpha):
    g = make_grid(1024, -20, 20) if alpha else make_grid(64, -20, 20)
    with pytest.raises(ConfigurationError):
        coherent_closed_form(g, alpha, PhysicalConstants())


@pytest.mark.parametrize("alpha", [0, 1 / math.sqrt(2), 1j, -1.5 + 0.7j])
def test_ode_matches_closed_form(grid, constants, alpha):
    diff = coherent_via_ode(grid, alpha, constants) - coherent_closed_form(grid, alpha, constants)
    assert diff.norm() <= 1e-8


def test_ode_other_units():
    c = PhysicalConstants(hbar=0.5, mass=3.0, lam=2.0)
    g = make_grid(1024, -40, 40, hbar=0.5)
    diff = coherent_via_ode(g, 0.8 - 0.4j, c) - coherent_closed_form(g, 0.8 - 0.4j, c)
    assert diff.norm() <= 1e-8


def test_number_state_zero_is_ground_state(grid, constants):
    diff = number_state(grid, 0, constants) - coherent_closed_form(grid, 0, constants)
    assert diff.norm() <= 1e-10


def test_number_state_ladder(grid, constants):
    chi = [number_state(grid, n, constants) for n in range(3)]
    assert (apply_operator(chi[1], "A", constants) - chi[0]).norm() <= 1e-8
    assert (apply_operator(chi[1], "Adag", constants) - math.sqrt(2) * chi[2]).norm() <= 1e-8


def test_number_states_orthonormal(grid, constants):
    chi = number_states(grid, 13, constants)
    gram = chi @ chi.T * grid.dx
    assert np.abs(gram - np.eye(13)).max() <= 1e-10


def test_number_state_high_order_stays_finite(grid, constants):
    chi = number_state(grid, 64, constants)
    assert np.all(np.isfinite(chi.samples))
    assert chi.norm() == pytest.approx(1, abs=1e-10)


def test_number_state_guards(constants):
    with pytest.raises(ConfigurationError):
        number_state(make_grid(1024, -20, 20), 65, constants)
    with pytest.raises(ConfigurationError):
        number_state(make_grid(1024, -6, 6), 30, constants)
    with pytest.raises(ConfigurationError):
        number_state(make_grid(1024, -20, 20), -1, constants)


@pytest.mark.filterwarnings("ignore::coherent_kit.errors.BoundaryWarning")
def test_number_state_matches_adag_powers(grid, constants):
    # chi_n = (Adag)^n chi_0 / sqrt(n!)
    v = number_state(grid, 0, constants)
    for n in range(1, 6):
        v = apply_operator(v, "Adag", constants)
        target = math.sqrt(math.factorial(n)) * number_state(grid, n, constants)
        assert (v - target).norm() <= 1e-8 * target.norm()


def test_series_single_term(grid, constants):
    s = coherent_via_number_series(grid, 0, 1, constants)
    assert np.array_equal(s.samples, number_state(grid, 0, constants).samples)


def test_series_matches_closed_form(grid, constants):
    diff = coherent_via_number_series(grid, 1, 32, constants) - coherent_closed_form(grid, 1, constants)
    assert diff.norm() <= 1e-6


def test_series_too_short(grid, constants):
    with pytest.raises(ConfigurationError, match="Poisson tail"):
        coherent_via_number_series(grid, 2, 10, constants)


def test_series_tail_bound():
    for a in (0.5, 1, 1 + 1j, 2 + 2j):
        assert series_tail(a, fock.min_dim(a)) < 1e-8


def test_coefficients_poisson(grid, constants):
    psi = coherent_closed_form(grid, 1, constants)
    chi = number_states(grid, 12, constants)
    c = chi @ psi.samples * grid.dx
    probs = np.abs(c) ** 2
    assert np.allclose(probs, np.exp(-1) / np.array([math.factorial(n) for n in range(12)]), atol=1e-14)


def test_overlap_examples():
    assert overlap_closed_form(0.3 + 0.4j, 0.3 + 0.4j) == pytest.approx(1)
    assert overlap_closed_form(0, 1) == pytest.approx(math.exp(-0.5))
    assert abs(overlap_closed_form(1, 1j)) ** 2 == pytest.approx(math.exp(-2))


@given(st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
def test_overlap_modulus(a, b):
    assert abs(overlap_closed_form(a, b)) ** 2 == pytest.approx(math.exp(-abs(a - b) ** 2), rel=1e-12, abs=1e-300)


def test_overlap_against_grid(grid, constants):
    psi1 = coherent_closed_form(grid, 1, constants)
    psii = coherent_closed_form(grid, 1j, constants)
    assert abs(inner_product(psi1, psii) - overlap_closed_form(1, 1j)) <= 1e-8


def test_drift_grid_translation(grid, constants):
    psi0 = coherent_closed_form(grid, 0, constants)
    target = coherent_closed_form(grid, CoherentLabel.from_moments(1, 0, constants), constants)
    assert (apply_drift_grid(psi0, 1, 0, constants) - target).norm() <= 1e-8


def test_drift_grid_identity(grid, constants):
    f = random_gaussian_state(grid, np.random.default_rng(1), constants)
    assert (apply_drift_grid(f, 0, 0, constants) - f).norm() <= 1e-12


def test_drift_grid_general_alpha(grid, constants):
    psi0 = coherent_closed_form(grid, 0, constants)
    for a in (1 + 1j, -2 + 0.5j, 0.3 - 1.7j):
        x0, p0 = moments_from_alpha(a, constants)
        assert (apply_drift_grid(psi0, x0, p0, constants) - coherent_closed_form(grid, a, constants)).norm() <= 1e-8


def test_drift_grid_composition(grid, constants):
    f = random_gaussian_state(grid, np.random.default_rng(9), constants)
    a, b = 0.7 - 0.2j, -0.5 + 0.9j
    (xa, pa), (xb, pb) = moments_from_alpha(a, constants), moments_from_alpha(b, constants)
    # D(a) D(b): b acts first
    lhs = apply_drift_grid(apply_drift_grid(f, xb, pb, constants), xa, pa, constants)
    phase = cmath.exp((a * b.conjugate() - a.conjugate() * b) / 2)
    rhs = phase * apply_drift_grid(f, xa + xb, pa + pb, constants)
    assert (lhs - rhs).norm() <= 1e-8


def test_unbiased_drift_between_coherent_states(grid, constants):
    # psi_b = D(b - a) psi_a only up to the group-law phase exp((b-a) a* - (b-a)* a)/2)
    a, b = 0.5 + 0.5j, -1 + 0.2j
    d = b - a
    x, p = moments_from_alpha(d, constants)
    moved = apply_drift_grid(coherent_closed_form(grid, a, constants), x, p, constants)
    phase = cmath.exp((d * a.conjugate() - d.conjugate() * a) / 2)
    assert (moved - phase * coherent_closed_form(grid, b, constants)).norm() <= 1e-8


def test_drift_grid_escape(grid, constants):
    with pytest.raises(ConfigurationError):
        apply_drift_grid(coherent_closed_form(grid, 0, constants), 19, 0, constants)


@pytest.mark.parametrize("alpha", [complex(a, b) for a in (-2, 0, 2) for b in (-2, 0, 2)])
def test_three_routes_agree(grid, constants, alpha):
    cf = coherent_closed_form(grid, alpha, constants)
    assert (coherent_via_ode(grid, alpha, constants) - cf).norm() <= 1e-8
    assert (coherent_via_number_series(grid, alpha, fock.min_dim(alpha), constants) - cf).norm() <= 1e-6
