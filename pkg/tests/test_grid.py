import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from coherent_kit import fock
from coherent_kit.errors import BoundaryWarning, ConfigurationError, UsageError
from coherent_kit.grid import (
    PhysicalConstants,
    WaveFunction,
    adjoint_eigen_residual,
    apply_operator,
    apply_sequence,
    inner_product,
    make_grid,
    moments,
)
from coherent_kit.sampling import random_gaussian_state, random_number_superposition
from coherent_kit.states import CoherentLabel, coherent_closed_form, number_state


def test_make_grid_small():
    g = make_grid(8, -1, 1)
    assert g.dx == 0.25
    assert g.dp == pytest.approx(np.pi)
    steps = np.diff(np.sort(g.momentum_lattice))
    assert np.allclose(steps, np.pi)
    assert np.allclose(g.x, -1 + 0.25 * np.arange(8))


def test_make_grid_default_spacing():
    assert make_grid(1024, -20, 20).dx == 0.0390625


@pytest.mark.parametrize("args", [(6, -1, 1), (4, -1, 1), (1000, -1, 1), (8, 1, 1), (8, 2, -2)])
def test_make_grid_rejects(args):
    with pytest.raises(ConfigurationError):
        make_grid(*args)


@pytest.mark.parametrize("kwargs", [{"hbar": 0}, {"mass": -1}, {"lam": float("inf")}])
def test_constants_must_be_positive(kwargs):
    with pytest.raises(ConfigurationError):
        PhysicalConstants(**kwargs)


def test_wavefunction_is_immutable(grid):
    wf = WaveFunction(grid, np.zeros(grid.n_points))
    with pytest.raises(ValueError):
        wf.samples[0] = 1.0


def test_wavefunction_shape_checked(grid):
    with pytest.raises(UsageError):
        WaveFunction(grid, np.zeros(10))


def test_inner_product_self(grid, constants):
    f = coherent_closed_form(grid, 0.3 - 0.7j, constants)
    assert inner_product(f, f) == pytest.approx(1.0, abs=1e-14)


def test_inner_product_grid_mismatch(grid, constants):
    f = coherent_closed_form(grid, 0, constants)
    g = WaveFunction(make_grid(512, -20, 20), np.zeros(512))
    with pytest.raises(UsageError):
        inner_product(f, g)


def test_inner_product_overlap_value(grid, constants):
    # closed-form overlap exp(-|a|^2/2 - |b|^2/2 + conj(a) b) at a=0, b=1
    psi0 = coherent_closed_form(grid, 0, constants)
    psi1 = coherent_closed_form(grid, 1, constants)
    assert abs(inner_product(psi0, psi1) - math.exp(-0.5)) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_inner_product_conjugate_symmetry(seed):
    grid, c = make_grid(1024, -20, 20), PhysicalConstants()
    rng = np.random.default_rng(seed)
    f = random_gaussian_state(grid, rng, c)
    g = random_gaussian_state(grid, rng, c)
    assert inner_product(f, g) == pytest.approx(inner_product(g, f).conjugate(), abs=1e-14)
    z = 0.3 - 1.2j
    assert inner_product(z * f, g) == pytest.approx(z.conjugate() * inner_product(f, g), abs=1e-14)


def test_A_on_coherent_state(grid, constants):
    psi = coherent_closed_form(grid, 1, constants)
    assert (apply_operator(psi, "A", constants) - psi).norm() <= 1e-8


def test_A_annihilates_ground_state(grid, constants):
    assert apply_operator(coherent_closed_form(grid, 0, constants), "A", constants).norm() <= 1e-8


def test_apply_operator_leaves_input(grid, constants):
    psi = coherent_closed_form(grid, 1, constants)
    before = psi.samples.copy()
    apply_operator(psi, "P", constants)
    assert np.array_equal(before, psi.samples)


def test_commutator_interior(grid, constants):
    rng = np.random.default_rng(7)
    for _ in range(5):
        f = random_gaussian_state(grid, rng, constants)
        lhs = apply_sequence(f, ["A", "Adag"], constants) - apply_sequence(f, ["Adag", "A"], constants)
        inner = slice(grid.n_points // 8, -grid.n_points // 8)
        dev = np.abs(lhs.samples[inner] - f.samples[inner]).max() / np.abs(f.samples).max()
        assert dev <= 1e-6


def test_position_from_ladder(grid, constants):
    rng = np.random.default_rng(11)
    f = random_gaussian_state(grid, rng, constants)
    x = apply_operator(f, "X", constants)
    ladder = (constants.lam / math.sqrt(2)) * (apply_operator(f, "A", constants) + apply_operator(f, "Adag", constants))
    assert (x - ladder).norm() <= 1e-10 * x.norm()


def test_hamiltonian_is_half_p_squared(grid, constants):
    c = PhysicalConstants(mass=2.5)
    f = coherent_closed_form(grid, 0.5j, c)
    pp = apply_sequence(f, ["P", "P"], c)
    assert (apply_operator(f, "H", c) - (1 / 5) * pp).norm() < 1e-12


def test_parseval(grid, constants):
    f = random_gaussian_state(grid, np.random.default_rng(3), constants)
    phi = f.momentum_samples()
    assert abs(np.sum(np.abs(phi) ** 2) * grid.dp - f.norm() ** 2) <= 1e-12


def test_momentum_samples_match_analytic_transform(grid, constants):
    # ground state in momentum space is (pi hbar^2/lam^2)^(-1/4) exp(-lam^2 p^2 / (2 hbar^2))
    phi = coherent_closed_form(grid, 0, constants).momentum_samples()
    p = grid.momentum_lattice
    exact = np.pi**-0.25 * np.exp(-(p**2) / 2)
    assert np.abs(phi - exact).max() < 1e-12


def test_boundary_flag(grid, constants):
    x = grid.x
    leaky = WaveFunction(grid, np.exp(-((x - 19.5) ** 2))).normalized()
    assert not leaky.contained
    with pytest.warns(BoundaryWarning):
        apply_operator(leaky, "P", constants)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        apply_operator(coherent_closed_form(grid, 0, constants), "P", constants)


def test_constants_must_match_grid(grid):
    f = WaveFunction(grid, np.zeros(grid.n_points))
    with pytest.raises(UsageError):
        apply_operator(f, "P", PhysicalConstants(hbar=2.0))


def test_moments_coherent(grid, constants):
    psi = coherent_closed_form(grid, CoherentLabel.from_moments(1, 0, constants), constants)
    m = moments(psi, constants)
    assert m.mean_x == pytest.approx(1, abs=1e-10)
    assert m.mean_p == pytest.approx(0, abs=1e-10)
    assert m.delta_x == pytest.approx(1 / math.sqrt(2), abs=1e-10)
    assert m.delta_p == pytest.approx(1 / math.sqrt(2), abs=1e-10)
    assert m.uncertainty_product == pytest.approx(0.5, abs=1e-10)
    assert abs(m.sym_covariance) <= 1e-8


def test_moments_number_state_one(grid, constants):
    # oracle: quadrature of |chi_1(x)|^2 x^2 with chi_1 = sqrt(2) x pi^(-1/4) exp(-x^2/2)
    oracle, _ = quad(lambda x: 2 * x**2 / math.sqrt(math.pi) * math.exp(-(x**2)) * x**2, -np.inf, np.inf)
    assert oracle == pytest.approx(1.5, abs=1e-12)
    m = moments(number_state(grid, 1, constants), constants)
    assert m.delta_x**2 == pytest.approx(oracle, abs=1e-10)


def test_moments_scale_with_units(grid):
    c = PhysicalConstants(hbar=1.0, mass=1.0, lam=1.7)
    m = moments(coherent_closed_form(grid, 0.2 + 0.1j, c), c)
    assert m.delta_x == pytest.approx(1.7 / math.sqrt(2), rel=1e-10)
    assert m.delta_p == pytest.approx(1 / (1.7 * math.sqrt(2)), rel=1e-10)


def test_moments_rejects_unnormalized(grid, constants):
    f = 1.01 * coherent_closed_form(grid, 0, constants)
    with pytest.raises(UsageError):
        moments(f, constants)


def test_uncertainty_floor_random_states(grid, constants):
    rng = np.random.default_rng(2024)
    for _ in range(100):
        m = moments(random_gaussian_state(grid, rng, constants), constants)
        assert m.delta_x * m.delta_p >= constants.hbar / 2 * (1 - 1e-6)
        assert m.delta_x**2 == pytest.approx(m.mean_x2 - m.mean_x**2, abs=1e-12)


def _fock_adjoint_residual(v):
    dim = v.size
    _, adag, _ = fock.ladder_matrices(dim)
    w = adag @ v
    beta = np.vdot(v, w)
    return np.linalg.norm(w - beta * v)


@pytest.mark.parametrize("alpha", [0, 2 + 1j])
def test_adjoint_residual_coherent(grid, constants, alpha):
    r = adjoint_eigen_residual(coherent_closed_form(grid, alpha, constants), constants)
    assert r == pytest.approx(1.0, abs=1e-6)


def test_adjoint_residual_number_state(grid, constants):
    e2 = np.zeros(16, dtype=complex)
    e2[2] = 1
    oracle = _fock_adjoint_residual(e2)
    assert oracle == pytest.approx(math.sqrt(3), abs=1e-14)
    assert adjoint_eigen_residual(number_state(grid, 2, constants), constants) == pytest.approx(oracle, abs=1e-8)


def test_adjoint_floor(grid, constants):
    rng = np.random.default_rng(5)
    for _ in range(30):
        assert adjoint_eigen_residual(random_number_superposition(grid, rng, constants), constants) >= 1 - 1e-6
