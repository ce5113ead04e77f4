"""Identity-verification suite behind ``coherent-kit verify``.

Each check measures a residual, compares it to a fixed tolerance and
records the formula it exercises.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .dynamics import (
    EvolutionParams,
    coherence_residual,
    commutator_series_check,
    evolve_free,
    free_spread,
)
from .grid import (
    Grid,
    PhysicalConstants,
    WaveFunction,
    adjoint_eigen_residual,
    apply_sequence,
    inner_product,
    moments,
)
from .io import write_json
from .phase_space import (
    PhaseSpaceLattice,
    Quadrature,
    completeness_residual,
    expectation_of_A_function,
    husimi,
    husimi_marginals,
    marginal_moments,
    moment_integral,
    number_coefficients,
    reconstruct_number_state,
)
from .sampling import random_gaussian_state, random_number_superposition
from .states import (
    apply_drift_grid,
    coherent_closed_form,
    coherent_via_number_series,
    coherent_via_ode,
    moments_from_alpha,
    number_state,
    number_states,
    overlap_closed_form,
)

# Citation anchors attached to report records.
ANCHORS = {
    "commutation": "[X,P]=iħ",
    "ladder": "A = (1/λ√2) X + i(λ/ħ√2) P",
    "eigen": "Aψα = αψα",
    "label": "α = (1/√2λ)⟨X⟩ + i(λ/√2ħ)⟨P⟩",
    "uncertainty": "Δ_x Δ_p = ħ/2",
    "covariance": "⟨XP+PX⟩−2⟨X⟩⟨P⟩ =0",
    "adjoint": "Δ²_x = −λ²/2",
    "closed_form": "[2πΔ²_x]^{−1/4} exp(−(x−x₀)²/4Δ²_x + i p₀x/ħ)",
    "ode": "dψ_α(y)/dy = 2(α−y)ψ_α(y)",
    "series": "ψ_α = Σ_n αⁿ/√n! exp(−|α|²/2) χ_n",
    "coefficients": "χ_n = (1/√n!)(A†)ⁿχ_0",
    "number_spectrum": "Nχ_n = n χ_n",
    "raising": "A†χ_n = √(n+1) χ_{n+1}",
    "lowering": "Aχ_n = √n χ_{n−1}",
    "number_shift": "Nχ_n = n χ_n",
    "group": "exp((αβ* − α*β)/2) D(α+β)",
    "drift": "ψ_α = D(α)ψ_0",
    "drift_commutator": "[A, D(α)] = αD(α)",
    "hbc": "exp(R+S)exp([R,S]/2)",
    "drift_inverse": "D†(α) = D⁻¹(α) = D(−α)",
    "evolution": "Ψ(t) = exp(−(i/ħ)Ht) ψ_α",
    "evolved_relation": "A Ψ(t) = −t/(√2mλ) P Ψ(t) + αΨ(t)",
    "heisenberg_series": "[H,A] = −iħ/(√2mλ) P",
    "overlap": "exp(−|α|²/2 − |β|²/2 + α*β)",
    "completeness": "π^{−1}∫ d²α ψ_α⟨ψ_α, ·⟩ = I",
    "number_inversion": "α^{*n}/√n! exp(−|α|²/2) ψ_α",
    "husimi": "ρ_H(x,p) = π^{−1}|⟨ψ_{α(x,p)}, Ψ⟩|²",
    "expectation": "π^{−1}∫ d²α F(α) |⟨ψ_α, Ψ⟩|²",
}

ALPHA_LATTICE = [complex(a, b) for a in np.linspace(-2, 2, 5) for b in np.linspace(-2, 2, 5)]
SEED = 20240611
EXACT_TOLERANCE = 1e-12


def series_terms(alpha: complex) -> int:
    """Series length used in checks: 16 terms past the minimum, capped at chi_64.

    At the minimum length the eigen residual ``|alpha| |c_{n_max-1}|`` can sit
    just under 1e-8; the extra terms push it to roundoff.
    """
    return min(fock.min_dim(alpha) + 16, 65)


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    paper_anchor: str
    measured_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.measured_residual) and self.measured_residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "paper_anchor": self.paper_anchor,
            "measured_residual": float(self.measured_residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    records: list[CheckRecord] = field(default_factory=list)

    def add(self, check_id: str, anchor_key: str, measured: float, tolerance: float):
        self.records.append(CheckRecord(check_id, ANCHORS[anchor_key], float(measured), tolerance))

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def summary(self) -> dict:
        n_pass = sum(r.passed for r in self.records)
        return {
            "total": len(self.records),
            "passed": n_pass,
            "failed": len(self.records) - n_pass,
            "pass": self.passed,
        }

    def to_dict(self) -> dict:
        return {"checks": [r.to_dict() for r in self.records], "summary": self.summary()}


def emit_report(report: VerificationReport, path, metadata: dict | None = None):
    """Write the report as deterministic JSON."""
    payload = report.to_dict()
    if metadata:
        payload["metadata"] = metadata
    return write_json(payload, path)


def _grid_checks(rep: VerificationReport, grid: Grid, c: PhysicalConstants, rng):
    psi0 = coherent_closed_form(grid, 0, c)
    psi1 = coherent_closed_form(grid, 1, c)
    rep.add("grid.normalization", "commutation", abs(inner_product(psi1, psi1) - 1), 1e-12)
    rep.add("grid.overlap_psi0_psi1", "overlap", abs(inner_product(psi0, psi1) - math.exp(-0.5)), 1e-8)

    f = random_gaussian_state(grid, rng, c)
    x_direct = apply_sequence(f, ["X"], c)
    x_ladder = (c.lam / math.sqrt(2)) * (apply_sequence(f, ["A"], c) + apply_sequence(f, ["Adag"], c))
    rep.add("grid.position_from_ladder", "ladder", (x_direct - x_ladder).norm() / x_direct.norm(), 1e-10)

    comm = apply_sequence(f, ["A", "Adag"], c) - apply_sequence(f, ["Adag", "A"], c) - f
    rep.add("grid.ladder_commutator", "ladder", comm.norm() / f.norm(), 1e-6)

    phi = f.momentum_samples()
    parseval = abs(math.sqrt(float(np.sum(np.abs(phi) ** 2)) * grid.dp) - f.norm())
    rep.add("grid.parseval", "commutation", parseval, 1e-12)

    worst_u = worst_cov = worst_adj = 0.0
    for a in ALPHA_LATTICE:
        m = moments(coherent_closed_form(grid, a, c), c)
        worst_u = max(worst_u, abs(m.delta_x * m.delta_p - c.hbar / 2))
        worst_cov = max(worst_cov, abs(m.sym_covariance))
    rep.add("grid.uncertainty_product", "uncertainty", worst_u, 1e-8)
    rep.add("grid.symmetric_covariance", "covariance", worst_cov, 1e-8)

    for a in (0, 2 + 1j):
        worst_adj = max(worst_adj, abs(adjoint_eigen_residual(coherent_closed_form(grid, a, c), c) - 1))
    rep.add("grid.adjoint_residual_coherent", "adjoint", worst_adj, 1e-6)

    floor = min(adjoint_eigen_residual(random_number_superposition(grid, rng, c), c) for _ in range(20))
    rep.add("grid.adjoint_residual_floor", "adjoint", max(0.0, 1 - floor), 1e-6)


def _state_checks(rep: VerificationReport, grid: Grid, c: PhysicalConstants, rng):
    eig = {"closed_form": 0.0, "ode": 0.0, "series": 0.0}
    ode_diff = series_diff = 0.0
    for a in ALPHA_LATTICE:
        n_max = series_terms(a)
        states = {
            "closed_form": coherent_closed_form(grid, a, c),
            "ode": coherent_via_ode(grid, a, c),
            "series": coherent_via_number_series(grid, a, n_max, c),
        }
        for name, s in states.items():
            res = (apply_sequence(s, ["A"], c) - a * s).norm()
            eig[name] = max(eig[name], res)
        ode_diff = max(ode_diff, (states["ode"] - states["closed_form"]).norm())
        series_diff = max(series_diff, (states["series"] - states["closed_form"]).norm())
    rep.add("states.eigen_closed_form", "eigen", eig["closed_form"], 1e-8)
    rep.add("states.eigen_ode", "eigen", eig["ode"], 1e-8)
    rep.add("states.eigen_series", "eigen", eig["series"], 1e-8)
    rep.add("states.ode_vs_closed_form", "ode", ode_diff, 1e-8)
    rep.add("states.series_vs_closed_form", "series", series_diff, 1e-6)

    worst = 0.0
    for _ in range(20):
        a, b = rng.uniform(-2, 2, 2) + 1j * rng.uniform(-2, 2, 2)
        grid_val = inner_product(coherent_closed_form(grid, a, c), coherent_closed_form(grid, b, c))
        worst = max(worst, abs(grid_val - overlap_closed_form(a, b)))
    rep.add("states.overlap_formula", "overlap", worst, 1e-8)

    chi = number_states(grid, 13, c)
    gram = chi @ chi.T * grid.dx
    rep.add("states.number_orthonormality", "number_spectrum", float(np.abs(gram - np.eye(13)).max()), 1e-10)

    low = rai = 0.0
    for n in range(1, 8):
        cn = WaveFunction(grid, chi[n])
        low = max(low, (apply_sequence(cn, ["A"], c) - math.sqrt(n) * WaveFunction(grid, chi[n - 1])).norm())
        rai = max(rai, (apply_sequence(cn, ["Adag"], c) - math.sqrt(n + 1) * WaveFunction(grid, chi[n + 1])).norm())
    rep.add("states.lowering", "lowering", low, 1e-8)
    rep.add("states.raising", "raising", rai, 1e-8)

    coeffs = number_coefficients(coherent_closed_form(grid, 1, c), 21, c)
    rep.add("states.number_coefficients", "coefficients",
            float(np.abs(coeffs - fock.coherent_coefficients(1, 21)).max()), 1e-8)

    psi0 = coherent_closed_form(grid, 0, c)
    worst_d = 0.0
    for a in ALPHA_LATTICE:
        x0, p0 = moments_from_alpha(a, c)
        worst_d = max(worst_d, (apply_drift_grid(psi0, x0, p0, c) - coherent_closed_form(grid, a, c)).norm())
    rep.add("states.drift_grid", "drift", worst_d, 1e-8)

    a, b = 0.5 + 0.3j, -0.4 + 0.8j
    xa, pa = moments_from_alpha(a, c)
    xb, pb = moments_from_alpha(b, c)
    f = random_gaussian_state(grid, rng, c)
    lhs = apply_drift_grid(apply_drift_grid(f, xb, pb, c), xa, pa, c)
    xs, ps = moments_from_alpha(a + b, c)
    phase = np.exp((a * b.conjugate() - a.conjugate() * b) / 2)
    rep.add("states.galilei_composition", "group", (lhs - phase * apply_drift_grid(f, xs, ps, c)).norm(), 1e-8)


def _fock_checks(rep: VerificationReport, dim: int):
    a, adag, n = fock.ladder_matrices(dim)
    rep.add("fock.number_spectrum", "number_spectrum",
            float(np.abs(np.diag(adag @ a) - np.arange(dim)).max()), EXACT_TOLERANCE)
    shift = max(np.abs(n @ adag - adag @ n - adag).max(), np.abs(n @ a - a @ n + a).max())
    rep.add("fock.number_shift", "number_shift", float(shift), EXACT_TOLERANCE)

    d = fock.drift_matrix(1 + 1j, dim)
    rep.add("fock.drift_unitarity", "drift_inverse", fock.block_norm(d.conj().T @ d - np.eye(dim)), 1e-10)
    rep.add("fock.drift_inverse", "drift_inverse", fock.drift_inverse_check(1 + 1j, dim), 1e-10)
    col = np.abs(fock.drift_matrix(1, dim)[: dim // 2, 0] - fock.coherent_coefficients(1, dim // 2)).max()
    rep.add("fock.drift_column", "coefficients", float(col), 1e-10)
    rep.add("fock.group_law", "group", max(fock.group_law_check(1, 1j, dim),
                                           fock.group_law_check(1, 1, dim)), 1e-8)
    rep.add("fock.drift_commutator", "drift_commutator",
            max(fock.commutator_drift_check(1, dim), fock.commutator_drift_check(2j, 2 * dim)), 1e-8)
    rep.add("fock.hbc", "hbc", fock.hbc_check((1, 0), (0, 1), dim), 1e-8)


def _dynamics_checks(rep: VerificationReport, grid: Grid, c: PhysicalConstants):
    times = (0.25, 0.5, 1.0, 2.0)
    constrained = eigen = 0.0
    for t in times:
        for a in (0, 0.5 + 0.5j):
            cr, er = coherence_residual(a, t, c, grid)
            constrained = max(constrained, cr)
            if a == 0:
                eigen = max(eigen, abs(er - t * c.hbar / (2 * c.mass * c.lam**2)))
    rep.add("dynamics.evolved_relation", "evolved_relation", constrained, 1e-7)
    rep.add("dynamics.eigen_residual_growth", "evolved_relation", eigen, 1e-6)

    psi = coherent_closed_form(grid, 0.5 + 0.5j, c)
    m0 = moments(psi, c)
    phi0 = np.abs(psi.momentum_samples())
    unit = mom = spread = 0.0
    for t in times:
        out = evolve_free(psi, EvolutionParams(t, c))
        unit = max(unit, abs(out.norm() - psi.norm()))
        mom = max(mom, float(np.abs(np.abs(out.momentum_samples()) - phi0).max()))
        mean, width = free_spread(m0, t, c.mass)
        mt = moments(out, c)
        spread = max(spread, abs(mt.delta_x - width), abs(mt.mean_x - mean))
    rep.add("dynamics.unitarity", "evolution", unit, 1e-12)
    rep.add("dynamics.momentum_invariance", "evolution", mom, 1e-12)
    rep.add("dynamics.spreading_law", "evolution", spread, 1e-8)
    rep.add("dynamics.heisenberg_series", "heisenberg_series", commutator_series_check(c, grid), 1e-6)


def _phase_space_checks(rep: VerificationReport, grid: Grid, c: PhysicalConstants):
    quad = Quadrature(8.0, 64, 64)
    rep.add("phase.completeness", "completeness", completeness_residual(8, quad, grid, c), 1e-6)
    worst = 0.0
    for n, m in itertools.product(range(8), repeat=2):
        target = math.pi * math.factorial(n) if n == m else 0.0
        scale = math.pi * math.sqrt(math.factorial(n) * math.factorial(m))
        worst = max(worst, abs(moment_integral(n, m, quad) - target) / scale)
    rep.add("phase.moment_integrals", "completeness", worst, 1e-8)

    rec = max((reconstruct_number_state(n, quad, grid, c) - number_state(grid, n, c)).norm()
              for n in range(6))
    rep.add("phase.number_inversion", "number_inversion", rec, 1e-6)

    beta = 0.5 - 0.5j
    state = coherent_closed_form(grid, beta, c)
    lattice = PhaseSpaceLattice.around(state, c)
    hmap = husimi(state, lattice)
    centre = lattice.x_axis.size // 2, lattice.p_axis.size // 2
    rep.add("phase.husimi_peak", "husimi", abs(hmap.values[centre] - 1 / math.pi), 1e-6)
    rep.add("phase.husimi_mass", "husimi", abs(hmap.riemann_mass() - 2 * c.hbar), 1e-4)
    rep.add("phase.husimi_nonnegative", "husimi", max(0.0, -float(hmap.values.min())), 0.0)
    chart = float(np.abs(hmap.values - np.abs(np.vectorize(overlap_closed_form)(lattice.alphas, beta)) ** 2
                         / math.pi).max())
    rep.add("phase.husimi_chart", "husimi", chart, 1e-8)
    mx, _ = husimi_marginals(hmap)
    _, _, var = marginal_moments(lattice.x_axis, mx)
    true_var = moments(state, c).delta_x ** 2
    rep.add("phase.marginal_broadening", "husimi", abs(var - (true_var + c.lam**2 / 2)), 1e-4)

    worst = 0.0
    states = [state] + [number_state(grid, n, c) for n in range(3)]
    for s in states:
        for poly in ([1], [0, 1], [0, 0, 1]):
            ps, direct = expectation_of_A_function(s, poly, quad, c)
            worst = max(worst, abs(ps - direct))
    rep.add("phase.expectation_of_A_function", "expectation", worst, 1e-6)


def run_verification(grid: Grid, constants: PhysicalConstants, fock_dim: int = 64) -> VerificationReport:
    """Run every module's identity checks and collect the results."""
    rng = np.random.default_rng(SEED)
    rep = VerificationReport()
    _grid_checks(rep, grid, constants, rng)
    _state_checks(rep, grid, constants, rng)
    _fock_checks(rep, fock_dim)
    _dynamics_checks(rep, grid, constants)
    _phase_space_checks(rep, grid, constants)
    return rep
