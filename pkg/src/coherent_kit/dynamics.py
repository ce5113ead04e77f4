"""Free-particle time evolution.

The propagator ``exp(-i H t / hbar)`` with ``H = P^2 / 2m`` is diagonal on
the momentum lattice, so a state is evolved to any time in a single
spectral step; there is no time-stepping error.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grid import (
    Grid,
    MomentReport,
    Operator,
    PhysicalConstants,
    WaveFunction,
    _check_constants,
    apply_sequence,
    best_eigen_residual,
    moments,
)
from .states import _as_alpha, coherent_closed_form, number_state

CONTAINMENT_SIGMAS = 6.0


@dataclass(frozen=True)
class EvolutionParams:
    t: float
    constants: PhysicalConstants = PhysicalConstants()

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ConfigurationError(f"t must be finite, got {self.t!r}")


def free_spread(m0: MomentReport, t: float, mass: float) -> tuple[float, float]:
    """Exact ``(mean_x(t), delta_x(t))`` under ``H = P^2 / 2m``.

    Uses ``X(t) = X + P t / m`` in the Heisenberg picture, so
    ``<X^2>(t) = <X^2> + t <XP + PX> / m + t^2 <P^2> / m^2``.
    """
    mean = m0.mean_x + m0.mean_p * t / mass
    cov = m0.sym_covariance + 2 * m0.mean_x * m0.mean_p
    x2 = m0.mean_x2 + t * cov / mass + t**2 * m0.mean_p2 / mass**2
    return mean, math.sqrt(max(x2 - mean**2, 0.0))


def _check_containment(f: WaveFunction, t: float, constants: PhysicalConstants):
    g = f.grid
    m0 = moments(f.normalized(), constants)
    mean, width = free_spread(m0, t, constants.mass)
    lo, hi = mean - CONTAINMENT_SIGMAS * width, mean + CONTAINMENT_SIGMAS * width
    if lo <= g.x_min or hi >= g.x_max:
        raise ConfigurationError(
            f"evolved packet at t={t:g} spans [{lo:.4g}, {hi:.4g}] "
            f"(centre {mean:.4g} +/- {CONTAINMENT_SIGMAS:g} x {width:.4g}); "
            f"the grid [{g.x_min:g}, {g.x_max:g}] must cover at least that interval"
        )


def _propagate(f: WaveFunction, t: float, constants: PhysicalConstants) -> WaveFunction:
    g, c = f.grid, constants
    kernel = np.exp(-1j * g.momentum_lattice**2 * t / (2 * c.mass * c.hbar))
    return WaveFunction(g, np.fft.ifft(kernel * np.fft.fft(f.samples)))


def evolve_free(f: WaveFunction, params: EvolutionParams) -> WaveFunction:
    """Evolve ``f`` to time ``params.t`` (negative times allowed)."""
    c = params.constants
    _check_constants(f.grid, c)
    if params.t == 0:
        return WaveFunction(f.grid, f.samples)
    _check_containment(f, params.t, c)
    return _propagate(f, params.t, c)


def relation_residual(
    psi: WaveFunction, alpha: complex, t: float, constants: PhysicalConstants, sign: int = -1
) -> float:
    """``||(A + sign * t P / (sqrt(2) m lam) - alpha) psi||``.

    For ``psi = exp(-i H t / hbar) psi_alpha`` the Heisenberg picture gives
    ``U A U^dag = A - t P / (sqrt(2) m lam)``, so only ``sign=-1`` vanishes.
    ``sign=+1`` is kept to measure the opposite-sign form.
    """
    c = constants
    a_psi = apply_sequence(psi, [Operator.A], c)
    p_psi = apply_sequence(psi, [Operator.P], c)
    shift = sign * t / (math.sqrt(2) * c.mass * c.lam)
    return (a_psi + shift * p_psi - complex(alpha) * psi).norm()


def coherence_residual(
    f0_label, t: float, constants: PhysicalConstants, grid: Grid
) -> tuple[float, float]:
    """Evolve ``psi_alpha`` to ``t`` and measure how far it is from coherent.

    Returns ``(constrained, eigen)``: the residual of the conserved relation
    ``(A - t P / (sqrt(2) m lam)) Psi(t) = alpha Psi(t)``, and
    ``min_beta ||(A - beta) Psi(t)||``, which is zero only if ``Psi(t)`` is
    still an eigenvector of A.
    """
    c = constants
    alpha = _as_alpha(f0_label)
    psi = evolve_free(coherent_closed_form(grid, alpha, c), EvolutionParams(t, c))
    constrained = relation_residual(psi, alpha, t, c)
    eigen, _ = best_eigen_residual(psi, Operator.A, c)
    return constrained, eigen


def _rel(num: WaveFunction, scale: float) -> float:
    return num.norm() / scale if scale > 0 else num.norm()


def commutator_series_check(
    constants: PhysicalConstants, grid: Grid, states=None
) -> float:
    """Max relative residual of ``[H, A] = -i hbar P / (sqrt(2) m lam)`` and ``[H, [H, A]] = 0``.

    ``states`` defaults to psi_0, psi_1 and chi_3.
    """
    c = constants
    if states is None:
        states = [
            coherent_closed_form(grid, 0, c),
            coherent_closed_form(grid, 1, c),
            number_state(grid, 3, c),
        ]
    worst = 0.0
    coef = -1j * c.hbar / (math.sqrt(2) * c.mass * c.lam)
    for f in states:
        ha = apply_sequence(f, ["H", "A"], c)
        ah = apply_sequence(f, ["A", "H"], c)
        rhs = coef * apply_sequence(f, ["P"], c)
        worst = max(worst, _rel(ha - ah - rhs, rhs.norm()))

        hha = apply_sequence(f, ["H", "H", "A"], c)
        hah = apply_sequence(f, ["H", "A", "H"], c)
        ahh = apply_sequence(f, ["A", "H", "H"], c)
        scale = max(hha.norm(), hah.norm(), ahh.norm())
        worst = max(worst, _rel(hha - 2 * hah + ahh, scale))
    return worst


TRACE_COLUMNS = ("t", "mean_x", "mean_p", "delta_x", "delta_p", "eigen_residual")


def evolution_trace(f: WaveFunction, times, constants: PhysicalConstants) -> list[dict]:
    """Moments and A-eigen residual of ``f`` evolved to each of ``times``."""
    rows = []
    for t in times:
        psi = evolve_free(f, EvolutionParams(float(t), constants))
        m = moments(psi, constants)
        eigen, _ = best_eigen_residual(psi, Operator.A, constants)
        rows.append(
            {
                "t": float(t),
                "mean_x": m.mean_x,
                "mean_p": m.mean_p,
                "delta_x": m.delta_x,
                "delta_p": m.delta_p,
                "eigen_residual": eigen,
            }
        )
    return rows


def write_trace_csv(rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in rows:
            writer.writerow([f"{row[k]:.17g}" for k in TRACE_COLUMNS])
    return path
