"""Coherent and number states on a grid.

Coherent states are built three ways (closed-form Gaussian, integration of
the first-order eigen-equation, number-state series) plus the grid drift
operator. All routes share one phase convention, ``psi_alpha = D(alpha) psi_0``:

    psi_alpha(x) = (pi lam^2)^(-1/4) exp(-(x - x0)^2 / (2 lam^2)
                                         + i p0 (x - x0/2) / hbar)

which is the textbook Gaussian with its real envelope times ``exp(i p0 x/hbar)``,
multiplied by the constant ``exp(-i x0 p0 / (2 hbar))``. With this choice the
overlap formula and the number-basis coefficients hold including phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .errors import ConfigurationError
from .fock import coherent_coefficients
from .grid import Grid, PhysicalConstants, WaveFunction, _check_constants

MAX_NUMBER_STATE = 64
SERIES_TAIL_TOLERANCE = 1e-14
RESOLUTION_TOLERANCE = 1e-10


def alpha_from_moments(x0: float, p0: float, constants: PhysicalConstants) -> complex:
    c = constants
    return complex(x0 / (math.sqrt(2) * c.lam), c.lam * p0 / (math.sqrt(2) * c.hbar))


def moments_from_alpha(alpha: complex, constants: PhysicalConstants) -> tuple[float, float]:
    """Inverse of :func:`alpha_from_moments`: ``(x0, p0)``."""
    c = constants
    alpha = complex(alpha)
    return math.sqrt(2) * c.lam * alpha.real, math.sqrt(2) * c.hbar * alpha.imag / c.lam


@dataclass(frozen=True)
class CoherentLabel:
    """Eigenvalue ``alpha`` of A, equivalently the centroid ``(x0, p0)``."""

    alpha: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not (math.isfinite(self.alpha.real) and math.isfinite(self.alpha.imag)):
            raise ConfigurationError(f"alpha must be finite, got {self.alpha!r}")

    @classmethod
    def from_moments(cls, x0: float, p0: float, constants: PhysicalConstants) -> CoherentLabel:
        return cls(alpha_from_moments(x0, p0, constants))

    def centroid(self, constants: PhysicalConstants) -> tuple[float, float]:
        return moments_from_alpha(self.alpha, constants)


def _as_alpha(label) -> complex:
    return label.alpha if isinstance(label, CoherentLabel) else complex(label)


def coherent_samples(x, alpha, constants: PhysicalConstants) -> np.ndarray:
    """Closed-form coherent-state values, no validity checks.

    ``alpha`` may be an array; the result then broadcasts as
    ``alpha[..., None]`` against ``x``.
    """
    c = constants
    alpha = np.asarray(alpha, dtype=np.complex128)
    if alpha.ndim:
        alpha = alpha[..., None]
    x0 = math.sqrt(2) * c.lam * alpha.real
    p0 = math.sqrt(2) * c.hbar * alpha.imag / c.lam
    norm = (np.pi * c.lam**2) ** -0.25
    expo = -((x - x0) ** 2) / (2 * c.lam**2) + 1j * p0 * (x - x0 / 2) / c.hbar
    return norm * np.exp(expo)


def _check_gaussian_fits(grid: Grid, alpha: complex, constants: PhysicalConstants):
    c = constants
    x0, p0 = moments_from_alpha(alpha, c)
    quarter = grid.length / 4
    if not (grid.x_min + quarter <= x0 <= grid.x_max - quarter):
        raise ConfigurationError(
            f"centre x0={x0:.6g} outside the middle half "
            f"[{grid.x_min + quarter:.6g}, {grid.x_max - quarter:.6g}] of the grid"
        )
    delta_x = c.lam / math.sqrt(2)
    if delta_x < 4 * grid.dx:
        raise ConfigurationError(
            f"width lam/sqrt(2)={delta_x:.4g} is under 4*dx={4 * grid.dx:.4g}; refine the grid"
        )
    p_max = np.pi * c.hbar / grid.dx
    delta_p = c.hbar / (math.sqrt(2) * c.lam)
    if abs(p0) + 8 * delta_p > p_max:
        raise ConfigurationError(
            f"momentum p0={p0:.6g} too close to the grid cutoff {p_max:.6g}; refine the grid"
        )


def coherent_closed_form(grid: Grid, label, constants: PhysicalConstants) -> WaveFunction:
    """Normalized Gaussian coherent state with eigenvalue ``alpha``."""
    _check_constants(grid, constants)
    alpha = _as_alpha(label)
    _check_gaussian_fits(grid, alpha, constants)
    return WaveFunction(grid, coherent_samples(grid.x, alpha, constants))


def _rk4_log_amplitude(y: np.ndarray, alpha: complex) -> np.ndarray:
    """Integrate ``d(log psi)/dy = 2 (alpha - y)`` across the nodes ``y``."""
    def rhs(t):
        return 2 * (alpha - t)

    g = np.empty(y.shape, dtype=np.complex128)
    g[0] = 0.0
    for j in range(1, y.size):
        h = y[j] - y[j - 1]
        t = y[j - 1]
        k1 = rhs(t)
        k2 = rhs(t + h / 2)
        k3 = k2
        k4 = rhs(t + h)
        g[j] = g[j - 1] + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return g


def coherent_via_ode(grid: Grid, label, constants: PhysicalConstants) -> WaveFunction:
    """Coherent state from the eigen-equation ``A psi = alpha psi`` as an ODE.

    In ``y = x / (sqrt(2) lam)`` the equation reads ``psi' = 2 (alpha - y) psi``.
    It is integrated for ``log psi`` with classical RK4, normalized on the
    grid, and rotated so the sample nearest ``x0`` carries the convention's
    phase ``p0 (x_j - x0/2) / hbar``.
    """
    _check_constants(grid, constants)
    c = constants
    alpha = _as_alpha(label)
    _check_gaussian_fits(grid, alpha, c)
    y = grid.x / (math.sqrt(2) * c.lam)
    g = _rk4_log_amplitude(y, alpha)
    psi = np.exp(g - g.real.max())
    psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)) * grid.dx)
    x0, p0 = moments_from_alpha(alpha, c)
    j0 = int(np.argmin(np.abs(grid.x - x0)))
    target = p0 * (grid.x[j0] - x0 / 2) / c.hbar
    psi *= np.exp(1j * (target - np.angle(psi[j0])))
    return WaveFunction(grid, psi)


def _hermite_functions(xi: np.ndarray, count: int) -> np.ndarray:
    """Rows ``h_0..h_{count-1}`` of orthonormal Hermite functions at ``xi``.

    Recurs on the Gaussian-weighted functions directly, which stays bounded
    for large n where ``H_n(xi) exp(-xi^2/2)`` would overflow.
    """
    h = np.zeros((count, xi.size))
    h[0] = np.pi**-0.25 * np.exp(-(xi**2) / 2)
    if count > 1:
        h[1] = math.sqrt(2) * xi * h[0]
    for n in range(1, count - 1):
        h[n + 1] = math.sqrt(2 / (n + 1)) * xi * h[n] - math.sqrt(n / (n + 1)) * h[n - 1]
    return h


def _check_resolved(wf: WaveFunction, what: str):
    if wf.edge_amplitude > RESOLUTION_TOLERANCE:
        raise ConfigurationError(
            f"{what} reaches the grid edge (amplitude {wf.edge_amplitude:.3g}); widen the domain"
        )
    phi = np.abs(np.fft.fftshift(wf.momentum_samples()))
    band = max(2, phi.size // 50)
    tail = max(phi[:band].max(), phi[-band:].max())
    if tail > RESOLUTION_TOLERANCE:
        raise ConfigurationError(
            f"{what} reaches the momentum cutoff (amplitude {tail:.3g}); refine the grid"
        )


def number_states(grid: Grid, count: int, constants: PhysicalConstants) -> np.ndarray:
    """Samples of chi_0..chi_{count-1} as a ``(count, n_points)`` real array."""
    _check_constants(grid, constants)
    if count < 1 or count - 1 > MAX_NUMBER_STATE:
        raise ConfigurationError(
            f"number states are limited to n <= {MAX_NUMBER_STATE}, requested up to {count - 1}"
        )
    lam = constants.lam
    rows = _hermite_functions(grid.x / lam, count) / math.sqrt(lam)
    _check_resolved(WaveFunction(grid, rows[-1]), f"number state n={count - 1}")
    return rows


def number_state(grid: Grid, n: int, constants: PhysicalConstants) -> WaveFunction:
    """Number state chi_n: the n-th Hermite function of ``x / lam``."""
    if n < 0:
        raise ConfigurationError(f"n must be >= 0, got {n}")
    return WaveFunction(grid, number_states(grid, n + 1, constants)[n])


def series_tail(alpha: complex, n_max: int) -> float:
    """Squared norm of the dropped terms ``n >= n_max`` (a Poisson tail)."""
    mean = abs(complex(alpha)) ** 2
    if mean == 0:
        return 0.0 if n_max >= 1 else 1.0
    return float(poisson.sf(n_max - 1, mean))


def coherent_via_number_series(
    grid: Grid, label, n_max: int, constants: PhysicalConstants
) -> WaveFunction:
    """Partial sum ``sum_{n < n_max} c_n(alpha) chi_n`` of the number expansion."""
    alpha = _as_alpha(label)
    tail = series_tail(alpha, n_max)
    if tail > SERIES_TAIL_TOLERANCE:
        raise ConfigurationError(
            f"n_max={n_max} leaves Poisson tail {tail:.3g} for |alpha|^2={abs(alpha) ** 2:.4g}; "
            f"use n_max >= {math.ceil(4 * abs(alpha) ** 2 + 16)}"
        )
    chi = number_states(grid, n_max, constants)
    coeffs = coherent_coefficients(alpha, n_max)
    return WaveFunction(grid, coeffs @ chi)


def overlap_closed_form(alpha: complex, beta: complex) -> complex:
    """``<psi_alpha, psi_beta> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)``."""
    a, b = complex(alpha), complex(beta)
    return complex(np.exp(-abs(a) ** 2 / 2 - abs(b) ** 2 / 2 + a.conjugate() * b))


def apply_drift_grid(f: WaveFunction, x0: float, p0: float, constants: PhysicalConstants) -> WaveFunction:
    """Apply ``D(alpha(x0, p0))`` on the grid.

    Translates by ``x0`` in momentum space, boosts by ``p0`` in position space,
    then multiplies by ``exp(-i x0 p0 / (2 hbar))``.
    """
    _check_constants(f.grid, constants)
    g, c = f.grid, constants
    if abs(x0) >= g.length / 2:
        raise ConfigurationError(f"translation {x0} exceeds half the domain length")
    shifted = np.fft.ifft(np.exp(-1j * g.wavenumbers * x0) * np.fft.fft(f.samples))
    boosted = np.exp(1j * p0 * g.x / c.hbar) * shifted
    out = WaveFunction(g, np.exp(-1j * x0 * p0 / (2 * c.hbar)) * boosted)
    if f.contained:
        _check_resolved(out, f"drifted state (x0={x0:.4g}, p0={p0:.4g})")
    return out
