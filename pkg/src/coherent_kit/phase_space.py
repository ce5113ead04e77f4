"""Husimi distribution and coherent-state integrals over the alpha plane.

The chart ``alpha(x, p) = x / (sqrt(2) lam) + i lam p / (sqrt(2) hbar)`` has
Jacobian ``1 / (2 hbar)``, so ``d^2 alpha = dx dp / (2 hbar)``. A normalized
state therefore has Husimi mass ``2 hbar`` over the (x, p) plane.

Integrals over the alpha plane use polar nodes: Gauss-Legendre in the
radius on ``[0, R]`` and uniform nodes in the angle, which integrate every
``exp(i k theta)`` with ``|k| < n_theta`` exactly.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConfigurationError
from .grid import (
    Grid,
    PhysicalConstants,
    WaveFunction,
    _check_constants,
    _require_normalized,
    apply_sequence,
    inner_product,
    moments,
)
from .io import thread_count, write_json
from .states import coherent_samples, number_states

ROW_BLOCK = 8
NODE_BLOCK = 512
MAX_POLY_DEGREE = 8


def _uniform_axis(axis, name: str) -> np.ndarray:
    axis = np.array(axis, dtype=float)
    if axis.ndim != 1 or axis.size < 2:
        raise ConfigurationError(f"{name} needs at least two nodes")
    step = np.diff(axis)
    if np.any(step <= 0):
        raise ConfigurationError(f"{name} must be strictly increasing")
    if np.ptp(step) > 1e-9 * abs(step.mean()):
        raise ConfigurationError(f"{name} must be uniform")
    axis.flags.writeable = False
    return axis


@dataclass(frozen=True, eq=False)
class PhaseSpaceLattice:
    x_axis: np.ndarray
    p_axis: np.ndarray
    constants: PhysicalConstants = PhysicalConstants()

    def __post_init__(self):
        object.__setattr__(self, "x_axis", _uniform_axis(self.x_axis, "x_axis"))
        object.__setattr__(self, "p_axis", _uniform_axis(self.p_axis, "p_axis"))

    @property
    def dx(self) -> float:
        return float(self.x_axis[1] - self.x_axis[0])

    @property
    def dp(self) -> float:
        return float(self.p_axis[1] - self.p_axis[0])

    @property
    def cell_measure(self) -> float:
        """``dx dp / (2 hbar)``: the alpha-plane area of one cell."""
        return self.dx * self.dp / (2 * self.constants.hbar)

    @cached_property
    def alphas(self) -> np.ndarray:
        """``alpha(x, p)`` at every node, shape ``(n_x, n_p)``."""
        c = self.constants
        return (self.x_axis[:, None] / (math.sqrt(2) * c.lam)
                + 1j * c.lam * self.p_axis[None, :] / (math.sqrt(2) * c.hbar))

    @classmethod
    def around(cls, state: WaveFunction, constants: PhysicalConstants,
               n_nodes: int = 128, widths: float = 5.0) -> PhaseSpaceLattice:
        """Lattice centred on the state's centroid, ``widths`` Husimi widths each way.

        A Husimi width is the state's own width broadened by the coherent
        width: ``sqrt(delta_x^2 + lam^2/2)`` in x. The centroid is always a
        node (index ``n_nodes // 2``).
        """
        c = constants
        m = moments(state, c)
        wx = math.sqrt(m.delta_x**2 + c.lam**2 / 2)
        wp = math.sqrt(m.delta_p**2 + c.hbar**2 / (2 * c.lam**2))
        half = n_nodes // 2
        k = np.arange(n_nodes) - half
        return cls(m.mean_x + k * widths * wx / half, m.mean_p + k * widths * wp / half, c)

    def metadata(self) -> dict:
        return {
            "n_x": int(self.x_axis.size),
            "n_p": int(self.p_axis.size),
            "x_min": float(self.x_axis[0]),
            "x_max": float(self.x_axis[-1]),
            "p_min": float(self.p_axis[0]),
            "p_max": float(self.p_axis[-1]),
            "dx": self.dx,
            "dp": self.dp,
            "hbar": self.constants.hbar,
            "mass": self.constants.mass,
            "lambda": self.constants.lam,
        }


@dataclass(frozen=True, eq=False)
class HusimiMap:
    lattice: PhaseSpaceLattice
    values: np.ndarray = field(repr=False)
    undersized: bool = False

    def mass(self) -> float:
        """Trapezoid integral of the map over x and p (``2 hbar`` when complete)."""
        return float(trapezoid(trapezoid(self.values, self.lattice.p_axis, axis=1),
                               self.lattice.x_axis))

    def riemann_mass(self) -> float:
        return float(self.values.sum() * self.lattice.dx * self.lattice.dp)

    def to_csv(self, path) -> Path:
        """Rows ``x,p,rho_h`` with p varying fastest."""
        path = Path(path)
        lat = self.lattice
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "p", "rho_h"])
            for i, x in enumerate(lat.x_axis):
                for j, p in enumerate(lat.p_axis):
                    writer.writerow([f"{x:.17g}", f"{p:.17g}", f"{self.values[i, j]:.17g}"])
        return path

    def sidecar(self) -> dict:
        expected = 2 * self.lattice.constants.hbar
        mass = self.riemann_mass()
        return {
            "lattice": self.lattice.metadata(),
            "normalization": {
                "mass": mass,
                "expected": expected,
                "abs_error": abs(mass - expected),
                "tolerance": 1e-4,
                "pass": abs(mass - expected) <= 1e-4,
            },
            "max_value": float(self.values.max()),
            "min_value": float(self.values.min()),
            "undersized": bool(self.undersized),
        }

    def write(self, stem) -> tuple[Path, Path]:
        stem = Path(stem)
        csv_path = self.to_csv(stem.with_suffix(".csv"))
        json_path = write_json(self.sidecar(), stem.with_suffix(".json"))
        return csv_path, json_path


def _husimi_rows(samples, grid: Grid, x_rows, p_axis, c: PhysicalConstants) -> np.ndarray:
    # |<psi_alpha, Psi>|: the constant phase of psi_alpha drops out
    x = grid.x
    env = (np.pi * c.lam**2) ** -0.25 * np.exp(-((x[None, :] - x_rows[:, None]) ** 2) / (2 * c.lam**2))
    kernel = np.exp(-1j * np.outer(x, p_axis) / c.hbar)
    overlap = (env * samples[None, :]) @ kernel * grid.dx
    return np.abs(overlap) ** 2 / np.pi


def husimi(state: WaveFunction, lattice: PhaseSpaceLattice, workers: int | None = None) -> HusimiMap:
    """``rho_H(x, p) = |<psi_alpha(x,p), state>|^2 / pi`` at every lattice node.

    Rows are evaluated in fixed blocks so the output does not depend on the
    number of workers.
    """
    c = lattice.constants
    _check_constants(state.grid, c)
    _require_normalized(state)
    xs = lattice.x_axis
    blocks = [xs[i:i + ROW_BLOCK] for i in range(0, xs.size, ROW_BLOCK)]
    workers = workers or thread_count()

    def run(block):
        return _husimi_rows(state.samples, state.grid, block, lattice.p_axis, c)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    values = np.vstack(parts)
    values.flags.writeable = False

    peak = values.max()
    edge = max(values[0].max(), values[-1].max(), values[:, 0].max(), values[:, -1].max())
    undersized = bool(peak > 0 and edge > 1e-4 * peak)
    if undersized:
        warnings.warn("Husimi lattice does not cover the state's support; mass will be short",
                      stacklevel=2)
    return HusimiMap(lattice, values, undersized)


def husimi_marginals(hmap: HusimiMap) -> tuple[np.ndarray, np.ndarray]:
    """x- and p-marginals of the map, each scaled by ``1 / (2 hbar)`` to unit mass."""
    lat = hmap.lattice
    scale = 1 / (2 * lat.constants.hbar)
    mx = trapezoid(hmap.values, lat.p_axis, axis=1) * scale
    mp = trapezoid(hmap.values, lat.x_axis, axis=0) * scale
    return mx, mp


def marginal_moments(axis, density) -> tuple[float, float, float]:
    """``(mass, mean, variance)`` of a sampled 1-D density by the trapezoid rule."""
    mass = float(trapezoid(density, axis))
    mean = float(trapezoid(axis * density, axis)) / mass
    var = float(trapezoid((axis - mean) ** 2 * density, axis)) / mass
    return mass, mean, var


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Polar product rule for integrals over the disk ``|alpha| <= radius``."""

    radius: float = 8.0
    n_radial: int = 64
    n_theta: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError("radius must be > 0")
        if self.n_radial < 1 or self.n_theta < 1:
            raise ConfigurationError("node counts must be positive")

    @cached_property
    def _nodes(self) -> tuple[np.ndarray, np.ndarray]:
        t, w = np.polynomial.legendre.leggauss(self.n_radial)
        r = self.radius * (t + 1) / 2
        wr = self.radius / 2 * w * r  # includes the polar Jacobian r
        theta = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        alphas = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
        weights = np.repeat(wr * (2 * np.pi / self.n_theta), self.n_theta)
        alphas.flags.writeable = False
        weights.flags.writeable = False
        return alphas, weights

    @property
    def alphas(self) -> np.ndarray:
        return self._nodes[0]

    @property
    def weights(self) -> np.ndarray:
        return self._nodes[1]

    def integrate(self, values) -> complex:
        """``int d^2 alpha f(alpha)`` given ``f`` sampled at :attr:`alphas`."""
        return complex(np.dot(self.weights, values))


def moment_integral(n: int, m: int, quad: Quadrature) -> complex:
    """``int d^2 alpha conj(alpha)^n alpha^m exp(-|alpha|^2)`` over the disk.

    Tends to ``pi n! delta_{nm}`` as the radius grows.
    """
    a = quad.alphas
    return quad.integrate(np.conj(a) ** n * a**m * np.exp(-np.abs(a) ** 2))


def _coherent_overlaps(rows: np.ndarray, grid: Grid, quad: Quadrature, c: PhysicalConstants) -> np.ndarray:
    """``<row_i, psi_alpha>`` for every row and quadrature node, shape ``(n_rows, n_nodes)``."""
    out = np.empty((rows.shape[0], quad.alphas.size), dtype=np.complex128)
    conj_rows = np.conj(rows)
    for s in range(0, quad.alphas.size, NODE_BLOCK):
        block = coherent_samples(grid.x, quad.alphas[s:s + NODE_BLOCK], c)
        out[:, s:s + NODE_BLOCK] = conj_rows @ block.T * grid.dx
    return out


def _check_quadrature(dim: int, quad: Quadrature, strict: bool):
    short_r = quad.radius < math.sqrt(dim) + 4
    short_t = quad.n_theta < 4 * dim
    if not (short_r or short_t):
        return
    msg = (f"quadrature (R={quad.radius:g}, n_theta={quad.n_theta}) undersized for {dim} "
           f"number states; need R >= {math.sqrt(dim) + 4:.4g} and n_theta >= {4 * dim}")
    if strict:
        raise ConfigurationError(msg)
    warnings.warn(msg + "; residual will be dominated by truncation", stacklevel=3)


def completeness_operator(dim_probe: int, quad: Quadrature, grid: Grid,
                          constants: PhysicalConstants) -> np.ndarray:
    """``pi^-1 int d^2 alpha psi_alpha <psi_alpha, .>`` on span(chi_0..chi_{dim-1}).

    Overlaps ``<chi_n, psi_alpha>`` are measured on the grid, not taken from
    the closed-form coefficients.
    """
    _check_quadrature(dim_probe, quad, strict=False)
    chi = number_states(grid, dim_probe, constants)
    ov = _coherent_overlaps(chi, grid, quad, constants)
    return (ov * quad.weights[None, :]) @ ov.conj().T / np.pi


def completeness_residual(dim_probe: int, quad: Quadrature, grid: Grid,
                          constants: PhysicalConstants) -> float:
    """Max entrywise deviation of :func:`completeness_operator` from the identity."""
    op = completeness_operator(dim_probe, quad, grid, constants)
    return float(np.abs(op - np.eye(dim_probe)).max())


def reconstruct_number_state(n: int, quad: Quadrature, grid: Grid,
                             constants: PhysicalConstants) -> WaveFunction:
    """chi_n as a superposition of Gaussians.

    ``chi_n = pi^-1 int d^2 alpha conj(alpha)^n / sqrt(n!) exp(-|alpha|^2/2) psi_alpha``
    """
    if not 0 <= n <= 12:
        raise ConfigurationError(f"reconstruction supports 0 <= n <= 12, got {n}")
    _check_constants(grid, constants)
    _check_quadrature(n + 1, quad, strict=True)
    a = quad.alphas
    # conj(<chi_n, psi_alpha>) from the closed-form coefficients
    coeff = np.conj(a) ** n / math.sqrt(math.factorial(n)) * np.exp(-np.abs(a) ** 2 / 2)
    w = quad.weights * coeff / np.pi
    out = np.zeros(grid.n_points, dtype=np.complex128)
    for s in range(0, a.size, NODE_BLOCK):
        block = coherent_samples(grid.x, a[s:s + NODE_BLOCK], constants)
        out += w[s:s + NODE_BLOCK] @ block
    return WaveFunction(grid, out)


def _poly_coeffs(poly_coeffs) -> np.ndarray:
    coeffs = np.asarray(list(poly_coeffs), dtype=np.complex128)
    if coeffs.size == 0:
        raise ConfigurationError("polynomial needs at least one coefficient")
    if coeffs.size - 1 > MAX_POLY_DEGREE:
        raise ConfigurationError(
            f"polynomial degree {coeffs.size - 1} exceeds the supported {MAX_POLY_DEGREE}"
        )
    return coeffs


def expectation_of_A_function(state: WaveFunction, poly_coeffs, quad: Quadrature,
                              constants: PhysicalConstants) -> tuple[complex, complex]:
    """``<state, F(A) state>`` for ``F(z) = sum_k poly_coeffs[k] z^k``, two ways.

    Returns ``(phase_space, direct)``: the Husimi-weighted integral
    ``pi^-1 int d^2 alpha F(alpha) |<psi_alpha, state>|^2`` and the matrix
    element from repeated application of A on the grid.
    """
    coeffs = _poly_coeffs(poly_coeffs)
    _require_normalized(state)
    _check_constants(state.grid, constants)
    ov = _coherent_overlaps(state.samples[None, :], state.grid, quad, constants)[0]
    f_alpha = np.polynomial.polynomial.polyval(quad.alphas, coeffs)
    phase_space = quad.integrate(f_alpha * np.abs(ov) ** 2) / np.pi

    # Horner: F(A) s = c0 s + A (c1 s + A (c2 s + ...))
    acc = coeffs[-1] * state
    for ck in coeffs[-2::-1]:
        acc = apply_sequence(acc, ["A"], constants) + ck * state
    direct = inner_product(state, acc)
    return phase_space, direct


def coherent_overlap_on_grid(alpha: complex, state: WaveFunction, constants: PhysicalConstants) -> complex:
    """``<psi_alpha, state>`` measured on the grid."""
    return inner_product(WaveFunction(state.grid, coherent_samples(state.grid.x, alpha, constants)), state)


def number_coefficients(state: WaveFunction, dim: int, constants: PhysicalConstants) -> np.ndarray:
    """``<chi_n, state>`` for ``n < dim`` measured on the grid."""
    chi = number_states(state.grid, dim, constants)
    return chi @ state.samples * state.grid.dx

