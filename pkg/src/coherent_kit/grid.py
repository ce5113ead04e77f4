"""Discretized position space: grids, wavefunctions and spectral operators.

Position acts by multiplication, momentum acts in Fourier space. The
ladder operators are the usual dimensionless combinations

    A    = X / (lam*sqrt(2)) + i * lam / (hbar*sqrt(2)) * P
    Adag = X / (lam*sqrt(2)) - i * lam / (hbar*sqrt(2)) * P

so that [A, Adag] = 1 up to discretization error.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import BoundaryWarning, ConfigurationError, UsageError

EDGE_TOLERANCE = 1e-10
NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class PhysicalConstants:
    """Units of action, mass and length (hbar, m, lambda)."""

    hbar: float = 1.0
    mass: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "lam"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice ``x_j = x_min + j*dx``, ``j = 0..n_points-1``.

    The momentum lattice is stored in FFT order (as returned by
    ``numpy.fft.fftfreq``) and scaled by ``hbar``.
    """

    n_points: int
    x_min: float
    x_max: float
    hbar: float = 1.0

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ConfigurationError(f"n_points must be a power of two >= 8, got {n!r}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ConfigurationError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise ConfigurationError(
                f"degenerate interval: x_max ({self.x_max}) must exceed x_min ({self.x_min})"
            )
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise ConfigurationError(f"hbar must be finite and > 0, got {self.hbar!r}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dp(self) -> float:
        return 2 * np.pi * self.hbar / (self.n_points * self.dx)

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        k.flags.writeable = False
        return k

    @cached_property
    def momentum_lattice(self) -> np.ndarray:
        p = self.hbar * self.wavenumbers
        p.flags.writeable = False
        return p

    def metadata(self) -> dict:
        return {
            "n_points": int(self.n_points),
            "x_min": float(self.x_min),
            "x_max": float(self.x_max),
            "dx": float(self.dx),
            "hbar": float(self.hbar),
        }


def make_grid(n_points: int, x_min: float, x_max: float, hbar: float = 1.0) -> Grid:
    """Build a :class:`Grid`, raising ConfigurationError on bad parameters."""
    return Grid(n_points, float(x_min), float(x_max), float(hbar))


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex samples of a state on a grid. Samples are stored read-only."""

    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.samples, dtype=np.complex128, copy=True)
        if data.shape != (self.grid.n_points,):
            raise UsageError(
                f"expected {self.grid.n_points} samples, got array of shape {data.shape}"
            )
        data.flags.writeable = False
        object.__setattr__(self, "samples", data)

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.samples) ** 2)) * self.grid.dx)

    def normalized(self) -> WaveFunction:
        n = self.norm()
        if n == 0:
            raise UsageError("cannot normalize the zero vector")
        return WaveFunction(self.grid, self.samples / n)

    def __add__(self, other: WaveFunction) -> WaveFunction:
        _check_same_grid(self, other)
        return WaveFunction(self.grid, self.samples + other.samples)

    def __sub__(self, other: WaveFunction) -> WaveFunction:
        _check_same_grid(self, other)
        return WaveFunction(self.grid, self.samples - other.samples)

    def __mul__(self, scalar: complex) -> WaveFunction:
        return WaveFunction(self.grid, complex(scalar) * self.samples)

    __rmul__ = __mul__

    @property
    def edge_amplitude(self) -> float:
        """Largest modulus in the outer 2% of the domain on either side."""
        band = max(2, self.grid.n_points // 50)
        s = np.abs(self.samples)
        return float(max(s[:band].max(), s[-band:].max()))

    @property
    def contained(self) -> bool:
        return self.edge_amplitude < EDGE_TOLERANCE

    def momentum_samples(self) -> np.ndarray:
        """Momentum-space amplitudes on ``grid.momentum_lattice`` (FFT order).

        Normalized so that ``sum(|phi|**2) * grid.dp`` equals the position
        norm squared.
        """
        g = self.grid
        phase = np.exp(-1j * g.wavenumbers * g.x_min)
        return phase * np.fft.fft(self.samples) * g.dx / math.sqrt(2 * np.pi * g.hbar)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "re", "im"])
            for x, z in zip(self.grid.x, self.samples):
                writer.writerow([f"{x:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])
        return path


def _check_same_grid(f: WaveFunction, g: WaveFunction):
    if f.grid != g.grid:
        raise UsageError("wavefunctions live on different grids")


def inner_product(f: WaveFunction, g: WaveFunction) -> complex:
    """Discretized ``<f, g> = sum(conj(f_j) * g_j) * dx``."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.samples, g.samples) * f.grid.dx)


class Operator(str, enum.Enum):
    X = "X"
    P = "P"
    A = "A"
    ADAG = "Adag"
    H = "H"


def _check_constants(grid: Grid, constants: PhysicalConstants):
    if not math.isclose(grid.hbar, constants.hbar, rel_tol=1e-15):
        raise UsageError(
            f"grid was built with hbar={grid.hbar} but constants have hbar={constants.hbar}"
        )


def _spectral(samples: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    return np.fft.ifft(multiplier * np.fft.fft(samples))


def _apply(samples: np.ndarray, which: Operator, grid: Grid, c: PhysicalConstants) -> np.ndarray:
    if which is Operator.X:
        return grid.x * samples
    if which is Operator.P:
        return _spectral(samples, grid.momentum_lattice)
    if which is Operator.H:
        return _spectral(samples, grid.momentum_lattice**2 / (2 * c.mass))
    xs = grid.x * samples
    ps = _spectral(samples, grid.momentum_lattice)
    a = 1 / (c.lam * math.sqrt(2))
    b = c.lam / (c.hbar * math.sqrt(2))
    if which is Operator.A:
        return a * xs + 1j * b * ps
    return a * xs - 1j * b * ps


def apply_operator(f: WaveFunction, which, constants: PhysicalConstants) -> WaveFunction:
    """Apply one of X, P, A, Adag, H to ``f`` and return a new wavefunction.

    Emits :class:`BoundaryWarning` when ``f`` is not contained in the grid;
    the result is still returned.
    """
    which = Operator(which)
    _check_constants(f.grid, constants)
    if not f.contained:
        warnings.warn(
            f"edge amplitude {f.edge_amplitude:.3g} exceeds {EDGE_TOLERANCE:g}; "
            "spectral identities may not hold",
            BoundaryWarning,
            stacklevel=2,
        )
    return WaveFunction(f.grid, _apply(f.samples, which, f.grid, constants))


def apply_sequence(f: WaveFunction, ops, constants: PhysicalConstants) -> WaveFunction:
    """Apply ``ops`` right to left, so ``("A", "Adag")`` computes ``A Adag f``."""
    _check_constants(f.grid, constants)
    s = f.samples
    for op in reversed(list(ops)):
        s = _apply(s, Operator(op), f.grid, constants)
    return WaveFunction(f.grid, s)


@dataclass(frozen=True)
class MomentReport:
    mean_x: float
    mean_p: float
    mean_x2: float
    mean_p2: float
    delta_x: float
    delta_p: float
    sym_covariance: float

    @property
    def uncertainty_product(self) -> float:
        return self.delta_x * self.delta_p

    def to_dict(self) -> dict:
        return {
            "mean_x": self.mean_x,
            "mean_p": self.mean_p,
            "mean_x2": self.mean_x2,
            "mean_p2": self.mean_p2,
            "delta_x": self.delta_x,
            "delta_p": self.delta_p,
            "sym_covariance": self.sym_covariance,
        }


def _require_normalized(f: WaveFunction):
    n = f.norm()
    if abs(n - 1) > NORM_TOLERANCE:
        raise UsageError(f"state must be normalized (norm = {n:.12g})")


def moments(f: WaveFunction, constants: PhysicalConstants) -> MomentReport:
    """First and second moments of X and P for a normalized state."""
    _require_normalized(f)
    _check_constants(f.grid, constants)
    xf = apply_operator(f, Operator.X, constants)
    pf = apply_operator(f, Operator.P, constants)
    mean_x = inner_product(f, xf).real
    mean_p = inner_product(f, pf).real
    mean_x2 = inner_product(xf, xf).real
    mean_p2 = inner_product(pf, pf).real
    # <f, (XP + PX) f> = 2 Re <Xf, Pf> for Hermitian X, P
    sym = 2 * inner_product(xf, pf).real - 2 * mean_x * mean_p
    return MomentReport(
        mean_x=mean_x,
        mean_p=mean_p,
        mean_x2=mean_x2,
        mean_p2=mean_p2,
        delta_x=math.sqrt(max(mean_x2 - mean_x**2, 0.0)),
        delta_p=math.sqrt(max(mean_p2 - mean_p**2, 0.0)),
        sym_covariance=sym,
    )


def best_eigen_residual(f: WaveFunction, which, constants: PhysicalConstants) -> tuple[float, complex]:
    """``min_beta ||(O - beta) f||`` for a normalized ``f`` and the minimizing beta.

    The minimizer of the 2-norm is ``beta = <f, O f>``.
    """
    of = apply_operator(f, which, constants)
    beta = inner_product(f, of)
    return (of - beta * f).norm(), beta


def adjoint_eigen_residual(f: WaveFunction, constants: PhysicalConstants) -> float:
    """Distance of ``f`` from being an eigenvector of Adag.

    Equals ``sqrt(<Adag A> + 1 - |<A>|^2)`` in the continuum, which is never
    below 1: Adag has no normalizable eigenvectors.
    """
    _require_normalized(f)
    return best_eigen_residual(f, Operator.ADAG, constants)[0]
