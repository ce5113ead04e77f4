"""Truncated number-basis representation of the ladder algebra.

Truncation to ``dim`` levels breaks ``[A, Adag] = 1`` in the last row and
column, so every identity check here is evaluated on the lower half block
(indices ``< dim // 2``), where the truncation error is negligible for
displacements sized by :func:`min_dim`.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import ConfigurationError


def min_dim(alpha: complex) -> int:
    """Smallest truncation accepted for a displacement of size ``|alpha|``."""
    return math.ceil(4 * abs(alpha) ** 2 + 16)


def ladder_matrices(dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(A, Adag, N)`` as dense ``dim x dim`` complex matrices.

    ``A`` carries ``sqrt(n)`` at row ``n-1``, column ``n``; ``N = Adag A``
    has diagonal ``0, 1, ..., dim-1``.
    """
    if dim < 2:
        raise ConfigurationError(f"dim must be >= 2, got {dim}")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(np.complex128)
    adag = a.conj().T.copy()
    # diagonal set directly so the spectrum is exact integers
    n = np.diag(np.arange(dim, dtype=float)).astype(np.complex128)
    for m in (a, adag, n):
        m.flags.writeable = False
    return a, adag, n


def _lower(m: np.ndarray) -> np.ndarray:
    h = m.shape[0] // 2
    return m[:h, :h]


def block_norm(m: np.ndarray) -> float:
    """Spectral norm of the lower half block."""
    return float(np.linalg.norm(_lower(m), 2))


def drift_matrix(alpha: complex, dim: int) -> np.ndarray:
    """``D(alpha) = exp(alpha Adag - conj(alpha) A)`` in a ``dim``-level truncation.

    The generator is anti-Hermitian, so it is exponentiated through the
    eigendecomposition of the Hermitian matrix ``i (alpha Adag - conj(alpha) A)``.
    """
    alpha = complex(alpha)
    need = min_dim(alpha)
    if dim < need:
        raise ConfigurationError(
            f"dim={dim} too small for |alpha|={abs(alpha):.4g}; need dim >= {need}"
        )
    a, adag, _ = ladder_matrices(dim)
    herm = 1j * (alpha * adag - alpha.conjugate() * a)
    herm = 0.5 * (herm + herm.conj().T)
    w, v = np.linalg.eigh(herm)
    return (v * np.exp(-1j * w)) @ v.conj().T


def group_law_check(alpha: complex, beta: complex, dim: int) -> float:
    """Residual of ``D(a) D(b) = exp((a b* - a* b)/2) D(a + b)`` on the lower block."""
    alpha, beta = complex(alpha), complex(beta)
    phase = np.exp((alpha * beta.conjugate() - alpha.conjugate() * beta) / 2)
    lhs = drift_matrix(alpha, dim) @ drift_matrix(beta, dim)
    return block_norm(lhs - phase * drift_matrix(alpha + beta, dim))


def commutator_drift_check(alpha: complex, dim: int) -> float:
    """Residual of ``[A, D(alpha)] = alpha D(alpha)`` on the lower block."""
    a, _, _ = ladder_matrices(dim)
    d = drift_matrix(alpha, dim)
    return block_norm(a @ d - d @ a - complex(alpha) * d)


def hbc_check(r_coeffs, s_coeffs, dim: int) -> float:
    """Residual of ``exp(R) exp(S) = exp(R + S) exp([R, S]/2)`` on the lower block.

    ``R = r1 A + r2 Adag`` and ``S = s1 A + s2 Adag``, so ``[R, S]`` is the
    scalar ``r1 s2 - r2 s1``. R and S need not be anti-Hermitian; a general
    Pade matrix exponential is used.
    """
    r1, r2 = (complex(c) for c in r_coeffs)
    s1, s2 = (complex(c) for c in s_coeffs)
    a, adag, _ = ladder_matrices(dim)
    r = r1 * a + r2 * adag
    s = s1 * a + s2 * adag
    comm = r1 * s2 - r2 * s1
    lhs = scipy.linalg.expm(r) @ scipy.linalg.expm(s)
    rhs = scipy.linalg.expm(r + s) * np.exp(comm / 2)
    return block_norm(lhs - rhs)


def drift_inverse_check(alpha: complex, dim: int) -> float:
    """Residual of ``D(alpha) D(-alpha) = I`` on the lower block."""
    d = drift_matrix(alpha, dim)
    return block_norm(d @ drift_matrix(-complex(alpha), dim) - np.eye(dim))


def coherent_coefficients(alpha: complex, dim: int) -> np.ndarray:
    """``alpha**n / sqrt(n!) * exp(-|alpha|^2/2)`` for ``n < dim``.

    Built by the ratio ``c_n = c_{n-1} * alpha / sqrt(n)`` to avoid factorial
    overflow.
    """
    alpha = complex(alpha)
    c = np.empty(dim, dtype=np.complex128)
    c[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def write_fock_csv(coefficients, path) -> Path:
    """Write number-basis coefficients as CSV with header ``n,re,im``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "re", "im"])
        for n, z in enumerate(np.asarray(coefficients, dtype=np.complex128)):
            writer.writerow([n, f"{z.real:.17g}", f"{z.imag:.17g}"])
    return path
