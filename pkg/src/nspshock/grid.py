"""Discretization of the slab Omega_L = [-L, L] x T^2 and field operations.

The x1 direction is a truncated line with a cell-centered uniform grid
(x1_i = -L + (i + 1/2) dx1); the two transverse directions are unit tori
sampled at N2 and N3 equispaced points.  Scalar fields are plain float64
arrays of shape (N1,) for line fields and (N1, N2, N3) for slab fields,
C-ordered so the flat index is (i1*N2 + i2)*N3 + i3.

Transverse derivatives are exact spectral differentiation of integer
harmonics (dense differentiation matrices applied with matmul; N2 and N3
are small).  x1 derivatives are second-order central differences with
one-sided second-order closures at the two end points.

All reductions (norms, means) call numpy's pairwise summation on a fixed
memory layout, so they are deterministic and independent of BLAS thread
count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidParam

__all__ = ["GridSpec", "NormReport"]


def _fourier_diff_matrix(n: int) -> np.ndarray:
    """First-derivative matrix for n equispaced points on the unit torus.

    Exact for harmonics |k| < n/2; the Nyquist mode (odd derivative of a
    real signal) is mapped to zero, the usual convention.
    """
    if n == 1:
        return np.zeros((1, 1))
    k = np.fft.fftfreq(n) * n
    sym = 2j * np.pi * k
    if n % 2 == 0:
        sym[n // 2] = 0.0
    return np.real(np.fft.ifft(sym[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))


def _fourier_eigenbasis(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal real eigenbasis of -d^2/dx^2 on the n-point unit torus.

    Returns (Q, lam) with -d2(f) = Q @ diag(lam) @ Q.T @ f and
    lam[m] = (2 pi k_m)^2.  Columns are the constant mode, then
    cos/sin pairs, then (for even n) the Nyquist mode.
    """
    x = np.arange(n) / n
    cols = [np.full(n, 1.0 / np.sqrt(n))]
    lam = [0.0]
    for k in range(1, (n - 1) // 2 + 1):
        cols.append(np.sqrt(2.0 / n) * np.cos(2 * np.pi * k * x))
        cols.append(np.sqrt(2.0 / n) * np.sin(2 * np.pi * k * x))
        lam += [(2 * np.pi * k) ** 2] * 2
    if n % 2 == 0 and n > 1:
        cols.append(np.where(np.arange(n) % 2 == 0, 1.0, -1.0) / np.sqrt(n))
        lam.append((np.pi * n) ** 2)
    return np.column_stack(cols), np.asarray(lam)


@dataclass(frozen=True)
class NormReport:
    """Discrete L2, Linf and H1 norms of a field."""

    l2: float
    linf: float
    h1: float


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the computational slab [-L, L] x T^2.

    N2 = N3 = 1 degenerates to a one-dimensional solver on the line.
    """

    L: float
    N1: int
    N2: int = 1
    N3: int = 1

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidParam(f"L must be positive, got {self.L}")
        if self.N1 < 8:
            raise InvalidParam(f"N1 must be >= 8, got {self.N1}")
        for name, n in (("N2", self.N2), ("N3", self.N3)):
            if n < 1:
                raise InvalidParam(f"{name} must be >= 1, got {n}")
            if n > 1 and n % 2 != 0:
                raise InvalidParam(f"{name} must be even when > 1, got {n}")

    # -- geometry -----------------------------------------------------------

    @property
    def dx1(self) -> float:
        return 2.0 * self.L / self.N1

    @cached_property
    def x1(self) -> np.ndarray:
        return -self.L + (np.arange(self.N1) + 0.5) * self.dx1

    @cached_property
    def x2(self) -> np.ndarray:
        return np.arange(self.N2) / self.N2

    @cached_property
    def x3(self) -> np.ndarray:
        return np.arange(self.N3) / self.N3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.N1, self.N2, self.N3)

    @property
    def cell_measure(self) -> float:
        """Quadrature weight of one cell: dx1 * (1/N2) * (1/N3)."""
        return self.dx1 / (self.N2 * self.N3)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def broadcast_line(self, f1: np.ndarray) -> np.ndarray:
        """Extend a line field to the slab, constant in x'."""
        return np.broadcast_to(np.asarray(f1)[:, None, None], self.shape).copy()

    # -- spectral transverse machinery --------------------------------------

    @cached_property
    def _d2mat(self) -> np.ndarray:
        return _fourier_diff_matrix(self.N2)

    @cached_property
    def _d3mat(self) -> np.ndarray:
        return _fourier_diff_matrix(self.N3)

    @cached_property
    def _eig2(self) -> tuple[np.ndarray, np.ndarray]:
        return _fourier_eigenbasis(self.N2)

    @cached_property
    def _eig3(self) -> tuple[np.ndarray, np.ndarray]:
        return _fourier_eigenbasis(self.N3)

    @cached_property
    def _lap2mat(self) -> np.ndarray:
        q, lam = self._eig2
        return -(q * lam) @ q.T

    @cached_property
    def _lap3mat(self) -> np.ndarray:
        q, lam = self._eig3
        return -(q * lam) @ q.T

    def lap_transverse(self, f: np.ndarray) -> np.ndarray:
        """Spectral transverse Laplacian (second-derivative symbol, with
        the Nyquist mode included, unlike div(grad)).

        Both axis applications run as contiguous last-axis matmuls (the
        x2 axis is swapped to the back first); anything else degenerates
        into a batch of tiny BLAS calls.
        """
        out = np.matmul(f, self._lap3mat.T)
        if self.N2 > 1:
            fs = np.ascontiguousarray(np.swapaxes(f, -2, -1))
            out += np.swapaxes(np.matmul(fs, self._lap2mat.T), -2, -1)
        return out

    # -- mode decomposition --------------------------------------------------

    def transverse_average(self, f: np.ndarray) -> np.ndarray:
        """Zero mode: mean over the transverse torus, one value per x1.

        On a uniform periodic grid the trapezoidal rule reduces to the
        plain mean and is exact for band-limited integrands.
        """
        f = np.asarray(f)
        if f.ndim == 1:
            return f.copy()
        return f.mean(axis=(1, 2))

    def nonzero_part(self, f: np.ndarray) -> np.ndarray:
        """Non-zero mode: f minus its broadcast transverse average."""
        f = np.asarray(f)
        if f.ndim == 1:
            return np.zeros_like(f)
        return f - f.mean(axis=(1, 2))[:, None, None]

    # -- differential operators ----------------------------------------------

    def d_x1(self, f: np.ndarray) -> np.ndarray:
        """First x1 derivative: central interior, one-sided 2nd order ends."""
        f = np.asarray(f)
        out = np.empty_like(f)
        inv2 = 0.5 / self.dx1
        out[1:-1] = (f[2:] - f[:-2]) * inv2
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2
        out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) * inv2
        return out

    def d_x2(self, f: np.ndarray) -> np.ndarray:
        """Spectral x2 derivative (zero for N2 = 1)."""
        if self.N2 == 1:
            return np.zeros_like(f)
        return np.matmul(self._d2mat, f)

    def d_x3(self, f: np.ndarray) -> np.ndarray:
        """Spectral x3 derivative (zero for N3 = 1)."""
        if self.N3 == 1:
            return np.zeros_like(f)
        return np.matmul(f, self._d3mat.T)

    def grad(self, f: np.ndarray) -> np.ndarray:
        """Gradient of a slab field, shape (3, N1, N2, N3)."""
        f = np.asarray(f)
        return np.stack([self.d_x1(f), self.d_x2(f), self.d_x3(f)])

    def div(self, v: np.ndarray) -> np.ndarray:
        """Divergence of a (3, N1, N2, N3) vector field."""
        return self.d_x1(v[0]) + self.d_x2(v[1]) + self.d_x3(v[2])

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Laplacian, implemented as div(grad(f)) so the identity is exact."""
        return self.div(self.grad(f))

    # -- norms ----------------------------------------------------------------

    def integral(self, f: np.ndarray) -> float:
        """Quadrature of f over the slab (midpoint in x1, exact in x')."""
        f = np.asarray(f)
        if f.ndim == 1:
            return float(f.sum() * self.dx1)
        return float(f.sum() * self.cell_measure)

    def l2(self, f: np.ndarray) -> float:
        f = np.asarray(f)
        w = self.dx1 if f.ndim == 1 else self.cell_measure
        return float(np.sqrt(np.sum(f * f) * w))

    def linf(self, f: np.ndarray) -> float:
        return float(np.max(np.abs(f)))

    def norms(self, f: np.ndarray) -> NormReport:
        """L2 / Linf / H1 report; H1 adds the squared gradient norm."""
        f = np.asarray(f)
        l2 = self.l2(f)
        grad_sq = self.l2(self.d_x1(f)) ** 2
        if f.ndim == 3:
            grad_sq += self.l2(self.d_x2(f)) ** 2 + self.l2(self.d_x3(f)) ** 2
        return NormReport(l2=l2, linf=self.linf(f), h1=float(np.sqrt(l2**2 + grad_sq)))
