"""Pair interaction potentials and the self-consistent Hartree field."""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi, sqrt, exp

import numpy as np
from scipy import integrate as _quad

from .phase_space import PhaseGrid, _along, fft, ifft


@dataclass(frozen=True)
class Potential:
    """Spherically symmetric Gaussian interaction ``A exp(-|x|^2 / (2 sigma^2))``.

    Fourier convention: ``phi_hat(S) = int exp(-i S x) phi(x) dx``.
    """

    amplitude: float
    sigma: float
    d: int = 1
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError(f"unsupported potential kind {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def __call__(self, r2):
        """phi evaluated at squared radius ``r2``."""
        return self.amplitude * np.exp(-np.asarray(r2) / (2.0 * self.sigma ** 2))

    def radial_derivative(self, r):
        r = np.asarray(r)
        return -self.amplitude * r / self.sigma ** 2 * np.exp(-r ** 2 / (2.0 * self.sigma ** 2))

    def fourier(self, s2):
        """phi_hat at squared frequency ``s2``."""
        s = self.sigma
        return (self.amplitude * (2.0 * pi * s * s) ** (self.d / 2)
                * np.exp(-0.5 * s * s * np.asarray(s2)))

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    @property
    def grad_sup(self) -> float:
        """``sup |grad phi|``, attained at ``|x| = sigma``."""
        return abs(self.amplitude) / self.sigma * exp(-0.5)

    def moment(self, n: int) -> float:
        """Closed form of ``int |phi_hat(S)| |S|^n dS``."""
        _check_moment_order(n)
        if self.is_zero:
            return 0.0
        s, d = self.sigma, self.d
        a = s * s / 2.0
        surface = 2.0 * pi ** (d / 2) / gamma(d / 2)
        m = n + d - 1
        radial = gamma((m + 1) / 2) / (2.0 * a ** ((m + 1) / 2))
        return abs(self.amplitude) * (2.0 * pi * s * s) ** (d / 2) * surface * radial

    @property
    def moments(self) -> tuple[float, ...]:
        return tuple(self.moment(n) for n in range(5))

    def h1_norm(self) -> float:
        """``||phi||_{L2} + ||grad phi||_{L2}`` from closed-form Gaussian integrals."""
        s, d, A = self.sigma, self.d, abs(self.amplitude)
        l2 = A * (pi * s * s) ** (d / 4)
        grad = l2 * sqrt(d / (2.0 * s * s))
        return l2 + grad


def _check_moment_order(n):
    if n not in range(5):
        raise ValueError(f"moment order must be in 0..4, got {n}")


def gaussian_potential(amplitude: float, sigma: float, d: int = 1) -> Potential:
    return Potential(float(amplitude), float(sigma), int(d))


def zero_potential(d: int = 1) -> Potential:
    return Potential(0.0, 1.0, d)


def moment_certificate(phi: Potential, n: int) -> float:
    """Numerically integrate ``int |phi_hat(S)| |S|^n dS`` in radial form."""
    _check_moment_order(n)
    if phi.is_zero:
        return 0.0
    d = phi.d
    surface = 2.0 * pi ** (d / 2) / gamma(d / 2)
    val, _ = _quad.quad(lambda r: abs(phi.fourier(r * r)) * r ** (n + d - 1),
                        0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return float(surface * val)


def fourier_on_grid(phi: Potential, grid: PhaseGrid) -> np.ndarray:
    """phi_hat on the discrete position-dual grid, Nyquist modes removed."""
    s2 = sum(grid.space_freq(i) ** 2 for i in range(grid.d))
    vals = phi.fourier(s2)
    keep = np.ones(grid.nx)
    keep[grid.nx // 2] = 0.0
    for i in range(grid.d):
        vals = vals * _along(keep, i, grid.d)
    return vals


def hartree_field(rho: np.ndarray, phi: Potential, grid: PhaseGrid):
    """Return ``(V, grad V)`` with ``V = phi * rho`` (periodized convolution).

    ``rho`` has shape ``(nx,)*d``; ``grad V`` has shape ``(d, nx, ...)``.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != (grid.nx,) * grid.d:
        raise ValueError(f"density shape {rho.shape} does not match grid")
    if phi.d != grid.d:
        raise ValueError("potential dimension does not match grid")
    axes = tuple(range(grid.d))
    vhat = fourier_on_grid(phi, grid) * fft(rho, axes)
    V = ifft(vhat, axes).real
    grad = np.stack([ifft(1j * grid.space_freq(i) * vhat, axes).real for i in range(grid.d)])
    return V, grad


def fourier_l1(values_hat: np.ndarray, grid: PhaseGrid) -> float:
    """Continuum-normalized ``||F||_{L1}`` for DFT coefficients of a spatial field.

    ``values_hat`` is ``fftn`` of samples; the continuum transform is
    ``hx^d * values_hat`` sampled at spacing ``2 pi / (2 lx)``.
    """
    dS = (pi / grid.lx) ** grid.d
    return float(np.sum(np.abs(values_hat)) * grid.hx ** grid.d * dS)
