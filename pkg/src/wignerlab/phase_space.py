"""Periodic phase-space grids, spectral helpers, quadrature, norms and field I/O.

A field on a ``PhaseGrid`` of dimension ``d`` is stored as a real array of
shape ``(nx,)*d + (nk,)*d``: the first ``d`` axes are positions, the last
``d`` axes are momenta (fastest varying in row-major order).
"""

from __future__ import annotations

import itertools
import os
import struct
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.fft as sfft

MAGIC = b"WVF1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIQQdddd")

# Worker count for scipy.fft; pocketfft splits work over independent 1-D
# transforms so results do not depend on this value.
FFT_WORKERS = int(os.environ.get("WIGNERLAB_FFT_WORKERS", "1"))


class FieldFormatError(ValueError):
    """Raised when a binary field file is malformed."""


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def angular_freqs(n: int, h: float, *, zero_nyquist: bool = False) -> np.ndarray:
    """Angular DFT frequencies ``2*pi*fftfreq(n, h)`` in numpy ordering."""
    w = 2.0 * np.pi * np.fft.fftfreq(n, h)
    if zero_nyquist and n % 2 == 0:
        w[n // 2] = 0.0
    return w


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform periodic tensor grid on ``[-lx, lx)^d x [-lk, lk)^d``."""

    d: int
    nx: int
    nk: int
    lx: float
    lk: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        for name in ("nx", "nk"):
            n = getattr(self, name)
            if not _is_pow2(int(n)) or n < 8:
                raise ValueError(f"{name} must be a power of two >= 8, got {n}")
        if not (self.lx > 0 and self.lk > 0):
            raise ValueError("domain half-widths must be positive")

    @property
    def hx(self) -> float:
        return 2.0 * self.lx / self.nx

    @property
    def hk(self) -> float:
        return 2.0 * self.lk / self.nk

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx,) * self.d + (self.nk,) * self.d

    @property
    def x_axes(self) -> tuple[int, ...]:
        return tuple(range(self.d))

    @property
    def k_axes(self) -> tuple[int, ...]:
        return tuple(range(self.d, 2 * self.d))

    @property
    def cell(self) -> float:
        """Phase-space quadrature weight ``hx^d * hk^d``."""
        return self.hx ** self.d * self.hk ** self.d

    @cached_property
    def x(self) -> np.ndarray:
        return -self.lx + self.hx * np.arange(self.nx)

    @cached_property
    def k(self) -> np.ndarray:
        return -self.lk + self.hk * np.arange(self.nk)

    @cached_property
    def xi(self) -> np.ndarray:
        """Angular frequencies dual to x (period ``2 lx``)."""
        return angular_freqs(self.nx, self.hx)

    @cached_property
    def y(self) -> np.ndarray:
        """Angular frequencies dual to k (period ``2 lk``)."""
        return angular_freqs(self.nk, self.hk)

    def axis(self, i: int) -> np.ndarray:
        """Coordinate values along phase-space axis ``i``, broadcastable."""
        vals = self.x if i < self.d else self.k
        return _along(vals, i, 2 * self.d)

    def freq(self, i: int, *, zero_nyquist: bool = False) -> np.ndarray:
        """Angular frequencies along phase-space axis ``i``, broadcastable."""
        n, h = (self.nx, self.hx) if i < self.d else (self.nk, self.hk)
        return _along(angular_freqs(n, h, zero_nyquist=zero_nyquist), i, 2 * self.d)

    def x_mesh(self) -> list[np.ndarray]:
        return [self.axis(i) for i in self.x_axes]

    def k_mesh(self) -> list[np.ndarray]:
        return [self.axis(i) for i in self.k_axes]

    def k_abs(self) -> np.ndarray:
        return np.sqrt(sum(k ** 2 for k in self.k_mesh()))

    def x_abs(self) -> np.ndarray:
        return np.sqrt(sum(x ** 2 for x in self.x_mesh()))

    # position-only helpers, arrays of shape (nx,)*d
    def space_axis(self, i: int) -> np.ndarray:
        return _along(self.x, i, self.d)

    def space_freq(self, i: int, *, zero_nyquist: bool = False) -> np.ndarray:
        return _along(angular_freqs(self.nx, self.hx, zero_nyquist=zero_nyquist), i, self.d)


def _along(vals: np.ndarray, i: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[i] = vals.size
    return vals.reshape(shape)


def make_grid(d: int, nx: int, nk: int, lx: float, lk: float) -> PhaseGrid:
    return PhaseGrid(int(d), int(nx), int(nk), float(lx), float(lk))


@dataclass(frozen=True)
class PhaseField:
    """Real scalar field on a phase grid.

    ``epsilon == 0`` tags a classical field.
    """

    grid: PhaseGrid
    values: np.ndarray = field(repr=False)
    epsilon: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray, **changes) -> "PhaseField":
        return replace(self, values=values, **changes)

    def __add__(self, other: "PhaseField") -> "PhaseField":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "PhaseField") -> "PhaseField":
        return self.with_values(self.values - other.values)

    def __mul__(self, a: float) -> "PhaseField":
        return self.with_values(a * self.values)

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def zeros(grid: PhaseGrid, epsilon: float = 0.0) -> PhaseField:
    return PhaseField(grid, np.zeros(grid.shape), epsilon)


def from_function(grid: PhaseGrid, func, epsilon: float = 0.0) -> PhaseField:
    """Sample ``func(x_1..x_d, k_1..k_d)`` on the grid."""
    vals = func(*grid.x_mesh(), *grid.k_mesh())
    return PhaseField(grid, np.broadcast_to(vals, grid.shape).copy(), epsilon)


# --- spectral transforms -------------------------------------------------

def fft(a: np.ndarray, axes) -> np.ndarray:
    return sfft.fftn(a, axes=axes, workers=FFT_WORKERS)


def ifft(a: np.ndarray, axes) -> np.ndarray:
    return sfft.ifftn(a, axes=axes, workers=FFT_WORKERS)


def rfft(a: np.ndarray, axes) -> np.ndarray:
    return sfft.rfftn(a, axes=axes, workers=FFT_WORKERS)


def irfft(c: np.ndarray, axes, shape) -> np.ndarray:
    return sfft.irfftn(c, s=[shape[a] for a in axes], axes=axes, workers=FFT_WORKERS)


def rfreqs(grid: PhaseGrid, axes) -> list[np.ndarray]:
    """Angular frequencies for an ``rfftn`` over ``axes`` of a phase-space array.

    The last axis of ``axes`` is the halved one.  Nyquist entries are set to
    zero so that any multiplier built from these frequencies keeps real
    fields real.
    """
    axes = tuple(axes)
    ndim = 2 * grid.d
    out = []
    for a in axes:
        n, h = (grid.nx, grid.hx) if a < grid.d else (grid.nk, grid.hk)
        if a == axes[-1]:
            w = 2.0 * np.pi * np.fft.rfftfreq(n, h)
            w[-1] = 0.0
        else:
            w = angular_freqs(n, h, zero_nyquist=True)
        out.append(_along(w, a, ndim))
    return out


def apply_rmultiplier(values: np.ndarray, multiplier: np.ndarray, axes) -> np.ndarray:
    """Apply a Hermitian-symmetric multiplier through a real FFT over ``axes``."""
    return irfft(rfft(values, axes) * multiplier, axes, values.shape)


def apply_multiplier(values: np.ndarray, multiplier: np.ndarray, axes) -> np.ndarray:
    """Apply a Fourier multiplier over ``axes`` and return the real part."""
    return ifft(fft(values, axes) * multiplier, axes).real


def apply_multiplier_residue(values: np.ndarray, multiplier: np.ndarray, axes):
    """Like :func:`apply_multiplier` but also return ``max |imag|``."""
    out = ifft(fft(values, axes) * multiplier, axes)
    return out.real, float(np.max(np.abs(out.imag)))


def spectral_derivative(f: PhaseField, orders) -> PhaseField:
    """Mixed spectral derivative; ``orders[i]`` is the order along axis ``i``."""
    g = f.grid
    mult = 1.0
    for i, a in enumerate(orders):
        if a:
            mult = mult * (1j * g.freq(i, zero_nyquist=a % 2 == 1)) ** a
    if np.isscalar(mult):
        return f
    return f.with_values(apply_multiplier(f.values, mult, tuple(range(2 * g.d))))


# --- quadrature and norms ------------------------------------------------

def integrate(f: PhaseField) -> float:
    """Rectangle-rule integral over phase space."""
    return float(np.sum(f.values) * f.grid.cell)


def l2_norm(f: PhaseField) -> float:
    return float(np.sqrt(np.sum(f.values ** 2) * f.grid.cell))


def l1_norm(f: PhaseField) -> float:
    return float(np.sum(np.abs(f.values)) * f.grid.cell)


def parseval_l2_norm(f: PhaseField) -> float:
    """L2 norm computed from the DFT coefficients."""
    c = fft(f.values, tuple(range(2 * f.grid.d)))
    return float(np.sqrt(np.sum(np.abs(c) ** 2) * f.grid.cell / f.values.size))


def sobolev_norm(f: PhaseField, m: int) -> float:
    """Sum of L2 norms of all spectral derivatives of total order <= m.

    Derivatives are taken over all ``2d`` phase-space axes.
    """
    if m not in (0, 1, 2, 3):
        raise ValueError(f"sobolev order must be in 0..3, got {m}")
    g = f.grid
    n_axes = 2 * g.d
    coeffs2 = np.abs(fft(f.values, tuple(range(n_axes)))) ** 2
    scale = g.cell / f.values.size
    w2 = [g.freq(i) ** 2 for i in range(n_axes)]
    total = 0.0
    for orders in itertools.product(range(m + 1), repeat=n_axes):
        if sum(orders) > m:
            continue
        weight = 1.0
        for i, a in enumerate(orders):
            if a:
                weight = weight * w2[i] ** a
        total += np.sqrt(np.sum(weight * coeffs2) * scale)
    return float(total)


def boundary_mass(f: PhaseField, shell: float = 0.1) -> float:
    """Absolute mass in the outer ``shell`` fraction of the box along any axis."""
    g = f.grid
    mask = np.zeros(g.shape, dtype=bool)
    for i in range(2 * g.d):
        half = g.lx if i < g.d else g.lk
        mask |= np.broadcast_to(np.abs(g.axis(i)) >= (1.0 - shell) * half, g.shape)
    return float(np.sum(np.abs(f.values[mask])) * g.cell)


# --- binary I/O -----------------------------------------------------------

def dump(f: PhaseField, path) -> None:
    g = f.grid
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, g.d, g.nx, g.nk,
                          g.lx, g.lk, float(f.epsilon), float(f.time))
    payload = np.ascontiguousarray(f.values, dtype="<f8").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load(path) -> PhaseField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FieldFormatError("file shorter than header")
    magic, version, d, nx, nk, lx, lk, eps, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FieldFormatError(f"unknown format version {version}")
    grid = make_grid(d, nx, nk, lx, lk)
    expected = 8 * int(np.prod(grid.shape))
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise FieldFormatError(f"payload has {len(payload)} bytes, expected {expected}")
    vals = np.frombuffer(payload, dtype="<f8").reshape(grid.shape).astype(np.float64)
    return PhaseField(grid, vals, eps, t)
