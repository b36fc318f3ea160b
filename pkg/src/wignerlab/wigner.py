"""Nonlinear Wigner-Hartree evolution by Strang splitting.

Momentum kicks are applied in the dual variable ``y`` of ``k``
(``F(x, y) = int exp(-i y k) f(x, k) dk``), where the Hartree term of the
Wigner equation is the multiplication

    dF/dt = (i / eps) [V(x + eps y / 2) - V(x - eps y / 2)] F.

The shifted potential values are evaluated exactly from the Fourier series
of ``V``, so no interpolation error enters the small-``eps`` behaviour.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import phase_space as ps
from .phase_space import PhaseField, PhaseGrid
from .potential import Potential, hartree_field

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """A solver produced non-finite values."""


def density(f: PhaseField) -> np.ndarray:
    """k-marginal ``int f(x, k) dk`` on the position grid."""
    g = f.grid
    return np.sum(f.values, axis=g.k_axes) * g.hk ** g.d


def potential_of(f: PhaseField, phi: Potential):
    """Self-consistent ``(V, grad V)`` generated by the density of ``f``."""
    return hartree_field(density(f), phi, f.grid)


def _expand(space: np.ndarray, d: int) -> np.ndarray:
    return space.reshape(space.shape + (1,) * d)


def _shift_multiplier(V: np.ndarray, grid: PhaseGrid, eps: float, kind: str) -> np.ndarray:
    """Dual-space multiplier on the rfft ``y`` grid built from shifted potentials.

    kind ``"difference"``: ``V(x + eps y/2) - V(x - eps y/2)``;
    kind ``"remainder"``: ``(1/eps)[V(x + eps y/2) - V(x - eps y/2)] - y . grad V(x)``.
    """
    xi = ps.rfreqs(grid, grid.x_axes)
    yy = ps.rfreqs(grid, grid.k_axes)
    theta = 0.5 * eps * sum(a * b for a, b in zip(xi, yy))
    vhat = _expand(ps.rfft(V, tuple(range(grid.d))), grid.d)
    if kind == "difference":
        kernel = 2j * np.sin(theta)
    elif kind == "remainder":
        kernel = (2j / eps) * _sin_minus_id(theta)
    else:
        raise ValueError(kind)
    return ps.irfft(vhat * kernel, grid.x_axes, grid.shape)


def _sin_minus_id(theta: np.ndarray) -> np.ndarray:
    """``sin(t) - t`` without cancellation for small ``t``."""
    t = np.asarray(theta, dtype=np.float64)
    out = np.sin(t) - t
    small = np.abs(t) < 1e-2
    ts = t[small]
    t2 = ts * ts
    out[small] = -ts * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0))
    return out


def _y_dot_grad(grad: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    yy = ps.rfreqs(grid, grid.k_axes)
    return sum(_expand(grad[i], grid.d) * yy[i] for i in range(grid.d))


def _check_eps(f: PhaseField, eps):
    eps = f.epsilon if eps is None else eps
    if not eps > 0:
        raise ValueError("quantum operators need epsilon > 0")
    return eps


def apply_kick(f: PhaseField, V: np.ndarray, dt: float) -> PhaseField:
    """Exact flow of the Hartree term with the potential ``V`` held fixed."""
    if f.epsilon == 0:
        from .vlasov import classical_kick
        return classical_kick(f, V, dt)
    g = f.grid
    D = _shift_multiplier(V, g, f.epsilon, "difference")
    mult = np.exp((1j * dt / f.epsilon) * D)
    return f.with_values(ps.apply_rmultiplier(f.values, mult, g.k_axes))


def kick_realness_residue(f: PhaseField, V: np.ndarray, dt: float) -> float:
    """Max imaginary part left by the kick when run through complex FFTs."""
    g = f.grid
    xi = [g.freq(i, zero_nyquist=True) for i in g.x_axes]
    yy = [g.freq(i, zero_nyquist=True) for i in g.k_axes]
    theta = 0.5 * f.epsilon * sum(a * b for a, b in zip(xi, yy))
    vhat = _expand(ps.fft(V, tuple(range(g.d))), g.d)
    D = ps.ifft(vhat * 2j * np.sin(theta), g.x_axes).real
    _, res = ps.apply_multiplier_residue(f.values, np.exp((1j * dt / f.epsilon) * D), g.k_axes)
    return res


def apply_free_transport(f: PhaseField, dt: float) -> PhaseField:
    """Exact shear ``f(x, k) -> f(x - k dt, k)``."""
    g = f.grid
    xi = ps.rfreqs(g, g.x_axes)
    phase = sum(xi[i] * g.axis(g.d + i) for i in range(g.d))
    mult = np.exp((-1j * dt) * phase)
    return f.with_values(ps.apply_rmultiplier(f.values, mult, g.x_axes),
                         time=f.time + dt)


def apply_T_eps(w: PhaseField, V: np.ndarray, eps: float | None = None) -> PhaseField:
    """Quantum force generator ``T_eps w`` for the potential ``V``."""
    eps = _check_eps(w, eps)
    g = w.grid
    D = _shift_multiplier(V, g, eps, "difference")
    return w.with_values(ps.apply_rmultiplier(w.values, (1j / eps) * D, g.k_axes))


def apply_T_0(w: PhaseField, V: np.ndarray) -> PhaseField:
    """Classical force generator ``grad V . grad_k w``."""
    g = w.grid
    grad = _spatial_grad(V, g)
    return w.with_values(ps.apply_rmultiplier(w.values, 1j * _y_dot_grad(grad, g), g.k_axes))


def apply_T_difference(w: PhaseField, V: np.ndarray, eps: float | None = None) -> PhaseField:
    """``(T_eps - T_0) w`` evaluated through a cancellation-free multiplier."""
    eps = _check_eps(w, eps)
    g = w.grid
    R = _shift_multiplier(V, g, eps, "remainder")
    return w.with_values(ps.apply_rmultiplier(w.values, 1j * R, g.k_axes))


def _spatial_grad(V: np.ndarray, g: PhaseGrid) -> np.ndarray:
    axes = tuple(range(g.d))
    vhat = ps.fft(V, axes)
    return np.stack([ps.ifft(1j * g.space_freq(i, zero_nyquist=True) * vhat, axes).real
                     for i in range(g.d)])


def kinetic_energy(f: PhaseField) -> float:
    g = f.grid
    k2 = sum(k ** 2 for k in g.k_mesh())
    return float(np.sum(0.5 * k2 * f.values) * g.cell)


def potential_energy(f: PhaseField, phi: Potential) -> float:
    rho = density(f)
    V, _ = hartree_field(rho, phi, f.grid)
    return float(0.5 * np.sum(rho * V) * f.grid.hx ** f.grid.d)


def energy(f: PhaseField, phi: Potential) -> float:
    """Hartree energy ``int |k|^2/2 f + 1/2 int rho (phi * rho)``."""
    return kinetic_energy(f) + potential_energy(f, phi)


def default_dt(grid: PhaseGrid, phi: Potential) -> float:
    return 1e-3 * grid.lk / max(phi.grad_sup, 1.0)


@dataclass(frozen=True)
class WignerRun:
    state: PhaseField
    phi: Potential
    dt: float
    scheme: str = "strang"
    cadence: int = 1

    def __post_init__(self):
        if not self.state.epsilon > 0:
            raise ValueError("a Wigner run needs epsilon > 0")
        if self.dt == 0:
            raise ValueError("dt must be non-zero")
        if self.scheme != "strang":
            raise ValueError(f"unknown scheme {self.scheme!r}")


def strang_step(f: PhaseField, phi: Potential, dt: float, kick) -> PhaseField:
    """kick(dt/2) o transport(dt) o kick(dt/2), V refreshed before each kick."""
    if not phi.is_zero:
        f = kick(f, potential_of(f, phi)[0], 0.5 * dt)
    f = apply_free_transport(f, dt)
    if not phi.is_zero:
        f = kick(f, potential_of(f, phi)[0], 0.5 * dt)
    if not f.is_finite():
        raise SimulationError(f"non-finite values at t={f.time:.6g}")
    return f


def step(run: WignerRun) -> WignerRun:
    return replace(run, state=strang_step(run.state, run.phi, run.dt, apply_kick))


def evolve(run, T: float, stepper=step, observe=None, every: int | None = None):
    """Advance ``run`` to time ``T`` (from its current time).

    ``observe(run, step_index)`` is called at t=start, every ``every`` steps
    and at the final step.  Returns the final run.
    """
    n = int(round((T - run.state.time) / run.dt))
    if n < 0 or not np.isclose(run.state.time + n * run.dt, T, rtol=0, atol=1e-9 * max(1.0, abs(T))):
        raise ValueError(f"T={T} is not reachable from t={run.state.time} with dt={run.dt}")
    every = every or run.cadence
    if observe:
        observe(run, 0)
    for i in range(1, n + 1):
        run = stepper(run)
        if observe and (i % every == 0 or i == n):
            observe(run, i)
    return run
