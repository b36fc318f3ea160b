"""Vlasov evolution on the phase grid, a particle characteristics oracle,
the momentum-support bound and the quantum/classical force residual."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import phase_space as ps
from .phase_space import PhaseField, PhaseGrid
from .potential import Potential
from .wigner import (SimulationError, _y_dot_grad, apply_T_difference,
                     potential_of, strang_step)

SUPPORT_THRESHOLD = 1e-9


def classical_kick(g: PhaseField, V: np.ndarray, dt: float) -> PhaseField:
    """Exact momentum shift ``k -> k - dt grad V(x)``."""
    grid = g.grid
    grad = _grad_from_potential(V, grid)
    mult = np.exp(1j * dt * _y_dot_grad(grad, grid))
    return g.with_values(ps.apply_rmultiplier(g.values, mult, grid.k_axes))


def _grad_from_potential(V, grid):
    axes = tuple(range(grid.d))
    vhat = ps.fft(V, axes)
    return np.stack([ps.ifft(1j * grid.space_freq(i, zero_nyquist=True) * vhat, axes).real
                     for i in range(grid.d)])


@dataclass(frozen=True)
class VlasovRun:
    state: PhaseField
    phi: Potential
    dt: float
    M0: float
    cadence: int = 1

    def __post_init__(self):
        if self.state.epsilon != 0:
            raise ValueError("a Vlasov state carries epsilon = 0")
        if self.dt == 0:
            raise ValueError("dt must be non-zero")


def make_vlasov_run(g0: PhaseField, phi: Potential, dt: float, M0: float,
                    cadence: int = 1, check: bool = True) -> VlasovRun:
    """Build a run, validating the datum unless ``check`` is false."""
    g0 = g0.with_values(g0.values, epsilon=0.0)
    if check:
        peak = float(np.max(np.abs(g0.values)))
        if g0.values.min() < -1e-12 * max(peak, 1.0):
            raise ValueError("Vlasov datum must be non-negative")
        mass = ps.integrate(g0)
        if abs(mass - 1.0) > 1e-10:
            raise ValueError(f"Vlasov datum must have unit mass, got {mass!r}")
        if support_radius(g0) > M0 + g0.grid.hk:
            raise ValueError("Vlasov datum is not supported in |k| <= M0")
    return VlasovRun(g0, phi, dt, M0, cadence)


def vlasov_step(run: VlasovRun) -> VlasovRun:
    return replace(run, state=strang_step(run.state, run.phi, run.dt, classical_kick))


def support_radius(g: PhaseField, threshold: float | None = None) -> float:
    """Largest ``|k|`` where ``|g|`` exceeds ``threshold`` (default 1e-9 max g)."""
    if threshold is None:
        threshold = SUPPORT_THRESHOLD * float(np.max(g.values))
    above = np.abs(g.values) > threshold
    if not above.any():
        return 0.0
    kabs = np.broadcast_to(g.grid.k_abs(), g.grid.shape)
    return float(kabs[above].max())


def support_bound(t: float, M0: float, phi: Potential) -> float:
    """``M(t) = M0 + sup|grad phi| t``."""
    return M0 + phi.grad_sup * t


def positivity_defect(g: PhaseField) -> float:
    return float(np.min(g.values))


def residual_r1(g: PhaseField, f_husimi: PhaseField, phi: Potential, eps: float | None = None) -> float:
    """``||(T_eps - T_0) g||_{L2}`` with the potential generated by ``f_husimi``."""
    eps = f_husimi.epsilon if eps is None else eps
    V, _ = potential_of(f_husimi, phi)
    return ps.l2_norm(apply_T_difference(g, V, eps))


# --- characteristics oracle -----------------------------------------------

@dataclass
class ParticleCloud:
    """Weighted phase-space particles carrying their initial datum value."""

    x: np.ndarray        # (n, d)
    k: np.ndarray        # (n, d)
    weight: np.ndarray   # (n,)
    value: np.ndarray    # (n,) g0 at the starting point
    volume: float        # phase-space cell volume per particle
    t: float = 0.0

    def __len__(self):
        return self.weight.size


def seed_particles(g0: PhaseField, n_particles: int, rel_cut: float = 1e-12) -> ParticleCloud:
    """Place particles on a strided sub-lattice of the grid where ``g0`` is non-negligible."""
    grid = g0.grid
    mask = g0.values > rel_cut * g0.values.max()
    count = int(mask.sum())
    if count == 0:
        raise ValueError("empty datum")
    stride = max(1, int(np.floor((count / n_particles) ** (1.0 / (2 * grid.d)))))
    sl = tuple(slice(0, None, stride) for _ in range(2 * grid.d))
    sub = np.zeros(grid.shape, dtype=bool)
    sub[sl] = True
    sel = mask & sub
    idx = np.nonzero(sel)
    x = np.stack([grid.x[idx[i]] for i in range(grid.d)], axis=1)
    k = np.stack([grid.k[idx[grid.d + i]] for i in range(grid.d)], axis=1)
    vol = grid.cell * stride ** (2 * grid.d)
    vals = g0.values[sel]
    return ParticleCloud(x, k, vals * vol, vals.copy(), vol)


def pair_force(x: np.ndarray, weight: np.ndarray, phi: Potential) -> np.ndarray:
    """``-grad (phi * rho_N)`` at each particle for the weighted empirical density."""
    diff = x[:, None, :] - x[None, :, :]
    r = np.sqrt(np.sum(diff ** 2, axis=-1))
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(r[..., None] > 0, diff / r[..., None], 0.0)
    dphi = phi.radial_derivative(r)
    return -np.einsum("ij,ijd,j->id", dphi, unit, weight)


def cloud_energy(cloud: ParticleCloud, phi: Potential) -> float:
    kin = 0.5 * np.sum(cloud.weight * np.sum(cloud.k ** 2, axis=1))
    diff = cloud.x[:, None, :] - cloud.x[None, :, :]
    pot = 0.5 * cloud.weight @ phi(np.sum(diff ** 2, axis=-1)) @ cloud.weight
    return float(kin + pot)


def characteristics_oracle(g0: PhaseField, phi: Potential, t: float, n_particles: int,
                           dt: float = 1e-2, force=None) -> ParticleCloud:
    """Integrate characteristics ``x' = k, k' = F(x)`` with classical RK4.

    The self-consistent force is recomputed at every stage from the weighted
    particle density (exact pair sum of ``grad phi``).  ``force(x, t)``
    overrides it with an external field.
    """
    if n_particles < 1000:
        raise ValueError("n_particles must be at least 1000")
    cloud = seed_particles(g0, n_particles)
    if force is None:
        def force(x, _t, w=cloud.weight):
            return pair_force(x, w, phi)
    n = int(round(t / dt)) if t else 0
    h = t / n if n else 0.0
    x, k = cloud.x.copy(), cloud.k.copy()
    s = 0.0
    for _ in range(n):
        k1x, k1k = k, force(x, s)
        k2x, k2k = k + 0.5 * h * k1k, force(x + 0.5 * h * k1x, s + 0.5 * h)
        k3x, k3k = k + 0.5 * h * k2k, force(x + 0.5 * h * k2x, s + 0.5 * h)
        k4x, k4k = k + h * k3k, force(x + h * k3x, s + h)
        x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        k = k + h / 6.0 * (k1k + 2 * k2k + 2 * k3k + k4k)
        s += h
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(k))):
            raise SimulationError("non-finite particle state")
    return replace(cloud, x=x, k=k, t=t)


def grid_values_at(g: PhaseField, x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Trigonometric interpolant of a d=1 field at scattered points."""
    grid = g.grid
    if grid.d != 1:
        raise NotImplementedError("scattered interpolation is implemented for d=1")
    c = np.fft.fft2(g.values) / g.values.size
    xi, yy = grid.xi.copy(), grid.y.copy()
    xi[grid.nx // 2] = 0.0
    yy[grid.nk // 2] = 0.0
    ex = np.exp(1j * np.outer(x[:, 0] - grid.x[0], xi))
    ek = np.exp(1j * np.outer(k[:, 0] - grid.k[0], yy))
    return np.real(np.einsum("pi,ij,pj->p", ex, c, ek, optimize=True))


def oracle_discrepancy(g: PhaseField, cloud: ParticleCloud) -> float:
    """L2 distance between the grid solution and the transported datum.

    Characteristics preserve phase-space volume, so summing over the
    transported particles with their cell volumes is a quadrature of
    ``||g_grid(t) - g_exact(t)||^2`` over the transported support.
    """
    vals = grid_values_at(g, cloud.x, cloud.k)
    return float(np.sqrt(np.sum((vals - cloud.value) ** 2) * cloud.volume))


def deposited_density(cloud: ParticleCloud, grid: PhaseGrid) -> np.ndarray:
    """Cloud-in-cell deposit of the particle weights onto the position grid (d=1)."""
    if grid.d != 1:
        raise NotImplementedError
    s = (cloud.x[:, 0] - grid.x[0]) / grid.hx
    i0 = np.floor(s).astype(int)
    frac = s - i0
    rho = np.zeros(grid.nx)
    np.add.at(rho, i0 % grid.nx, cloud.weight * (1 - frac))
    np.add.at(rho, (i0 + 1) % grid.nx, cloud.weight * frac)
    return rho / grid.hx

