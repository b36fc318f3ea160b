"""Schrodinger-picture Hartree solver for orbital ensembles, the Wigner
transform of an ensemble, and the Hilbert-Schmidt / L2 bridge.

Serves as an independent reference for the phase-space solver.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import phase_space as ps
from .phase_space import PhaseField, PhaseGrid
from .potential import Potential, hartree_field
from .wigner import SimulationError, WignerRun, evolve

# triple-jump weights lifting a symmetric second-order step to fourth order
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = -(2.0 ** (1.0 / 3.0)) * _W1


@dataclass(frozen=True)
class OrbitalEnsemble:
    """Mixed state ``sum_m weights[m] |u_m><u_m|`` on the position grid.

    ``orbitals`` has shape ``(M,) + (nx,)*d``.
    """

    grid: PhaseGrid
    eps: float
    orbitals: np.ndarray
    weights: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.orbitals, dtype=np.complex128)
        if u.ndim == self.grid.d:
            u = u[None]
        w = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        if u.shape[1:] != (self.grid.nx,) * self.grid.d:
            raise ValueError("orbital shape does not match the position grid")
        if w.shape != (u.shape[0],):
            raise ValueError("one weight per orbital is required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        object.__setattr__(self, "orbitals", u)
        object.__setattr__(self, "weights", w)

    @property
    def dx(self) -> float:
        return self.grid.hx ** self.grid.d

    def norms(self) -> np.ndarray:
        axes = tuple(range(1, self.grid.d + 1))
        return np.sqrt(np.sum(np.abs(self.orbitals) ** 2, axis=axes) * self.dx)

    def density(self) -> np.ndarray:
        """``rho = sum_m lambda_m |u_m|^2`` as an ordered reduction."""
        rho = np.zeros((self.grid.nx,) * self.grid.d)
        for lam, u in zip(self.weights, self.orbitals):
            rho += lam * np.abs(u) ** 2
        return rho


def make_ensemble(grid: PhaseGrid, eps: float, orbitals, weights=None, normalize: bool = True):
    u = np.asarray(orbitals, dtype=np.complex128)
    if u.ndim == grid.d:
        u = u[None]
    if weights is None:
        weights = np.full(u.shape[0], 1.0 / u.shape[0])
    ens = OrbitalEnsemble(grid, float(eps), u, weights)
    if normalize:
        n = ens.norms().reshape((-1,) + (1,) * grid.d)
        ens = replace(ens, orbitals=u / n)
    if np.any(np.abs(ens.norms() - 1.0) > 1e-10):
        raise ValueError("orbitals must have unit L2 norm")
    return ens


def coherent_state(grid: PhaseGrid, eps: float, x0=0.0, k0=0.0) -> np.ndarray:
    """Minimal-uncertainty packet centred at ``(x0, k0)``; its Wigner
    function is a Gaussian of per-axis variance ``eps/2``."""
    d = grid.d
    x0 = np.broadcast_to(np.asarray(x0, dtype=np.float64), (d,))
    k0 = np.broadcast_to(np.asarray(k0, dtype=np.float64), (d,))
    u = (np.pi * eps) ** (-d / 4) * np.ones((grid.nx,) * d, dtype=np.complex128)
    for i in range(d):
        s = grid.space_axis(i) - x0[i]
        u = u * np.exp(-s ** 2 / (2 * eps) + 1j * k0[i] * s / eps)
    return u


def excited_state(grid: PhaseGrid, eps: float, x0: float = 0.0) -> np.ndarray:
    """First excited oscillator state along the first axis (odd, Wigner-negative at its centre)."""
    u = coherent_state(grid, eps, x0)
    return u * (grid.space_axis(0) - x0) * np.sqrt(2.0 / eps)


def _kinetic_phase(grid: PhaseGrid, eps: float, dt: float) -> np.ndarray:
    xi2 = sum(grid.space_freq(i) ** 2 for i in range(grid.d))
    return np.exp(-1j * dt * eps * 0.5 * xi2)


def nls_step(ens: OrbitalEnsemble, phi: Potential, dt: float) -> OrbitalEnsemble:
    """Strang step: half potential phase, kinetic phase, half potential phase."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return _strang(ens, phi, dt)


def _strang(ens: OrbitalEnsemble, phi: Potential, dt: float) -> OrbitalEnsemble:
    g = ens.grid
    axes = tuple(range(1, g.d + 1))
    u = ens.orbitals
    if not phi.is_zero:
        V, _ = hartree_field(ens.density(), phi, g)
        u = u * np.exp((-0.5j * dt / ens.eps) * V)
    u = ps.ifft(ps.fft(u, axes) * _kinetic_phase(g, ens.eps, dt), axes)
    if not phi.is_zero:
        V, _ = hartree_field(replace(ens, orbitals=u).density(), phi, g)
        u = u * np.exp((-0.5j * dt / ens.eps) * V)
    if not np.all(np.isfinite(u)):
        raise SimulationError(f"non-finite orbitals at t={ens.time + dt:.6g}")
    return replace(ens, orbitals=u, time=ens.time + dt)


def nls_step4(ens: OrbitalEnsemble, phi: Potential, dt: float) -> OrbitalEnsemble:
    """Fourth-order triple-jump composition of :func:`nls_step`."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    ens = _strang(ens, phi, _W1 * dt)
    ens = _strang(ens, phi, _W0 * dt)
    return _strang(ens, phi, _W1 * dt)


def ensemble_energy(ens: OrbitalEnsemble, phi: Potential) -> float:
    """``<-eps^2 Delta / 2> + 1/2 int rho (phi * rho)``."""
    g = ens.grid
    axes = tuple(range(1, g.d + 1))
    xi2 = sum(g.space_freq(i) ** 2 for i in range(g.d))
    n = g.nx ** g.d
    power = np.abs(ps.fft(ens.orbitals, axes)) ** 2
    kin = 0.5 * ens.eps ** 2 * np.sum(ens.weights.reshape((-1,) + (1,) * g.d) * xi2 * power) * ens.dx / n
    rho = ens.density()
    V, _ = hartree_field(rho, phi, g)
    return float(kin + 0.5 * np.sum(rho * V) * ens.dx)


def wigner_of_ensemble(ens: OrbitalEnsemble, grid: PhaseGrid | None = None) -> PhaseField:
    """Wigner transform ``(2 pi)^-d sum_m lambda_m int e^{i y.k} conj(u_m(x + eps y/2)) u_m(x - eps y/2) dy``.

    The ``y`` grid is the DFT dual of the ``k`` grid, so the transform is an
    exact discrete pair with the dual variable used by the phase-space kicks.
    Shifted orbitals are evaluated by trigonometric interpolation.
    """
    grid = ens.grid if grid is None else grid
    if grid.d != ens.grid.d or grid.nx != ens.grid.nx or grid.lx != ens.grid.lx:
        raise ValueError("ensemble position grid does not match the target grid")
    d, nx, nk = grid.d, grid.nx, grid.nk
    sp_axes = tuple(range(d))
    # y vectors in numpy order, flattened: (nk^d, d)
    ymesh = np.stack(np.meshgrid(*([grid.y] * d), indexing="ij"), axis=-1).reshape(-1, d)
    xi = np.stack(np.meshgrid(*([grid.xi] * d), indexing="ij"), axis=-1).reshape(-1, d)
    shift = 0.5 * ens.eps * ymesh
    phase = np.exp(1j * shift @ xi.T)                # (ny, nx^d)
    F = np.zeros((nk ** d, nx ** d), dtype=np.complex128)
    for lam, u in zip(ens.weights, ens.orbitals):
        uhat = ps.fft(u, sp_axes).reshape(-1)
        plus = ps.ifft((phase * uhat).reshape((-1,) + (nx,) * d), tuple(range(1, d + 1)))
        minus = ps.ifft((np.conj(phase) * uhat).reshape((-1,) + (nx,) * d), tuple(range(1, d + 1)))
        F += lam * (np.conj(plus) * minus).reshape(nk ** d, -1)
    F = F.T.reshape((nx,) * d + (nk,) * d)
    # sum_m e^{i y_m k_j}: with k_j = -lk + j hk this is an inverse DFT
    # of F times (-1)^m along each y axis
    sign = 1.0
    for i in range(d):
        m = np.fft.fftfreq(nk, 1.0 / nk).astype(int)
        sign = sign * ps._along((-1.0) ** m, d + i, 2 * d)
    k_axes = tuple(range(d, 2 * d))
    dy = np.pi / grid.lk
    W = ps.ifft(F * sign, k_axes) * (nk * dy / (2 * np.pi)) ** d
    return PhaseField(grid, W.real, ens.eps, ens.time)


def hs_bridge(ens: OrbitalEnsemble, grid: PhaseGrid | None = None):
    """Return ``(||A||_HS, ||W||_L2, ratio)``; the ratio equals 1."""
    g = ens.grid
    u = ens.orbitals.reshape(ens.orbitals.shape[0], -1)
    gram = np.conj(u) @ u.T * ens.dx
    hs = float(np.sqrt(np.real(ens.weights @ (np.abs(gram) ** 2) @ ens.weights)))
    l2 = ps.l2_norm(wigner_of_ensemble(ens, grid))
    ratio = hs / ((2 * np.pi * ens.eps) ** (g.d / 2) * l2)
    return hs, l2, ratio


def evolve_ensemble(ens: OrbitalEnsemble, phi: Potential, T: float, dt: float, order: int = 4):
    n = int(round((T - ens.time) / dt))
    if n < 0 or not np.isclose(ens.time + n * dt, T, rtol=0, atol=1e-9 * max(1.0, abs(T))):
        raise ValueError(f"T={T} is not reachable with dt={dt}")
    stepper = {2: nls_step, 4: nls_step4}[order]
    for _ in range(n):
        ens = stepper(ens, phi, dt)
    return ens


def oracle_compare(ens0: OrbitalEnsemble, f0: PhaseField, phi: Potential, T: float, dt: float,
                   order: int = 4, oracle_dt: float | None = None) -> float:
    """Relative L2 gap between the phase-space run and the Wigner transform of the oracle.

    The orbitals are advanced with the fourth-order composition (``order=4``)
    at step ``oracle_dt`` (default ``dt``) so that the comparison measures the
    phase-space solver's own time-stepping error; ``order=2`` uses the same
    splitting in both pictures.
    """
    ref = wigner_of_ensemble(ens0, f0.grid)
    scale = max(ps.l2_norm(ref), 1e-300)
    if ps.l2_norm(f0 - ref.with_values(ref.values, epsilon=f0.epsilon)) > 1e-10 * scale:
        raise ValueError("f0 is not the Wigner transform of ens0")
    if abs(f0.epsilon - ens0.eps) > 1e-15 * ens0.eps:
        raise ValueError("epsilon of f0 and ens0 differ")
    run = evolve(WignerRun(f0, phi, dt), T)
    ens = evolve_ensemble(ens0, phi, T, oracle_dt or dt, order)
    fT = run.state
    WT = wigner_of_ensemble(ens, f0.grid)
    return ps.l2_norm(fT - WT.with_values(WT.values, epsilon=fT.epsilon)) / ps.l2_norm(fT)
