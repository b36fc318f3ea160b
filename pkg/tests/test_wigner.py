import numpy as np
import pytest
from hypothesis import given, strategies as st

from wignerlab import phase_space as ps
from wignerlab.potential import gaussian_potential, zero_potential
from wignerlab.wigner import (SimulationError, WignerRun, apply_free_transport, apply_kick,
                              apply_T_0, apply_T_difference, apply_T_eps, density, energy, evolve,
                              kick_realness_residue, potential_of, step)

from conftest import gaussian_field


def test_free_transport_shear_closed_form(grid):
    f = gaussian_field(grid, -1.0, 0.5, 0.6, eps=0.1)
    t = 1.3
    out = apply_free_transport(f, t)
    exact = gaussian_field(grid, 0.0, 0.0, 0.6).values
    exact = ps.from_function(grid, lambda x, k: np.exp(-((x - k * t + 1.0) ** 2 + (k - 0.5) ** 2)
                                                         / (2 * 0.36)) / (2 * np.pi * 0.36)).values
    assert np.max(np.abs(out.values - exact)) < 1e-10
    assert out.time == pytest.approx(t)


def test_kick_is_exact_shift_for_linear_force():
    # a single Fourier mode V = cos(x) with tiny eps acts like the classical shift k -> k - t V'(x)
    g = ps.make_grid(1, 64, 256, np.pi, 8.0)
    V = np.cos(g.x)
    f = gaussian_field(g, 0.0, 0.0, 0.8, eps=1e-6)
    t = 0.4
    out = apply_kick(f, V, t)
    exact = ps.from_function(g, lambda x, k: np.exp(-(x ** 2 + (k - t * np.sin(x)) ** 2) / (2 * 0.64))
                             / (2 * np.pi * 0.64)).values
    assert np.max(np.abs(out.values - exact)) < 1e-8


def test_kick_single_mode_quantum_closed_form():
    # V = cos(x): V(x + eps y/2) - V(x - eps y/2) = -2 sin(x) sin(eps y / 2)
    g = ps.make_grid(1, 32, 128, np.pi, 8.0)
    eps, t = 0.5, 0.3
    f = gaussian_field(g, 0.0, 0.0, 0.7, eps=eps)
    out = apply_kick(f, np.cos(g.x), t)
    F = np.fft.fft(f.values, axis=1)
    y = g.y.copy()
    y[g.nk // 2] = 0.0
    D = -2 * np.sin(g.x)[:, None] * np.sin(eps * y / 2)[None, :]
    exact = np.fft.ifft(F * np.exp(1j * t / eps * D), axis=1).real
    assert np.max(np.abs(out.values - exact)) < 1e-13


def test_kick_realness(grid, phi):
    f = gaussian_field(grid, 0.2, 0.1, eps=0.05)
    V, _ = potential_of(f, phi)
    assert kick_realness_residue(f, V, 0.01) < 1e-15


def test_T_eps_tends_to_T_0(grid, phi):
    f = gaussian_field(grid, 0.3, -0.2, 0.9, eps=0.1)
    V, _ = potential_of(f, phi)
    errs = [ps.l2_norm(apply_T_eps(f, V, e) - apply_T_0(f, V)) for e in (0.2, 0.1, 0.05)]
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)


def test_T_difference_matches_direct_difference(grid, phi):
    f = gaussian_field(grid, 0.3, -0.2, 0.9, eps=0.3)
    V, _ = potential_of(f, phi)
    direct = apply_T_eps(f, V) - apply_T_0(f, V)
    assert ps.l2_norm(apply_T_difference(f, V) - direct) < 1e-12 * ps.l2_norm(direct) + 1e-15


def test_T_difference_no_cancellation_for_tiny_eps(grid, phi):
    f = gaussian_field(grid, 0.3, -0.2, 0.9, eps=1e-6)
    V, _ = potential_of(f, phi)
    r = [ps.l2_norm(apply_T_difference(f, V, e)) for e in (1e-5, 1e-6)]
    assert r[0] / r[1] == pytest.approx(100, rel=1e-4)


def test_quantum_operators_need_eps(grid, phi):
    f = gaussian_field(grid)
    with pytest.raises(ValueError):
        apply_T_eps(f, np.zeros(grid.nx))
    with pytest.raises(ValueError):
        WignerRun(f, phi, 1e-3)
    with pytest.raises(ValueError):
        WignerRun(f.with_values(f.values, epsilon=0.1), phi, 0.0)


@given(dt=st.floats(1e-3, 0.2))
def test_step_conserves_mass_and_l2(dt):
    g = ps.make_grid(1, 64, 64, 8, 8)
    phi = gaussian_potential(1.0, 1.0)
    f = gaussian_field(g, 0.5, 0.3, 0.8, eps=0.1)
    out = step(WignerRun(f, phi, dt)).state
    assert ps.integrate(out) == pytest.approx(ps.integrate(f), abs=1e-13)
    assert ps.l2_norm(out) == pytest.approx(ps.l2_norm(f), rel=1e-13)


def test_time_reversibility(grid, phi):
    f = gaussian_field(grid, 0.5, 0.3, 0.8, eps=0.1)
    fwd = evolve(WignerRun(f, phi, 0.01), 0.2)
    back = evolve(WignerRun(fwd.state, phi, -0.01), 0.0)
    assert np.max(np.abs(back.state.values - f.values)) < 1e-12


def test_energy_conservation(grid, phi):
    f = gaussian_field(grid, 0.5, 0.3, 0.8, eps=0.1)
    e0 = energy(f, phi)
    run = evolve(WignerRun(f, phi, 1e-3), 0.3)
    assert abs(energy(run.state, phi) - e0) / e0 < 1e-6


def test_free_evolution_zero_potential(grid):
    f = gaussian_field(grid, 0.5, 0.3, 0.8, eps=0.1)
    run = evolve(WignerRun(f, zero_potential(), 0.05), 0.5)
    assert np.max(np.abs(run.state.values - apply_free_transport(f, 0.5).values)) < 1e-13


def test_evolve_observer_cadence(grid, phi):
    f = gaussian_field(grid, eps=0.1)
    seen = []
    evolve(WignerRun(f, phi, 0.01, cadence=3), 0.1, observe=lambda r, i: seen.append(i))
    assert seen == [0, 3, 6, 9, 10]
    with pytest.raises(ValueError):
        evolve(WignerRun(f, phi, 0.03), 0.1)


def test_nan_aborts(grid, phi):
    f = gaussian_field(grid, eps=0.1)
    bad = f.with_values(np.where(grid.axis(0) * np.ones(grid.shape) > 7.0, np.nan, f.values))
    with pytest.raises(SimulationError):
        step(WignerRun(bad, phi, 0.01))


def test_density_marginal(grid):
    f = gaussian_field(grid, 1.0, 0.0, 0.5)
    rho = density(f)
    exact = np.exp(-(grid.x - 1.0) ** 2 / 0.5) / np.sqrt(0.5 * np.pi)
    assert np.max(np.abs(rho - exact)) < 1e-12


def test_strang_is_second_order(grid):
    # errors against a fine reference shrink by about 4 when dt is halved
    phi = gaussian_potential(3.0, 1.0)
    f = gaussian_field(grid, 0.5, 0.3, 0.8, eps=0.1)
    T = 0.4
    sol = {dt: evolve(WignerRun(f, phi, dt), T).state for dt in (0.04, 0.02, 0.005)}
    e1 = ps.l2_norm(sol[0.04] - sol[0.005])
    e2 = ps.l2_norm(sol[0.02] - sol[0.005])
    # with a reference at dt/8: e(dt) / e(dt/2) = (1 - 1/64) / (1/4 - 1/64) = 4.2 for an O(dt^2) error
    assert e1 / e2 == pytest.approx(4.2, rel=0.02)
