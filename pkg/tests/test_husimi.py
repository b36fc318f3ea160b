import numpy as np
import pytest
from hypothesis import given, strategies as st

from wignerlab import phase_space as ps
from wignerlab.husimi import (classical_seed, cutoff, error_E, error_E1, error_E2, error_E2_operator,
                              gaussian_smoothing, husimi_transform, relative_positivity_defect,
                              second_moment_shift, smooth_step)
from wignerlab.initial_data import coherent_mixture
from wignerlab.oracle import excited_state, make_ensemble, wigner_of_ensemble
from wignerlab.potential import zero_potential
from wignerlab.wigner import density

from conftest import gaussian_field

EPS = 0.25


@pytest.fixture(scope="module")
def excited(grid):
    return wigner_of_ensemble(make_ensemble(grid, EPS, excited_state(grid, EPS)))


def test_excited_wigner_is_negative_but_husimi_is_not(excited):
    assert relative_positivity_defect(excited) < -0.9
    assert relative_positivity_defect(husimi_transform(excited)) >= -1e-12


def test_husimi_of_excited_state_closed_form(excited, grid):
    # Q(x, k) = r^2 / (4 pi eps^2) exp(-r^2 / (2 eps)),  r^2 = x^2 + k^2
    q = husimi_transform(excited)
    exact = ps.from_function(grid, lambda x, k: (x * x + k * k) / (4 * np.pi * EPS ** 2)
                             * np.exp(-(x * x + k * k) / (2 * EPS))).values
    assert np.max(np.abs(q.values - exact)) < 1e-10 * np.max(exact)


def test_second_moment_shift(excited):
    before, after = second_moment_shift(excited)
    assert after - before == pytest.approx(0.5 * EPS, abs=1e-10)


def test_smoothing_is_a_semigroup(grid):
    f = gaussian_field(grid, 0.5, -0.3, 0.4)
    a = gaussian_smoothing(gaussian_smoothing(f, 0.1), 0.15)
    b = gaussian_smoothing(f, 0.25)
    assert np.max(np.abs(a.values - b.values)) < 1e-13


def test_smoothing_of_gaussian_adds_variance(grid):
    f = gaussian_field(grid, 0.5, -0.3, 0.4)
    s = np.sqrt(0.16 + 0.1 / 2)
    exact = gaussian_field(grid, 0.5, -0.3, s).values
    assert np.max(np.abs(gaussian_smoothing(f, 0.1).values - exact)) < 1e-12


def test_smoothing_commutes_with_k_marginal(grid):
    f = gaussian_field(grid, 0.5, -0.3, 0.4, eps=0.1)
    assert np.max(np.abs(density(gaussian_smoothing(f, 0.1, "k")) - density(f))) < 1e-12
    lhs = density(husimi_transform(f))
    rhs = density(gaussian_smoothing(f, 0.1, "x"))
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_zero_eps(grid, phi):
    f = gaussian_field(grid)
    with pytest.raises(ValueError):
        husimi_transform(f)
    with pytest.raises(ValueError):
        error_E2(f, phi)
    assert gaussian_smoothing(f, 0.0) is f


def test_E1_closed_form(grid):
    # E1 = -(eps/2) d_x d_k G = -(eps/2) (x - x0)(k - k0) / s^4 G for a Gaussian G
    s, x0, k0, eps = 0.6, 0.3, -0.4, 0.1
    ft = gaussian_field(grid, x0, k0, s, eps=eps)
    exact = -(eps / 2) * ps.from_function(
        grid, lambda x, k: (x - x0) * (k - k0) / s ** 4).values * ft.values
    assert np.max(np.abs(error_E1(ft).values - exact)) < 1e-10


def test_E2_matches_operator_route(grid, phi):
    f = gaussian_field(grid, 0.5, 0.2, 0.7, eps=0.1)
    direct = error_E2(f, phi)
    route = error_E2_operator(f, phi)
    assert ps.l2_norm(direct - route) <= 1e-10 * ps.l2_norm(direct)
    assert ps.l2_norm(direct) > 0


def test_E2_vanishes_without_interaction(grid):
    f = gaussian_field(grid, 0.5, 0.2, 0.7, eps=0.1)
    assert np.max(np.abs(error_E2(f, zero_potential()).values)) == 0.0
    assert ps.l2_norm(error_E(f, zero_potential()) - error_E1(husimi_transform(f))) == 0.0


def test_E2_is_order_eps(grid, phi):
    # local slope approaches 1 from below as eps shrinks (0.68, 0.83, 0.91, 0.96, 0.98)
    norms = [ps.l2_norm(error_E2(gaussian_field(grid, 0.5, 0.2, 0.7, eps=e), phi))
             for e in (0.025, 0.0125, 0.00625)]
    assert np.log2(norms[0] / norms[2]) / 2 == pytest.approx(1.0, abs=0.05)


def test_smooth_step_and_cutoff():
    s = np.linspace(-0.5, 1.5, 401)
    h = smooth_step(s)
    assert np.all(h[s <= 0] == 0) and np.all(h[s >= 1] == 1)
    assert np.all(np.diff(h) >= 0)
    assert smooth_step(0.5) == pytest.approx(0.5)
    k = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    np.testing.assert_array_equal(cutoff(k, 4.0)[[0, 1, 2, 4, 5]], [1, 1, 1, 0, 0])
    assert 0 < cutoff(3.0, 4.0) < 1


def test_classical_seed_properties(grid, profile):
    f0 = coherent_mixture(profile, 0.1, grid)
    rep = classical_seed(f0, profile.M0)
    assert ps.integrate(rep.g0) == pytest.approx(1.0, abs=1e-12)
    assert rep.g0.values.min() >= -1e-14 * rep.g0.values.max()
    assert rep.support_radius <= profile.M0 + grid.hk
    assert rep.gap == pytest.approx(abs(1 - rep.normalization), abs=1e-14)
    assert rep.l2_distance > 0 and rep.h3_norm > 0
    assert set(rep.row()) == {"normalization", "gap", "l2_distance", "h3_norm", "support_radius"}


def test_seed_gap_visible_for_wide_datum(grid):
    # a datum reaching past M0/2 loses mass to the cutoff
    f0 = gaussian_field(grid, 0.0, 0.0, 1.0, eps=0.1)
    rep = classical_seed(f0, 3.0)
    assert rep.gap > 1e-3
    assert rep.normalization > 1
    assert rep.support_radius <= 3.0 + grid.hk


def test_seed_rejects_bad_M0(grid):
    f0 = gaussian_field(grid, eps=0.1)
    with pytest.raises(ValueError):
        classical_seed(f0, grid.lk + 1)
    with pytest.raises(ValueError):
        classical_seed(f0, 0.0)


@given(x0=st.floats(-1, 1), k0=st.floats(-1, 1), w=st.floats(0.05, 0.95),
       eps=st.sampled_from([0.2, 0.3]))
def test_husimi_of_pure_pair_is_nonnegative(grid, x0, k0, w, eps):
    # a coherent superposition has a sign-changing Wigner function; its Husimi is >= 0.
    # Fringe frequencies 2|x0|/eps and 2|k0|/eps stay well below the grid Nyquist of 25.
    from wignerlab.oracle import coherent_state
    u = np.sqrt(w) * coherent_state(grid, eps, x0, k0) + np.sqrt(1 - w) * coherent_state(grid, eps, -x0, -k0)
    W = wigner_of_ensemble(make_ensemble(grid, eps, u))
    assert relative_positivity_defect(husimi_transform(W)) >= -1e-10


@given(s=st.floats(0.3, 1.0), eps=st.floats(0.01, 0.5))
def test_smoothing_preserves_mass(grid, s, eps):
    f = gaussian_field(grid, 0.2, -0.1, s)
    assert ps.integrate(gaussian_smoothing(f, eps)) == pytest.approx(ps.integrate(f), abs=1e-13)
