import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wignerlab import phase_space as ps
from wignerlab.phase_space import FieldFormatError, PhaseField

from conftest import gaussian_field


def test_grid_validation():
    with pytest.raises(ValueError):
        ps.make_grid(1, 100, 128, 8, 8)
    with pytest.raises(ValueError):
        ps.make_grid(4, 16, 16, 8, 8)
    with pytest.raises(ValueError):
        ps.make_grid(1, 16, 16, 0.0, 8)
    with pytest.raises(ValueError):
        ps.make_grid(1, 4, 16, 1, 1)


def test_grid_layout():
    g = ps.make_grid(2, 16, 8, 2.0, 1.0)
    assert g.shape == (16, 16, 8, 8)
    assert g.x_axes == (0, 1) and g.k_axes == (2, 3)
    assert g.hx == pytest.approx(0.25) and g.hk == pytest.approx(0.25)
    assert g.x[0] == -2.0 and g.x[-1] == pytest.approx(2.0 - 0.25)
    assert g.cell == pytest.approx(0.25 ** 4)


def test_field_shape_and_epsilon_validation(grid):
    with pytest.raises(ValueError):
        PhaseField(grid, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        PhaseField(grid, np.zeros(grid.shape), epsilon=-1.0)


def test_integrate_zero_and_gaussian(grid):
    assert ps.integrate(ps.zeros(grid)) == 0.0
    # unit-mass Gaussian: analytic integral 1
    assert ps.integrate(gaussian_field(grid)) == pytest.approx(1.0, abs=1e-10)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_integrate_linear(a, b):
    g = ps.make_grid(1, 32, 32, 4, 4)
    f1 = gaussian_field(g, 0.5, 0.0)
    f2 = gaussian_field(g, -1.0, 1.0, 0.7)
    lhs = ps.integrate(a * f1 + b * f2)
    rhs = a * ps.integrate(f1) + b * ps.integrate(f2)
    assert lhs == pytest.approx(rhs, abs=1e-13)


@given(seed=st.integers(0, 2 ** 31 - 1))
def test_parseval(seed):
    g = ps.make_grid(1, 16, 32, 3, 5)
    vals = np.random.default_rng(seed).standard_normal(g.shape)
    f = PhaseField(g, vals)
    assert ps.parseval_l2_norm(f) == pytest.approx(ps.l2_norm(f), rel=1e-12)


def test_sobolev_zero_field(grid):
    for m in range(4):
        assert ps.sobolev_norm(ps.zeros(grid), m) == 0.0


def test_sobolev_m0_is_l2_and_nested(grid):
    f = gaussian_field(grid, 0.3, -0.2, 0.8)
    assert ps.sobolev_norm(f, 0) == pytest.approx(ps.l2_norm(f), rel=1e-12)
    norms = [ps.sobolev_norm(f, m) for m in range(4)]
    assert all(a <= b for a, b in zip(norms, norms[1:]))


def test_sobolev_rejects_high_order(grid):
    with pytest.raises(ValueError):
        ps.sobolev_norm(ps.zeros(grid), 4)


def test_sobolev_gaussian_closed_form():
    # ||d^a exp(-s^2/2)||_{L2(R)}^2 = Gamma(a + 1/2)
    g = ps.make_grid(1, 128, 128, 12, 12)
    f = ps.from_function(g, lambda x, k: np.exp(-(x ** 2 + k ** 2) / 2))
    one = [math.sqrt(math.gamma(a + 0.5)) for a in range(4)]
    for m in range(4):
        exact = sum(one[a] * one[b] for a in range(4) for b in range(4) if a + b <= m)
        assert ps.sobolev_norm(f, m) == pytest.approx(exact, rel=1e-8)


def test_spectral_derivative_of_gaussian(grid):
    f = ps.from_function(grid, lambda x, k: np.exp(-(x ** 2 + k ** 2) / 2))
    d = ps.spectral_derivative(f, (1, 2))
    exact = ps.from_function(grid, lambda x, k: -x * (k * k - 1) * np.exp(-(x ** 2 + k ** 2) / 2))
    assert np.max(np.abs(d.values - exact.values)) < 1e-10


def test_boundary_mass(grid):
    assert ps.boundary_mass(gaussian_field(grid, s=0.5)) < 1e-20
    assert ps.boundary_mass(gaussian_field(grid, x0=7.5, s=0.5)) > 0.1


def test_dump_load_round_trip(tmp_path, rng):
    g = ps.make_grid(2, 8, 16, 1.5, 2.5)
    f = PhaseField(g, rng.standard_normal(g.shape), 0.125, 0.75)
    p = tmp_path / "f.wvf"
    ps.dump(f, p)
    h = ps.load(p)
    assert h.grid == g and h.epsilon == 0.125 and h.time == 0.75
    assert h.values.tobytes() == f.values.tobytes()


def test_load_errors(tmp_path):
    g = ps.make_grid(1, 8, 8, 1, 1)
    p = tmp_path / "f.wvf"
    ps.dump(ps.zeros(g), p)
    raw = p.read_bytes()
    (tmp_path / "magic").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(FieldFormatError, match="magic"):
        ps.load(tmp_path / "magic")
    (tmp_path / "short").write_bytes(raw[:10])
    with pytest.raises(FieldFormatError):
        ps.load(tmp_path / "short")
    (tmp_path / "trunc").write_bytes(raw[:-8])
    with pytest.raises(FieldFormatError, match="payload"):
        ps.load(tmp_path / "trunc")
    version = bytearray(raw)
    version[4] = 9
    (tmp_path / "ver").write_bytes(bytes(version))
    with pytest.raises(FieldFormatError, match="version"):
        ps.load(tmp_path / "ver")


def test_d1_header_with_d2_payload(tmp_path):
    g1 = ps.make_grid(1, 8, 8, 1, 1)
    g2 = ps.make_grid(2, 8, 8, 1, 1)
    ps.dump(ps.zeros(g1), tmp_path / "a")
    ps.dump(ps.zeros(g2), tmp_path / "b")
    header = (tmp_path / "a").read_bytes()[:ps._HEADER.size]
    payload = (tmp_path / "b").read_bytes()[ps._HEADER.size:]
    (tmp_path / "c").write_bytes(header + payload)
    with pytest.raises(FieldFormatError, match="payload"):
        ps.load(tmp_path / "c")


def test_rmultiplier_matches_complex_path(grid, rng):
    f = gaussian_field(grid, 0.5, 1.0)
    w = ps.rfreqs(grid, grid.k_axes)
    mult = np.exp(0.3j * w[0])
    full = np.exp(0.3j * grid.freq(1, zero_nyquist=True))
    a = ps.apply_rmultiplier(f.values, mult, grid.k_axes)
    b, res = ps.apply_multiplier_residue(f.values, full, grid.k_axes)
    assert np.max(np.abs(a - b)) < 1e-14 and res < 1e-14
