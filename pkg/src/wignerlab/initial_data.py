"""Compact classical profiles, coherent-state mixtures built from them, and
a report of the hypotheses placed on the quantum initial data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate as _quad

from . import phase_space as ps
from .husimi import gaussian_smoothing, k_second_moment
from .phase_space import PhaseField, PhaseGrid


def bump(s, power: int = 2):
    """C-infinity bump ``exp(-1 / (1 - s^2)^power)`` on ``|s| < 1``, zero outside."""
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2) ** power)
    return out


@lru_cache(maxsize=None)
def _factor_derivatives(power: int):
    """Callables ``h^(j)(s, r)``, j = 0..3, of ``h(s) = exp(-s^2/2) B(s/r)``."""
    import sympy as sp

    s, r = sp.symbols("s r", positive=True)
    expr = sp.exp(-s ** 2 / 2 - 1 / (1 - (s / r) ** 2) ** power)
    return tuple(sp.lambdify((s, r), sp.diff(expr, s, j), "numpy") for j in range(4))


def gaussian_bump(s, r: float, power: int = 1):
    """``exp(-s^2/2) B(s/r)``: a Gaussian cut off smoothly at ``|s| = r``."""
    s = np.asarray(s, dtype=np.float64)
    return np.exp(-0.5 * s ** 2) * bump(s / r, power)


def _factor_derivative(s, j: int, r: float, power: int):
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < r
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        vals = _factor_derivatives(power)[j](s[inside], r)
    out[inside] = np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    return out


@lru_cache(maxsize=None)
def _factor_integrals(r: float, power: int):
    """``int h`` and ``int (h^(j))^2`` for j = 0..3 over ``(-r, r)``."""
    opts = dict(epsabs=0, epsrel=1e-13, limit=400)
    mass, _ = _quad.quad(lambda s: float(gaussian_bump(s, r, power)), -r, r, **opts)
    sq = tuple(_quad.quad(lambda s, j=j: float(_factor_derivative(s, j, r, power)) ** 2,
                          -r, r, **opts)[0] for j in range(4))
    second, _ = _quad.quad(lambda s: s * s * float(gaussian_bump(s, r, power)), -r, r, **opts)
    return mass, sq, second


@dataclass(frozen=True)
class ClassicalProfile:
    """Separable, compactly supported, nonnegative profile of unit mass.

    Each position factor is ``exp(-x^2 / 2 sigma_x^2)`` cut off smoothly at
    ``|x| = x_cut``; each momentum factor is ``exp(-k^2 / 2 sigma_k^2)`` cut
    off at ``|k| = M0 / 2``.  The cutoff is the bump
    ``exp(-1 / (1 - s^2)^power)``.
    """

    M0: float
    sigma_x: float = 3.0
    sigma_k: float = 2.0
    x_cut: float = 12.0
    d: int = 1
    power: int = 1

    def __post_init__(self):
        if not self.M0 > 0:
            raise ValueError("M0 must be positive")
        if not (self.sigma_x > 0 and self.sigma_k > 0 and self.x_cut > 0):
            raise ValueError("profile widths must be positive")
        if self.power < 1:
            raise ValueError("bump power must be >= 1")

    @property
    def k_half_width(self) -> float:
        return 0.5 * self.M0

    @property
    def support_radius(self) -> float:
        """Largest ``|k|`` in the support (corner of the k-box for d > 1)."""
        return self.k_half_width * np.sqrt(self.d)

    def _factors(self):
        """(scale, cut ratio) for the position and momentum factors."""
        return ((self.sigma_x, self.x_cut / self.sigma_x),
                (self.sigma_k, self.k_half_width / self.sigma_k))

    @property
    def constant(self) -> float:
        c = 1.0
        for sigma, r in self._factors():
            c /= (sigma * _factor_integrals(r, self.power)[0]) ** self.d
        return c

    def __call__(self, *coords):
        (sx, rx), (sk, rk) = self._factors()
        out = self.constant
        for x in coords[:self.d]:
            out = out * gaussian_bump(np.asarray(x) / sx, rx, self.power)
        for k in coords[self.d:]:
            out = out * gaussian_bump(np.asarray(k) / sk, rk, self.power)
        return out

    def sample(self, grid: PhaseGrid, normalize: bool = True) -> PhaseField:
        """Sample on ``grid``; rescale to unit discrete mass if ``normalize``."""
        if grid.d != self.d:
            raise ValueError("profile dimension does not match grid")
        if self.x_cut >= grid.lx or self.k_half_width >= grid.lk:
            raise ValueError("profile support escapes the grid")
        f = ps.from_function(grid, self.__call__)
        if normalize:
            f = f * (1.0 / ps.integrate(f))
        return f

    def factor_norms(self):
        """``||a^(j)||`` and ``||b^(j)||`` of the unnormalized x- and k-factors."""
        out = []
        for sigma, r in self._factors():
            sq = _factor_integrals(r, self.power)[1]
            out.append([np.sqrt(sq[j] * sigma ** (1 - 2 * j)) for j in range(4)])
        return out[0], out[1]

    def h3_norm(self) -> float:
        """Sum of L2 norms of all derivatives of total order <= 3, by 1-D quadrature."""
        a, b = self.factor_norms()
        total = 0.0
        for orders in itertools.product(range(4), repeat=2 * self.d):
            if sum(orders) > 3:
                continue
            term = self.constant
            for i, o in enumerate(orders):
                term *= a[o] if i < self.d else b[o]
            total += term
        return float(total)

    def k_second_moment(self) -> float:
        """``int |k|^2 g0`` by 1-D quadrature."""
        sk, rk = self._factors()[1]
        mass, _, second = _factor_integrals(rk, self.power)
        return float(self.d * sk ** 2 * second / mass)


def default_profile(M0: float = 12.0, d: int = 1, sigma_x: float = 3.0, sigma_k: float = 2.0,
                    x_cut: float = 12.0, power: int = 1) -> ClassicalProfile:
    return ClassicalProfile(float(M0), float(sigma_x), float(sigma_k), float(x_cut), int(d), int(power))


def coherent_mixture(profile: ClassicalProfile, eps: float, grid: PhaseGrid) -> PhaseField:
    """Superpose coherent states with weight ``g0``: Gaussian smoothing of variance eps/2."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    g0 = profile.sample(grid)
    f0 = gaussian_smoothing(g0, eps)
    return PhaseField(grid, f0.values, float(eps), 0.0)


@dataclass(frozen=True)
class AdmissibilityRow:
    eps: float
    h3_norm: float
    k_second_moment: float
    l1_norm: float
    tail_l2: float     # int_{|k| > M0/2} |f|^2
    tail_l1: float     # int_{|k| > M0/4} |f|


def admissibility_report(fields_by_eps, M0: float, alpha: float = 1.0, rel_tol: float = 0.05) -> dict:
    """Evaluate the data hypotheses across an epsilon list.

    ``fields_by_eps`` maps eps to the datum at that eps.  Tail conditions
    are judged by the fitted slopes of the two tail integrals against
    ``2 alpha`` and ``alpha``; a tail that vanishes to round-off counts as
    satisfied.  Returns rows plus a ``flags`` dict of booleans.
    """
    from .fitting import fit_slope

    rows = []
    for eps, f in sorted(fields_by_eps.items(), reverse=True):
        kabs = np.broadcast_to(f.grid.k_abs(), f.grid.shape)
        cell = f.grid.cell
        rows.append(AdmissibilityRow(
            eps=float(eps),
            h3_norm=ps.sobolev_norm(f, 3),
            k_second_moment=k_second_moment(f),
            l1_norm=ps.l1_norm(f),
            tail_l2=float(np.sum(f.values[kabs > 0.5 * M0] ** 2) * cell),
            tail_l1=float(np.sum(np.abs(f.values[kabs > 0.25 * M0])) * cell),
        ))
    h3 = np.array([r.h3_norm for r in rows])
    flags = {
        "h3_bounded": bool(h3.max() <= (1 + rel_tol) * h3.min()),
        "unit_mass_nonneg": all(abs(r.l1_norm - 1.0) < 1e-8 for r in rows),
    }
    eps = [r.eps for r in rows]
    for name, target in (("tail_l2", 2 * alpha), ("tail_l1", alpha)):
        vals = [getattr(r, name) for r in rows]
        if max(vals) < 1e-24:
            flags[name] = True
            continue
        slope = fit_slope(eps, vals).slope if len(rows) > 1 else float("nan")
        flags[name] = bool(np.isfinite(slope) and slope >= target * (1 - rel_tol))
    return {"rows": rows, "flags": flags}
