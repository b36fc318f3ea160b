"""Husimi smoothing, its positivity and moment identities, the error terms of
the smoothed Wigner equation, and the classical seed built from a quantum datum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import phase_space as ps
from .phase_space import PhaseField, PhaseGrid
from .potential import Potential, hartree_field
from .wigner import apply_T_eps, density, potential_of


def gaussian_smoothing(f: PhaseField, eps: float, axes: str = "all") -> PhaseField:
    """Convolve with a Gaussian of per-axis variance ``eps/2``.

    Implemented as the Fourier multiplier ``exp(-eps |w|^2 / 4)`` over the
    selected axes (``"all"``, ``"x"`` or ``"k"``).
    """
    g = f.grid
    sel = {"all": tuple(range(2 * g.d)), "x": g.x_axes, "k": g.k_axes}[axes]
    if eps == 0:
        return f
    w = _rfreqs_full(g, sel)
    mult = np.exp(-0.25 * eps * sum(a ** 2 for a in w))
    return f.with_values(ps.apply_rmultiplier(f.values, mult, sel))


def _rfreqs_full(g: PhaseGrid, axes):
    """rfft frequencies keeping the true Nyquist value (for even multipliers)."""
    out = []
    for a in axes:
        n, h = (g.nx, g.hx) if a < g.d else (g.nk, g.hk)
        w = 2 * np.pi * (np.fft.rfftfreq(n, h) if a == axes[-1] else np.fft.fftfreq(n, h))
        shape = [1] * (2 * g.d)
        shape[a] = w.size
        out.append(w.reshape(shape))
    return out


def husimi_transform(f: PhaseField) -> PhaseField:
    if not f.epsilon > 0:
        raise ValueError("the Husimi transform needs epsilon > 0")
    return gaussian_smoothing(f, f.epsilon)


def positivity_defect(f: PhaseField) -> float:
    """Minimum value of the field over the grid."""
    return float(np.min(f.values))


def relative_positivity_defect(f: PhaseField) -> float:
    return positivity_defect(f) / float(np.max(np.abs(f.values)))


def k_second_moment(f: PhaseField) -> float:
    k2 = sum(k ** 2 for k in f.grid.k_mesh())
    return float(np.sum(k2 * f.values) * f.grid.cell)


def second_moment_shift(f: PhaseField):
    """``(int |k|^2 f, int |k|^2 husimi(f))``; the difference is ``d eps / 2``."""
    return k_second_moment(f), k_second_moment(husimi_transform(f))


def error_E1(f_husimi: PhaseField) -> PhaseField:
    """``-(eps/2) grad_x . grad_k`` of the Husimi field."""
    g = f_husimi.grid
    eps = f_husimi.epsilon
    axes = tuple(range(2 * g.d))
    w = ps.rfreqs(g, axes)
    # -(eps/2) (i xi)(i y) = (eps/2) xi y
    mult = 0.5 * eps * sum(w[i] * w[g.d + i] for i in range(g.d))
    return f_husimi.with_values(ps.apply_rmultiplier(f_husimi.values, mult, axes))


def error_E2(f: PhaseField, phi: Potential, rel_cut: float = 1e-18) -> PhaseField:
    """Commutator error of Husimi smoothing and the Hartree term.

    Evaluated directly in the doubly transformed variables ``(p, q)``:

        E2^(p, q) = sum_S V(S) K(S, q) f^(p - S, q) e^{-eps q^2/4}
                    [e^{-eps p^2/4} - e^{-eps (S^2 + (p-S)^2)/4}],

    with ``V = phi * rho^f`` and ``K(S, q) = -(2/eps) sin(eps S.q / 2)``.
    The bracket is formed with ``expm1`` so no cancellation occurs for
    small ``eps``.  ``S`` modes with ``|V(S)| <= rel_cut max|V|`` are skipped.
    """
    g = f.grid
    eps = f.epsilon
    if not eps > 0:
        raise ValueError("E2 needs epsilon > 0")
    d = g.d
    sp_axes = tuple(range(d))
    all_axes = tuple(range(2 * d))
    V, _ = hartree_field(density(f), phi, g)
    vcoef = ps.fft(V, sp_axes) / g.nx ** d
    if not np.any(vcoef):
        return f.with_values(np.zeros(g.shape))
    fhat = ps.rfft(f.values, all_axes)
    # p over full x spectra, q over (half) k spectra
    p = [g.freq(i) for i in range(d)]
    qz = ps.rfreqs(g, g.k_axes)
    qt = _rfreqs_full(g, g.k_axes)
    q2 = sum(a ** 2 for a in qt)
    p2 = sum(a ** 2 for a in p)
    damp_q = np.exp(-0.25 * eps * q2)
    out = np.zeros_like(fhat)
    thr = rel_cut * np.abs(vcoef).max()
    for s_idx in np.argwhere(np.abs(vcoef) > thr):
        s_idx = tuple(int(i) for i in s_idx)
        S = [g.xi[s_idx[i]] for i in range(d)]
        shifted = np.roll(fhat, s_idx, axis=sp_axes)
        pp2 = sum(np.roll(p[i], s_idx[i], axis=i) ** 2 for i in range(d))
        S2 = sum(si ** 2 for si in S)
        b = 0.25 * eps * (S2 + pp2 - p2)
        t1 = np.exp(-0.25 * eps * p2)
        t2 = np.exp(-0.25 * eps * (S2 + pp2))
        bracket = np.where(b >= 0, t1 * -np.expm1(-np.maximum(b, 0)),
                           t2 * np.expm1(np.minimum(b, 0)))
        K = (-2.0 / eps) * np.sin(0.5 * eps * sum(S[i] * qz[i] for i in range(d)))
        out += vcoef[s_idx] * K * damp_q * bracket * shifted
    return f.with_values(ps.irfft(out, all_axes, g.shape))


def error_E2_operator(f: PhaseField, phi: Potential) -> PhaseField:
    """Same quantity via ``husimi(T_eps^f f) - T_eps^{f~} f~`` (cross-check route)."""
    ft = husimi_transform(f)
    V, _ = potential_of(f, phi)
    Vt, _ = potential_of(ft, phi)
    return husimi_transform(apply_T_eps(f, V)) - apply_T_eps(ft, Vt)


def error_E(f: PhaseField, phi: Potential) -> PhaseField:
    return error_E1(husimi_transform(f)) + error_E2(f, phi)


# --- classical seed -------------------------------------------------------

def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, monotone in between."""
    s = np.asarray(s, dtype=np.float64)
    out = np.where(s >= 1, 1.0, 0.0)
    mid = (s > 0) & (s < 1)
    sm = s[mid]
    a = np.exp(-1.0 / sm)
    b = np.exp(-1.0 / (1.0 - sm))
    out[mid] = a / (a + b)
    return out


def cutoff(kabs, M0: float):
    """Radial cutoff: 1 on ``|k| <= M0/2``, 0 on ``|k| >= M0``."""
    return 1.0 - smooth_step(2.0 * np.asarray(kabs) / M0 - 1.0)


@dataclass(frozen=True)
class SeedReport:
    g0: PhaseField
    normalization: float
    gap: float
    l2_distance: float
    h3_norm: float
    support_radius: float

    def row(self) -> dict:
        return {"normalization": self.normalization, "gap": self.gap,
                "l2_distance": self.l2_distance, "h3_norm": self.h3_norm,
                "support_radius": self.support_radius}


def classical_seed(f0: PhaseField, M0: float) -> SeedReport:
    """Cut off and renormalize the Husimi transform of a unit-mass quantum datum."""
    from .vlasov import support_radius

    g = f0.grid
    if M0 <= 0 or M0 > g.lk:
        raise ValueError("M0 must lie inside the momentum domain")
    ft = husimi_transform(f0)
    chi = np.broadcast_to(cutoff(g.k_abs(), M0), g.shape)
    weighted = ps.integrate(ft.with_values(chi * ft.values))
    if not weighted > 0:
        raise ValueError("degenerate datum: cutoff integral is not positive")
    N = 1.0 / weighted
    # N - 1 = int (1 - chi) f~ / int chi f~ for a unit-mass datum; evaluating
    # the cut-off tail directly avoids cancellation when the gap is tiny.
    tail = ps.integrate(ft.with_values((1.0 - chi) * ft.values))
    g0 = PhaseField(g, N * chi * ft.values, 0.0, f0.time)
    return SeedReport(
        g0=g0,
        normalization=N,
        gap=abs(tail) * N,
        l2_distance=ps.l2_norm(f0 - g0.with_values(g0.values, epsilon=f0.epsilon)),
        h3_norm=ps.sobolev_norm(g0, 3),
        support_radius=support_radius(g0),
    )
