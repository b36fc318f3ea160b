"""Least-squares power-law fits in log-log coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residuals: tuple[float, ...]
    n_points: int


def fit_slope(x, y) -> SlopeFit:
    """Fit ``log y = slope * log x + intercept``; only positive pairs are used."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    lx, ly = np.log(x[keep]), np.log(y[keep])
    if lx.size < 2:
        return SlopeFit(float("nan"), float("nan"), (), int(lx.size))
    slope, intercept = np.polyfit(lx, ly, 1)
    res = ly - (slope * lx + intercept)
    return SlopeFit(float(slope), float(intercept), tuple(float(r) for r in res), int(lx.size))
