"""Run configuration: a flat ``key = value`` text file parsed with configparser."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from ..initial_data import ClassicalProfile
from ..phase_space import PhaseGrid, make_grid
from ..potential import Potential, gaussian_potential, zero_potential

CHECK_GROUPS = ("convergence", "error_terms", "residual", "husimi", "conservation", "positivity",
                "hs_bridge", "moments", "seed", "oracle", "support")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    # phase grid
    d: int = 1
    nx: int = 512
    nk: int = 512
    lx: float = 16.0
    lk: float = 16.0
    # interaction
    potential: str = "gaussian"
    amplitude: float = 1.0
    sigma: float = 1.0
    # classical profile
    M0: float = 12.0
    sigma_x: float = 3.0
    sigma_k: float = 2.0
    x_cut: float = 12.0
    bump_power: int = 1
    classical_datum: str = "profile"     # or "seed"
    # sweep
    eps: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    dt: float = 1e-3
    T: float = 0.5
    diag_every: float = 0.05
    t_error: float = 0.25
    # oracle benchmark
    oracle_nx: int = 512
    oracle_nk: int = 256
    oracle_lx: float = 8.0
    oracle_lk: float = 4.0
    oracle_eps: float = 0.1
    oracle_T: float = 0.5
    # orchestration
    checks: tuple[str, ...] = CHECK_GROUPS
    out: str = "results"
    workers: int = 0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        object.__setattr__(self, "eps", eps)
        if not eps:
            raise ConfigError("eps list is empty")
        if any(e <= 0 for e in eps):
            raise ConfigError("every eps must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps list must be strictly decreasing")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        for name in ("T", "t_error", "diag_every", "oracle_T"):
            _check_multiple(name, getattr(self, name), self.dt)
        if not 0 < self.t_error <= self.T:
            raise ConfigError("t_error must lie in (0, T]")
        _check_multiple("t_error", self.t_error, self.diag_every)
        _check_multiple("T", self.T, self.diag_every)
        if self.classical_datum not in ("profile", "seed"):
            raise ConfigError("classical_datum must be 'profile' or 'seed'")
        unknown = set(self.checks) - set(CHECK_GROUPS)
        if unknown:
            raise ConfigError(f"unknown checks: {sorted(unknown)}")
        if self.potential not in ("gaussian", "zero"):
            raise ConfigError(f"unsupported potential {self.potential!r}")
        try:
            self.grid()
            self.oracle_grid()
            self.profile()
            self.phi()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.x_cut >= self.lx or self.M0 / 2 >= self.lk:
            raise ConfigError("profile support escapes the grid (needs x_cut < lx and M0/2 < lk)")

    def grid(self) -> PhaseGrid:
        return make_grid(self.d, self.nx, self.nk, self.lx, self.lk)

    def oracle_grid(self) -> PhaseGrid:
        return make_grid(self.d, self.oracle_nx, self.oracle_nk, self.oracle_lx, self.oracle_lk)

    def phi(self) -> Potential:
        if self.potential == "zero":
            return zero_potential(self.d)
        return gaussian_potential(self.amplitude, self.sigma, self.d)

    def profile(self) -> ClassicalProfile:
        return ClassicalProfile(self.M0, self.sigma_x, self.sigma_k, self.x_cut, self.d, self.bump_power)

    def steps(self, t: float) -> int:
        return int(round(t / self.dt))

    def as_dict(self) -> dict:
        return asdict(self)


def _check_multiple(name, value, unit):
    n = value / unit
    if value <= 0 or abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ConfigError(f"{name}={value} is not a positive multiple of {unit}")


def check_resolution(config: RunConfig) -> None:
    """Refuse eps values the momentum grid cannot resolve (``hk <= eps lk / 4``)."""
    g = config.grid()
    for e in config.eps:
        if g.hk > e * g.lk / 4.0:
            raise ConfigError(
                f"eps={e} is under-resolved: the heuristic hk <= eps*lk/4 requires "
                f"hk <= {e * g.lk / 4.0:.6g}, got hk = {g.hk:.6g}")


def _parse_value(kind, text: str):
    text = text.strip()
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    if kind is str:
        return text
    # tuples: comma or whitespace separated
    parts = [p for p in text.replace(",", " ").split() if p]
    return tuple(parts)


def load_config(path, **overrides) -> RunConfig:
    """Read ``key = value`` lines (an optional ``[run]`` header is accepted)."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    section = parser["run"] if parser.has_section("run") else parser[parser.sections()[0]]
    kinds = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    for key, raw in section.items():
        if key not in kinds:
            raise ConfigError(f"unknown config key {key!r}")
        kind = {"int": int, "float": float, "str": str}.get(kinds[key], tuple)
        try:
            val = _parse_value(kind, raw)
            if key == "eps":
                val = tuple(float(v) for v in val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        values[key] = val
    values.update(overrides)
    return RunConfig(**values)


def with_overrides(config: RunConfig, **changes) -> RunConfig:
    return replace(config, **changes)


def dump_config(config: RunConfig) -> str:
    """Render a config in the format read by :func:`load_config`."""
    lines = []
    for f in fields(RunConfig):
        v = getattr(config, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"

