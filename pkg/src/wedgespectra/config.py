"""Frozen configuration records

Every record is a frozen dataclass; calling it with keyword arguments
returns a modified copy:

>>> cfg = SolverConfig()
>>> cfg(n=40)
SolverConfig(L=20.0, n=40, order=2, tol=1e-08, k=1)
>>> cfg.n
160
"""

import os
import json
import math
import logging

from dataclasses import dataclass, fields
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Self

import numpy as np

from . import ConfigError
from .expr import Parser
from .geometry import MagneticField, SignFlips, canonicalize, from_spherical

logger = logging.getLogger(__name__)

THREADS_ENV = "WEDGE_SPECTRA_THREADS"
FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True)
class Config:
    def iterfields(self):
        for f in fields(self):
            yield f.name, getattr(self, f.name)

    def __call__(self, **changes) -> "Self":
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError("unknown settings", type(self).__name__,
                              keys=sorted(unknown))
        return type(self)(**(dict(self.iterfields()) | changes))

    def asdict(self) -> dict:
        return dict(self.iterfields())


@dataclass(frozen=True)
class SolverConfig(Config):
    """mesh and solver parameters of a sector solve (also a cache key)"""

    L: float = 20.0
    n: int = 160
    order: int = 2
    tol: float = 1e-8
    k: int = 1

    def __post_init__(self):
        _check_mesh(type(self).__name__, self.L, self.n, self.order, self.tol)
        if self.k < 1:
            raise ConfigError("k must be positive", "SolverConfig", k=self.k)

    @property
    def margin(self) -> float:
        "gap below which `E < E*` is not considered significant"
        return max(2 * self.tol, 5e-3)


@dataclass(frozen=True)
class SigmaConfig(Config):
    """mesh and solver parameters of the half-plane solves"""

    L: float = 24.0
    n: int = 96
    order: int = 2
    tol: float = 1e-8

    def __post_init__(self):
        _check_mesh(type(self).__name__, self.L, self.n, self.order, self.tol)


def _check_mesh(where, L, n, order, tol):
    if not (L > 0 and math.isfinite(L)):
        raise ConfigError("L must be positive", where, L=L)
    if not (isinstance(n, (int, np.integer)) and n >= 4):
        raise ConfigError("n must be an integer of at least 4", where, n=n)
    if order not in (1, 2):
        raise ConfigError("order must be 1 or 2", where, order=order)
    if not tol > 0:
        raise ConfigError("tol must be positive", where, tol=tol)


def default_threads() -> int:
    """worker count, capped by `WEDGE_SPECTRA_THREADS` when set"""
    cpus = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return cpus
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError("not an integer", THREADS_ENV, value=raw)
    if cap < 1:
        raise ConfigError("must be at least 1", THREADS_ENV, value=raw)
    return min(cap, cpus)


@dataclass(frozen=True)
class RunConfig(Config):
    """everything a command needs, validated before any solve

    The field is given either by components (`field`) or by its spherical
    angles (`gamma`, `theta`); without both, the field
    `(1/sqrt(2), 1/sqrt(2), 0)` is used. The `tau` grid is
    `k * tau_step` for the integers `k` between `tau_min / tau_step` and
    `tau_max / tau_step`.
    """

    field: tuple | None = None
    gamma: float | None = None
    theta: float | None = None
    alpha: float = 4 * math.pi / 5
    alpha_list: tuple = ()
    tau_min: float = -3.0
    tau_max: float = 4.0
    tau_step: float = 0.1
    tau_list: tuple = (-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0)
    L: float = 20.0
    n: int = 160
    order: int = 2
    tol: float = 1e-8
    k: int = 1
    sigma_L: float = 24.0
    sigma_n: int = 96
    theta_points: int = 10
    out: str = "out"
    formats: tuple = ("csv", "svg")
    threads: int | None = None

    def __post_init__(self):
        if self.field is not None and (self.gamma is not None or self.theta is not None):
            raise ConfigError("give the field either by components or by angles",
                              "RunConfig", field=self.field, gamma=self.gamma,
                              theta=self.theta)
        if (self.gamma is None) != (self.theta is None):
            raise ConfigError("both gamma and theta are needed", "RunConfig",
                              gamma=self.gamma, theta=self.theta)
        if not self.tau_step > 0:
            raise ConfigError("tau step must be positive", "RunConfig",
                              tau_step=self.tau_step)
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError("unknown output format", "RunConfig", formats=bad)
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be positive", "RunConfig",
                              threads=self.threads)
        if self.theta_points < 2:
            raise ConfigError("need at least 2 theta points", "RunConfig",
                              theta_points=self.theta_points)
        self.solver()
        self.sigma_config()

    def magnetic_field(self) -> tuple[MagneticField, SignFlips]:
        """canonical field and removed signs

        >>> f, s = RunConfig(field=(-3, 0, 4)).magnetic_field()
        >>> round(f.b1, 12), str(s)
        (0.6, '(-,+,+)')
        """
        if self.gamma is not None:
            return from_spherical(self.gamma, self.theta), SignFlips()
        if self.field is None:
            return canonicalize((2 ** -0.5, 2 ** -0.5, 0.0))
        return canonicalize(self.field)

    def tau_grid(self) -> np.ndarray:
        """the `tau` scan grid

        >>> RunConfig(tau_min=-0.2, tau_max=0.2).tau_grid().tolist()
        [-0.2, -0.1, 0.0, 0.1, 0.2]
        >>> RunConfig(tau_min=1, tau_max=0).tau_grid()
        Traceback (most recent call last):
          ...
        wedgespectra.ConfigError: In 'RunConfig' (tau_min=1, tau_max=0)
        -> empty tau grid
        """
        lo = math.ceil(self.tau_min / self.tau_step - 1e-9)
        hi = math.floor(self.tau_max / self.tau_step + 1e-9)
        if hi < lo:
            raise ConfigError("empty tau grid", "RunConfig",
                              tau_min=self.tau_min, tau_max=self.tau_max)
        return np.round(np.arange(lo, hi + 1) * self.tau_step, 12) + 0.0

    def alphas(self) -> list[float]:
        return list(self.alpha_list) if self.alpha_list else [self.alpha]

    def solver(self) -> SolverConfig:
        return SolverConfig(float(self.L), int(self.n), self.order, self.tol, self.k)

    def sigma_config(self) -> SigmaConfig:
        return SigmaConfig(float(self.sigma_L), int(self.sigma_n), self.order, self.tol)

    def workers(self) -> int:
        cap = default_threads()
        return cap if self.threads is None else min(self.threads, cap)

    def outdir(self) -> Path:
        path = Path(self.out)
        path.mkdir(parents=True, exist_ok=True)
        return path


_NUMBERS = {"gamma", "theta", "alpha", "tau_min", "tau_max", "tau_step", "L",
            "tol", "sigma_L"}
_INTEGERS = {"n", "order", "k", "sigma_n", "theta_points", "threads"}
_VECTORS = {"field", "alpha_list", "tau_list"}


def coerce(key: str, value, parser: Parser | None = None):
    """convert a raw setting (JSON value or command-line string)

    >>> abs(coerce("alpha", "4*pi/5") - 4 * math.pi / 5) < 1e-15
    True
    >>> coerce("field", "1, 0, 0")
    (1.0, 0.0, 0.0)
    """
    parser = parser or Parser()
    if value is None:
        return None
    if key in _NUMBERS:
        return parser(value)
    if key in _INTEGERS:
        num = parser(value)
        if num != int(num):
            raise ConfigError("not an integer", "RunConfig", key=key, value=value)
        return int(num)
    if key in _VECTORS:
        return parser.vector(value)
    if key == "formats":
        return tuple(value.split(",")) if isinstance(value, str) else tuple(value)
    if key == "out":
        return str(value)
    raise ConfigError("unknown setting", "RunConfig", key=key)


def load_config(path=None, **overrides) -> RunConfig:
    """defaults, then the JSON file at `path`, then `overrides`

    `None` overrides are ignored so that unset command-line flags keep the
    file values.
    """
    settings = {}
    if path is not None:
        try:
            with open(path) as infile:
                data = json.load(infile)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config ({err})", "load_config", path=str(path))
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat JSON object", "load_config",
                              path=str(path))
        settings.update(data)
    settings.update({k: v for k, v in overrides.items() if v is not None})
    parser = Parser()
    try:
        return RunConfig(**{k: coerce(k, v, parser) for k, v in settings.items()})
    except TypeError as err:
        raise ConfigError(f"invalid settings ({err})", "load_config")
