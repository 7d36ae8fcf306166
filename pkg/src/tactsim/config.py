"""Experiment configuration stored as TOML.

File layout (every key optional, defaults shown)::

    [system]
    N = 50                      # integer or list of integers
    hamiltonian = "tact_rotated"
    chi = 1.0

    [initial]                   # coherent start |theta, phi>
    theta = 1.5707963267948966
    phi = 0.0

    [time]
    # t_max = 0.12              # chi*t; default 3 ln(2 pi N) / (2N) per N
    samples = 1000

    [outputs]
    observables = true
    fidelities = true
    maps = ["husimi", "wigner"]
    # map_resolution = 101      # polar nodes; default 2N + 1
    portrait = true
    approximations = true
    # yurke_alpha = 0.68        # fixed alpha for fid_Y; default best per time

    [run]
    out = "out"
    format = "csv"              # or "json"
    seed = 0
    workers = 1

Unknown tables or keys are rejected. Errors name the offending field as
``table.key``.
"""
from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field

import tomli_w

from .dynamics import HamiltonianKind
from .phasespace import MapKind

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the field (e.g. "time.samples")."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


# field name -> (table, key)
_LAYOUT = {
    "N": ("system", "N"),
    "hamiltonian": ("system", "hamiltonian"),
    "chi": ("system", "chi"),
    "theta": ("initial", "theta"),
    "phi": ("initial", "phi"),
    "t_max": ("time", "t_max"),
    "samples": ("time", "samples"),
    "observables": ("outputs", "observables"),
    "fidelities": ("outputs", "fidelities"),
    "maps": ("outputs", "maps"),
    "map_resolution": ("outputs", "map_resolution"),
    "portrait": ("outputs", "portrait"),
    "approximations": ("outputs", "approximations"),
    "yurke_alpha": ("outputs", "yurke_alpha"),
    "out": ("run", "out"),
    "format": ("run", "format"),
    "seed": ("run", "seed"),
    "workers": ("run", "workers"),
}

FORMATS = ("csv", "json")


def _path(name):
    return ".".join(_LAYOUT[name])


@dataclass(frozen=True)
class ExperimentConfig:
    N: tuple = (50,)
    hamiltonian: str = "tact_rotated"
    chi: float = 1.0
    theta: float = math.pi / 2
    phi: float = 0.0
    t_max: float | None = None
    samples: int = 1000
    observables: bool = True
    fidelities: bool = True
    maps: tuple = ("husimi", "wigner")
    map_resolution: int | None = None
    portrait: bool = True
    approximations: bool = True
    yurke_alpha: float | None = None
    out: str = "out"
    format: str = "csv"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)
        Ns = self.N if isinstance(self.N, (list, tuple)) else (self.N,)
        if len(Ns) == 0:
            raise ConfigError(_path("N"), "list of particle numbers is empty")
        clean = []
        for n in Ns:
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise ConfigError(_path("N"), f"particle numbers must be integers >= 1, got {n!r}")
            clean.append(n)
        set_("N", tuple(clean))
        try:
            set_("hamiltonian", HamiltonianKind.parse(self.hamiltonian).value)
        except ValueError as exc:
            raise ConfigError(_path("hamiltonian"), str(exc)) from None
        for name in ("chi", "theta", "phi", "t_max", "yurke_alpha"):
            v = getattr(self, name)
            if v is None and name in ("t_max", "yurke_alpha"):
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(_path(name), f"expected a finite number, got {v!r}")
            set_(name, float(v))
        if self.chi == 0:
            raise ConfigError(_path("chi"), "coupling must be nonzero")
        if not 0 <= self.theta <= math.pi:
            raise ConfigError(_path("theta"), f"must lie in [0, pi], got {self.theta}")
        if not -math.pi <= self.phi < math.pi:
            raise ConfigError(_path("phi"), f"must lie in [-pi, pi), got {self.phi}")
        if self.t_max is not None and self.t_max <= 0:
            raise ConfigError(_path("t_max"), f"must be > 0, got {self.t_max}")
        if self.yurke_alpha is not None and not 0 <= self.yurke_alpha <= math.pi / 2:
            raise ConfigError(_path("yurke_alpha"), "must lie in [0, pi/2]")
        for name in ("samples", "seed", "workers", "map_resolution"):
            v = getattr(self, name)
            if v is None and name == "map_resolution":
                continue
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(_path(name), f"expected an integer, got {v!r}")
        if self.samples < 2:
            raise ConfigError(_path("samples"), f"need at least 2 samples, got {self.samples}")
        if self.workers < 1:
            raise ConfigError(_path("workers"), "must be >= 1")
        if self.map_resolution is not None and self.map_resolution < 3:
            raise ConfigError(_path("map_resolution"), "must be >= 3")
        for name in ("observables", "fidelities", "portrait", "approximations"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(_path(name), f"expected true/false, got {getattr(self, name)!r}")
        maps = self.maps if isinstance(self.maps, (list, tuple)) else (self.maps,)
        known = {k.value for k in MapKind}
        for m in maps:
            if m not in known:
                raise ConfigError(_path("maps"), f"unknown map kind {m!r} (expected {sorted(known)})")
        set_("maps", tuple(maps))
        if self.format not in FORMATS:
            raise ConfigError(_path("format"), f"must be one of {FORMATS}, got {self.format!r}")
        if not isinstance(self.out, str) or not self.out:
            raise ConfigError(_path("out"), "must be a nonempty path string")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        """Nested plain-data form; None values are omitted."""
        tables = {}
        for name, (table, key) in _LAYOUT.items():
            v = getattr(self, name)
            if v is None:
                continue
            if name == "N":
                v = v[0] if len(v) == 1 else list(v)
            elif isinstance(v, tuple):
                v = list(v)
            tables.setdefault(table, {})[key] = v
        return tables

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("<root>", "expected a table")
        lookup = {v: k for k, v in _LAYOUT.items()}
        kwargs = {}
        for table, entries in data.items():
            if not isinstance(entries, dict):
                raise ConfigError(table, "expected a table")
            for key, value in entries.items():
                name = lookup.get((table, key))
                if name is None:
                    raise ConfigError(f"{table}.{key}", "unknown setting")
                kwargs[name] = value
        return cls(**kwargs)


def dumps(config):
    return tomli_w.dumps(config.to_dict())


def loads(text):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"TOML syntax error: {exc}") from None
    return ExperimentConfig.from_dict(data)


def load(path):
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return loads(text)


def save(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(config))
