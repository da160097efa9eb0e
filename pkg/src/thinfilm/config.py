"""`key = value` run configuration with typed defaults and range checks."""

import math
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError
from .model import K0


@dataclass(frozen=True)
class RunConfig:
    g: float = 1.0
    k0: float = 1.0
    M: float = None
    K: float = None
    eps: float = 0.1
    N: int = 64
    max_modes: int = 512
    grid: int = 256
    ds: float = 0.01
    ds_max: float = 0.2
    max_steps: int = 400
    rupture_threshold: float = 1e-2
    tol: float = 1e-11
    dt: float = 1e-4
    t_end: float = 1.0
    snapshot_every: float = 0.1
    amplitude: float = 0.05
    seed: int = 0
    output_dir: str = "."

    @property
    def M_star(self):
        return 4.0 * self.g

    @property
    def M_star_k0(self):
        return 4.0 * self.g + 4.0 * self.k0 ** 2

    def resolved_M(self):
        """M if given, otherwise M*(k0)."""
        return self.M_star_k0 if self.M is None else self.M

    def resolved_K(self):
        return K0 if self.K is None else self.K

    def replace(self, **changes):
        values = asdict(self)
        values.update({k: v for k, v in changes.items() if v is not None})
        return build_config(values)

    def echo(self):
        """Fully resolved configuration, including derived critical values."""
        lines = [f"{key} = {_format(value)}" for key, value in asdict(self).items()]
        lines.append(f"M_star = {_format(self.M_star)}")
        lines.append(f"M_star_k0 = {_format(self.M_star_k0)}")
        return "\n".join(lines) + "\n"


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _positive(x):
    return x > 0


# key -> (predicate, human-readable range)
_RANGES = {
    "g": (_positive, "> 0"),
    "k0": (_positive, "> 0"),
    "M": (_positive, "> 0"),
    "K": (lambda x: x <= K0 + 1e-15, f"<= K0 = {K0:.17g}"),
    "eps": (lambda x: 0 < x <= 0.3, "in (0, 0.3]"),
    "N": (lambda x: 1 <= x <= 512, "in [1, 512]"),
    "max_modes": (lambda x: 1 <= x <= 4096, "in [1, 4096]"),
    "grid": (lambda x: 16 <= x <= 65536, "in [16, 65536]"),
    "ds": (_positive, "> 0"),
    "ds_max": (_positive, "> 0"),
    "max_steps": (lambda x: x >= 1, ">= 1"),
    "rupture_threshold": (lambda x: 0 < x < 1, "in (0, 1)"),
    "tol": (lambda x: 1e-15 <= x <= 1e-6, "in [1e-15, 1e-6]"),
    "dt": (_positive, "> 0"),
    "t_end": (_positive, "> 0"),
    "snapshot_every": (_positive, "> 0"),
    "amplitude": (_positive, "> 0"),
    "seed": (lambda x: x >= 0, ">= 0"),
}

_TYPES = {f.name: f.type for f in fields(RunConfig)}
_OPTIONAL = {"M", "K"}


def _convert(key, raw):
    kind = _TYPES[key]
    if key in _OPTIONAL and raw.lower() == "none":
        return None
    if kind in (float, "float"):
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError("not finite")
        return value
    if kind in (int, "int"):
        return int(raw)
    return raw


def build_config(values, lines=None):
    """Validate a mapping of already-typed values into a RunConfig."""
    lines = lines or {}
    for key, value in values.items():
        if key not in _TYPES:
            raise ConfigError(_where(lines.get(key)) + f"unknown key {key!r}")
        if value is None or key not in _RANGES:
            continue
        ok, text = _RANGES[key]
        if not ok(value):
            raise ConfigError(_where(lines.get(key)) + f"{key} must be {text}, got {value!r}")
    config = RunConfig(**values)
    if config.max_modes < config.N:
        raise ConfigError(_where(lines.get("max_modes")) + "max_modes must be >= N")
    return config


def _where(lineno):
    return "" if lineno is None else f"line {lineno}: "


def parse_config(text):
    """Parse `key = value` lines; `#` starts a comment. Missing keys take defaults."""
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key or not raw:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError:
            raise ConfigError(f"line {lineno}: cannot parse {raw!r} for key {key!r}") from None
        lines[key] = lineno
    return build_config(values, lines)
