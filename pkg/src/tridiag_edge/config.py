"""Run configuration: an INI document with one section per command.

Example::

    [tail]
    model = H
    N = 1000
    alpha = 0.5
    law = pareto(1,2)
    lambda = 3
    trials = 10000
    seed = 1

Keys shared by every command and their defaults:

=========  ===============  ==========================================
key        default          meaning
=========  ===============  ==========================================
model      H                H, G or Gbeta
N          1000             matrix size (>= 2)
alpha      0.5              decay exponent (>= 0)
law        pareto(1,2)      potential law, see :func:`laws.parse_law`
beta_ens   1.0              beta of the G-beta base matrix (> 0)
seed       0                unsigned 64-bit seed
workers    1                worker threads (results do not depend on it)
format     csv              csv or jsonl
out        <command>.<fmt>  output data file
=========  ===============  ==========================================

Command keys (defaults in brackets): ``spectrum``: trial [0], top_d [10];
``tail``: lambda [3.0], trials [1000]; ``distribution``: trials [1000],
power [0, or ``auto`` for the regime scaling]; ``pointprocess``: trials
[1000], top_d [50], threshold [1.0]; ``spike-sweep``: M_grid
[0.5:0.5:4]; ``rate``: lambda_grid [2.1:0.1:5]; ``coupling-check``:
trials [1]. Grids are comma lists or ``start:step:stop`` (inclusive).
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass

from .laws import PotentialLaw, parse_law

__all__ = ["COMMANDS", "ConfigError", "RunConfig", "parse_config", "parse_grid", "render"]

COMMANDS = ("spectrum", "tail", "distribution", "pointprocess", "spike-sweep", "rate", "coupling-check")
COMMON_KEYS = ("model", "N", "alpha", "law", "beta_ens", "seed", "workers", "format", "out")
COMMAND_KEYS = {
    "spectrum": ("trial", "top_d"),
    "tail": ("lambda", "trials"),
    "distribution": ("trials", "power"),
    "pointprocess": ("trials", "top_d", "threshold"),
    "spike-sweep": ("M_grid",),
    "rate": ("lambda_grid",),
    "coupling-check": ("trials",),
}
# Config key -> RunConfig field where they differ.
FIELD = {"lambda": "lam"}
U64 = 2**64


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the problem when known."""

    def __init__(self, msg: str, key: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.key = key
        self.line = line


def _grid_default(text):
    return parse_grid(text)


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str = "H"
    N: int = 1000
    alpha: float = 0.5
    law: PotentialLaw = PotentialLaw.pareto(1.0, 2.0)
    beta_ens: float = 1.0
    seed: int = 0
    workers: int = 1
    format: str = "csv"
    out: str = ""
    trial: int = 0
    top_d: int = 10
    lam: float = 3.0
    trials: int = 1000
    power: float | None = 0.0
    threshold: float = 1.0
    M_grid: tuple = dataclasses.field(default_factory=lambda: _grid_default("0.5:0.5:4"))
    lambda_grid: tuple = dataclasses.field(default_factory=lambda: _grid_default("2.1:0.1:5"))

    @property
    def output_path(self) -> str:
        return self.out or f"{self.command}.{self.format}"

    def keys(self) -> tuple[str, ...]:
        return COMMON_KEYS + COMMAND_KEYS[self.command]


def parse_grid(text: str) -> tuple[float, ...]:
    """``a,b,c`` or inclusive ``start:step:stop``."""
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3:
            raise ValueError("range grids are start:step:stop")
        a, h, b = parts
        if not h > 0 or b < a:
            raise ValueError("range grid needs step > 0 and stop >= start")
        n = int(math.floor((b - a) / h + 1e-9)) + 1
        return tuple(round(a + i * h, 12) for i in range(n))
    vals = tuple(float(x) for x in text.split(",") if x.strip())
    if not vals:
        raise ValueError("empty grid")
    return vals


def _int(text, lo=None, hi=None):
    v = int(text.strip(), 10)
    if (lo is not None and v < lo) or (hi is not None and v >= hi):
        raise ValueError(f"{v} out of range")
    return v


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _convert(key: str, raw: str, command: str):
    if key == "model":
        v = raw.strip()
        for name in ("H", "G", "Gbeta"):
            if v.lower() == name.lower():
                return name
        raise ValueError(f"unknown model {v!r} (expected H, G or Gbeta)")
    if key == "N":
        return _int(raw, 2)
    if key == "alpha":
        v = _float(raw)
        if v < 0:
            raise ValueError("must be nonnegative")
        return v
    if key == "law":
        return parse_law(raw)
    if key == "beta_ens":
        v = _float(raw)
        if not v > 0:
            raise ValueError("must be positive")
        return v
    if key == "seed":
        return _int(raw, 0, U64)
    if key in ("workers", "trials", "top_d"):
        return _int(raw, 1)
    if key == "trial":
        return _int(raw, 0, U64)
    if key == "format":
        v = raw.strip().lower()
        if v not in ("csv", "jsonl"):
            raise ValueError("format must be csv or jsonl")
        return v
    if key == "out":
        return raw.strip()
    if key in ("lambda", "threshold"):
        return _float(raw)
    if key == "power":
        return None if raw.strip().lower() == "auto" else _float(raw)
    if key == "M_grid":
        g = parse_grid(raw)
        if any(m <= 0 for m in g):
            raise ValueError("spike heights must be positive")
        return g
    if key == "lambda_grid":
        g = parse_grid(raw)
        if any(x <= 2 for x in g):
            raise ValueError("rate grid values must exceed 2")
        return g
    raise ValueError(f"unknown key for command {command!r}")


def _key_lines(text: str) -> dict[str, int]:
    lines = {}
    for no, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*([A-Za-z_][\w-]*)\s*[=:]", line)
        if m:
            lines.setdefault(m.group(1).lower(), no)
    return lines


def build_config(command: str, values: dict[str, str], lines: dict[str, int] | None = None) -> RunConfig:
    """Validate raw string ``values`` for ``command`` into a :class:`RunConfig`."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    lines = lines or {}
    allowed = {k.lower(): k for k in COMMON_KEYS + COMMAND_KEYS[command]}
    kwargs = {}
    for raw_key, raw in values.items():
        key = allowed.get(raw_key.lower())
        if key is None:
            raise ConfigError(f"unknown key for command '{command}'", raw_key, lines.get(raw_key.lower()))
        try:
            kwargs[FIELD.get(key, key)] = _convert(key, raw, command)
        except ValueError as exc:
            raise ConfigError(str(exc), key, lines.get(raw_key.lower())) from None
    return RunConfig(command=command, **kwargs)


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse a configuration document.

    ``command`` picks the section; when omitted the document must contain
    exactly one section.

    Raises
    ------
    ConfigError
        Syntax errors carry the line number; domain errors name the key.
    """
    parser = configparser.ConfigParser(
        interpolation=None, default_section="\x00", inline_comment_prefixes=("#", ";")
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("expected a [command] section header", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line=line) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", exc.option, exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    sections = parser.sections()
    for s in sections:
        if s not in COMMANDS:
            raise ConfigError(f"unknown command section [{s}]")
    if command is None:
        if len(sections) != 1:
            raise ConfigError("document must hold exactly one command section")
        command = sections[0]
    if command not in sections:
        raise ConfigError(f"no [{command}] section")
    return build_config(command, dict(parser[command]), _key_lines(text))


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return "auto"
    return str(v)


def config_items(cfg: RunConfig) -> list[tuple[str, str]]:
    return [(k, _fmt(getattr(cfg, FIELD.get(k, k)))) for k in cfg.keys()]


def render(cfg: RunConfig) -> str:
    """Configuration document that parses back to ``cfg``."""
    body = "\n".join(f"{k} = {v}" for k, v in config_items(cfg))
    return f"[{cfg.command}]\n{body}\n"
