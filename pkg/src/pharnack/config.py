"""Run configuration: flat key = value text with one section per command.

A config file looks like

    [common]
    p = 2.0
    out = results

    [singular]
    levels = 5
    epsilon0 = 0.125

Angle values accept the sugar 'pi', 'pi/2', '3pi/4'.  Configs round-trip
through save/load unchanged, and every emitted artifact carries the
config hash for provenance.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field, fields, replace

COMMANDS = ("exponent", "solve", "singular", "harnack", "barrier")


class ConfigError(ValueError):
    pass


def parse_angle(text):
    t = str(text).strip().lower().replace(" ", "")
    if "pi" in t:
        head, _, tail = t.partition("pi")
        num = float(head) if head not in ("", "+", "-") else (
            -1.0 if head == "-" else 1.0)
        den = float(tail.lstrip("/")) if tail else 1.0
        return num * math.pi / den
    return float(t)


def _fmt_angle(x):
    for k in (1, 2, 3, 4, 6, 8):
        if abs(x - math.pi / k) < 1e-12:
            return "pi" if k == 1 else f"pi/{k}"
        if abs(x - 3 * math.pi / (2 * k)) < 1e-12 and k <= 2:
            return f"3pi/{2 * k}"
    return repr(x)


def _parse_list(text, conv=float):
    return tuple(conv(tok) for tok in str(text).split(",") if tok.strip())


@dataclass(frozen=True)
class RunConfig:
    command: str = "solve"
    # physics
    p: float = 2.0
    dim: int = 2
    c: float = 0.0
    # domain
    shape: str = "half-disk"
    opening: float = math.pi
    radius: float = 1.0
    # grid
    n_r: int = 380
    n_theta: int = 129
    epsilon: float = 2.0 ** -6
    q: float = 0.85
    grading: str = "power"
    # ladder
    epsilon0: float = 0.125
    levels: int = 5
    # sweeps (exponent command)
    p_values: tuple = (1.5, 2.0, 3.0)
    n_values: tuple = (2, 3)
    theta0_values: tuple = (math.pi / 2, math.pi)
    kinds: tuple = ("singular", "regular")
    c_values: tuple = (0.0, 1.0)
    # barrier
    C0_tilde: float = 0.0
    barrier_r: float = 1.0
    # harnack
    r0: float = 0.25
    field_files: tuple = ()
    # cone fit
    R_out: float = 1024.0
    # numerics / output
    tol: float = 1e-10
    out: str = "out"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        checks = [
            (self.p > 1.0, "p must exceed 1"),
            (self.dim >= 2, "dim must be at least 2"),
            (self.c >= 0.0, "potential strength c must be nonnegative"),
            (0.0 < self.opening < 2.0 * math.pi, "opening must lie in (0, 2pi)"),
            (self.radius > 0.0, "radius must be positive"),
            (self.n_r >= 4 and self.n_theta >= 4, "grid must be at least 4x4"),
            (0.0 < self.epsilon < self.radius, "epsilon must lie in (0, radius)"),
            (0.0 < self.q < 1.0, "grading ratio q must lie in (0, 1)"),
            (self.levels >= 1, "ladder needs at least one level"),
            (self.tol > 0.0, "tol must be positive"),
            (self.C0_tilde >= 0.0, "C0~ must be nonnegative"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)


_ANGLE_FIELDS = {"opening"}
_ANGLE_LIST_FIELDS = {"theta0_values"}
_INT_FIELDS = {"dim", "n_r", "n_theta", "levels"}
_STR_FIELDS = {"command", "shape", "out", "grading"}
_STR_LIST_FIELDS = {"kinds", "field_files"}
_INT_LIST_FIELDS = {"n_values"}
_FLOAT_LIST_FIELDS = {"p_values", "c_values"}


def _convert(name, raw):
    if name in _ANGLE_FIELDS:
        return parse_angle(raw)
    if name in _ANGLE_LIST_FIELDS:
        return _parse_list(raw, parse_angle)
    if name in _INT_FIELDS:
        return int(raw)
    if name in _STR_FIELDS:
        return str(raw).strip()
    if name in _STR_LIST_FIELDS:
        return tuple(tok.strip() for tok in str(raw).split(",") if tok.strip())
    if name in _INT_LIST_FIELDS:
        return _parse_list(raw, int)
    if name in _FLOAT_LIST_FIELDS:
        return _parse_list(raw, float)
    return float(raw)


def load_config(path, command) -> RunConfig:
    cp = configparser.ConfigParser()
    cp.optionxform = str        # keep key case (C0_tilde, R_out)
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    known = {f.name for f in fields(RunConfig)}
    values = {"command": command}
    for section in ("common", command):
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            if key == "command":
                continue
            if key not in known:
                raise ConfigError(f"unknown config key {key!r} in [{section}]")
            values[key] = _convert(key, raw)
    return RunConfig(**values)


def save_config(cfg: RunConfig, path):
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.add_section("common")
    for f in fields(RunConfig):
        val = getattr(cfg, f.name)
        if f.name == "command":
            continue
        if f.name in _ANGLE_FIELDS:
            text = _fmt_angle(val)
        elif f.name in _ANGLE_LIST_FIELDS:
            text = ", ".join(_fmt_angle(v) for v in val)
        elif isinstance(val, tuple):
            text = ", ".join(str(v) for v in val)
        else:
            text = repr(val) if isinstance(val, float) else str(val)
        cp.set("common", f.name, text)
    cp.add_section(cfg.command)
    with open(path, "w") as f:
        cp.write(f)


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    """Fold parsed CLI override flags into the config."""
    updates = {}
    if getattr(args, "p", None) is not None:
        updates["p"] = args.p
    if getattr(args, "dim", None) is not None:
        updates["dim"] = args.dim
    if getattr(args, "opening", None) is not None:
        updates["opening"] = parse_angle(args.opening)
    if getattr(args, "c", None) is not None:
        updates["c"] = args.c
    if getattr(args, "epsilon", None) is not None:
        updates["epsilon"] = args.epsilon
    if getattr(args, "grid", None) is not None:
        try:
            nr, nt = (int(tok) for tok in args.grid.split(","))
        except ValueError as exc:
            raise ConfigError("--grid expects 'n_r,n_theta'") from exc
        updates["n_r"], updates["n_theta"] = nr, nt
    if getattr(args, "out", None) is not None:
        updates["out"] = args.out
    return replace(cfg, **updates) if updates else cfg


def config_hash(cfg: RunConfig) -> str:
    blob = ";".join(f"{f.name}={getattr(cfg, f.name)!r}" for f in fields(RunConfig))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
