"""Run configuration: flat INI-style key = value sections.

The schema is deliberately small and diff-able; every command validates
its configuration before touching data, and ``print-config`` renders
the full default set.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # [kernel]
    kernel_name: str = "epanechnikov"
    kernel_order: int = 2

    # [bandwidths] -- 'auto' defers to the fit or experiment defaults
    c_h: float | None = None
    c_ell: float | None = None
    c_single: float | None = None
    h_exponent: float | None = None        # default 1/(2k + 0.5)
    ell_exponent: float | None = None      # default 1/(8d)
    single_exponent: float | None = None   # default 2k/(2k+1)
    equal_h: bool = False

    # [grids]
    component_points: int = 128
    tensor_points: int = 16
    quad_nodes: int = 32

    # [domain] -- CSV commands; 'auto' derives the boxes from the data
    inner: str = "auto"        # e.g. "0.1:0.9, 0.1:0.9"
    q_supports: str = "auto"   # e.g. "0.15:0.85, 0.15:0.85"

    # [fit]
    floor: float = 1e-3
    constant_source: str = "single_bandwidth"

    # [experiment]
    design: str = "ref2d"
    experiment: str = "theorem1"
    n_list: tuple[int, ...] = (500, 2000, 8000)
    reps: int = 200
    epsilon: float = 0.5
    seed: int = 0


_SECTIONS = {
    "kernel": ("kernel_name", "kernel_order"),
    "bandwidths": ("c_h", "c_ell", "c_single", "h_exponent", "ell_exponent",
                   "single_exponent", "equal_h"),
    "grids": ("component_points", "tensor_points", "quad_nodes"),
    "domain": ("inner", "q_supports"),
    "fit": ("floor", "constant_source"),
    "experiment": ("design", "experiment", "n_list", "reps", "epsilon", "seed"),
}

_FIELD_SECTION = {name: sec for sec, names in _SECTIONS.items() for name in names}


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    ftypes = {f.name: f.type for f in fields(RunConfig)}
    t = ftypes[name]
    if name in ("inner", "q_supports", "kernel_name", "constant_source",
                "design", "experiment"):
        return raw
    if name == "n_list":
        try:
            return tuple(int(tok) for tok in raw.replace(";", ",").split(",") if tok.strip())
        except ValueError:
            raise ConfigError(f"n_list must be comma-separated integers, got {raw!r}")
    if name == "equal_h":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"equal_h must be a boolean, got {raw!r}")
    if name in ("c_h", "c_ell", "c_single",
                "h_exponent", "ell_exponent", "single_exponent"):
        return None if raw.lower() in ("auto", "none", "") else float(raw)
    if "int" in str(t):
        return int(raw)
    return float(raw)


def parse_config(path) -> RunConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = RunConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser[section].items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                setattr(cfg, key, _parse_value(key, raw))
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.kernel_order < 2 or cfg.kernel_order % 2:
        raise ConfigError("kernel_order must be an even integer >= 2")
    for name in ("c_h", "c_ell", "c_single", "floor"):
        v = getattr(cfg, name)
        if v is None:
            continue
        if v < 0 or (name != "floor" and v == 0):
            raise ConfigError(f"{name} must be positive")
    if cfg.component_points < 2 or cfg.tensor_points < 2 or cfg.quad_nodes < 2:
        raise ConfigError("grid and quadrature sizes must be >= 2")
    if cfg.constant_source not in ("single_bandwidth", "plug_in"):
        raise ConfigError("constant_source must be single_bandwidth or plug_in")
    if cfg.experiment not in ("theorem1", "theorem2", "coverage", "dimension_bench"):
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    if not 0 < cfg.epsilon < 1:
        raise ConfigError("epsilon must lie in (0, 1)")
    if cfg.reps < 1 or any(n < 1 for n in cfg.n_list):
        raise ConfigError("reps and every n must be >= 1")
    if cfg.experiment == "theorem2" and cfg.h_exponent is not None and cfg.equal_h is False:
        # theorem2 enforces equal bandwidths internally; flag only configs
        # that explicitly disable it
        pass


def plan_kwargs(cfg: RunConfig) -> dict:
    out = {}
    for name in ("c_h", "c_ell", "c_single",
                 "h_exponent", "ell_exponent", "single_exponent"):
        v = getattr(cfg, name)
        if v is not None:
            out[name] = v
    return out


def parse_intervals(raw: str, d: int, what: str):
    """Parse 'lo:hi, lo:hi, ...' into d (lo, hi) pairs, or None for auto."""
    raw = raw.strip()
    if raw.lower() == "auto":
        return None
    parts = [tok for tok in raw.split(",") if tok.strip()]
    if len(parts) == 1 and d > 1:
        parts = parts * d
    if len(parts) != d:
        raise ConfigError(f"{what} needs {d} intervals, got {len(parts)}")
    out = []
    for tok in parts:
        try:
            lo, hi = (float(v) for v in tok.split(":"))
        except ValueError:
            raise ConfigError(f"{what} intervals must look like lo:hi, got {tok!r}")
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ConfigError(f"{what} interval {tok!r} is not a proper interval")
        out.append((lo, hi))
    return tuple(out)


def render_config(cfg: RunConfig) -> str:
    parser = configparser.ConfigParser()
    for section, names in _SECTIONS.items():
        parser[section] = {}
        for name in names:
            v = getattr(cfg, name)
            if v is None:
                v = "auto"
            elif isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            parser[section][name] = str(v)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
