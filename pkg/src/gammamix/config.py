"""Flat ``key = value`` run configuration with command-line overrides."""

from __future__ import annotations

import datetime as dt
import os
from dataclasses import dataclass, fields
from typing import List, Optional, Tuple

from .dist_core import STOCK_PARAMS
from .estimate import DEFAULT_FIGURE_TAUS, DEFAULT_TAU_SET

FORMAT_VERSION = "1"


class ConfigError(ValueError):
    pass


def _ints(text) -> Tuple[int, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _strs(text) -> Tuple[str, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(str(v) for v in text)
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _opt_float(text):
    if text is None or (isinstance(text, str) and text.strip().lower() in ("", "none")):
        return None
    return float(text)


_CONVERTERS = {
    "stock": str,
    "a": _opt_float,
    "b": _opt_float,
    "days": int,
    "events_per_day": int,
    "initial_price": float,
    "spread_ticks": int,
    "tick_size": float,
    "seed": int,
    "slow_vol_phi": _opt_float,
    "slow_vol_amplitude": _opt_float,
    "label": str,
    "start_date": dt.date.fromisoformat,
    "open_time": dt.time.fromisoformat,
    "quotes": _strs,
    "labels": _strs,
    "tau_set": _ints,
    "figure_taus": _ints,
    "collapse_tau": int,
    "datasets": _strs,
    "write_midpoints": _bool,
    "render": _bool,
    "image_format": str,
    "out": str,
    "format_version": str,
}


@dataclass
class RunConfig:
    # simulate
    stock: str = "AZN"
    a: Optional[float] = None
    b: Optional[float] = None
    days: int = 675
    events_per_day: int = 1425
    initial_price: float = 100.0
    spread_ticks: int = 1
    tick_size: float = 0.25
    seed: int = 20000502
    slow_vol_phi: Optional[float] = None
    slow_vol_amplitude: Optional[float] = None
    label: str = ""
    start_date: dt.date = dt.date(2000, 5, 2)
    open_time: dt.time = dt.time(8, 0)
    # estimate
    quotes: Tuple[str, ...] = ()
    labels: Tuple[str, ...] = ()
    tau_set: Tuple[int, ...] = DEFAULT_TAU_SET
    write_midpoints: bool = False
    # figures
    figure_taus: Tuple[int, ...] = DEFAULT_FIGURE_TAUS
    collapse_tau: int = 80
    datasets: Tuple[str, ...] = ()
    render: bool = False
    image_format: str = "svg"
    # common
    out: str = "out"
    format_version: str = FORMAT_VERSION

    def validate(self) -> "RunConfig":
        for name in ("tau_set", "figure_taus"):
            taus = getattr(self, name)
            if not taus or taus[0] < 1 or any(b <= a for a, b in zip(taus, taus[1:])):
                raise ConfigError(f"{name} must be strictly increasing positive integers: {taus}")
        if self.collapse_tau < 1:
            raise ConfigError("collapse_tau must be >= 1")
        if self.days < 1:
            raise ConfigError("days must be >= 1")
        if self.events_per_day < 2:
            raise ConfigError("events_per_day must be >= 2")
        if self.a is None and self.b is None and self.stock not in STOCK_PARAMS:
            raise ConfigError(f"unknown stock {self.stock!r}; choose one of {sorted(STOCK_PARAMS)} or set a and b")
        if (self.a is None) != (self.b is None):
            raise ConfigError("set both a and b, or neither")
        if self.labels and len(self.labels) != len(self.quotes):
            raise ConfigError("labels must match quotes one to one")
        if self.image_format not in ("svg", "pdf", "png"):
            raise ConfigError(f"unsupported image_format {self.image_format!r}")
        return self

    def header_lines(self) -> List[str]:
        return [f"{f.name} = {_format(getattr(self, f.name))}" for f in fields(self)]


def _format(v):
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    if isinstance(v, (dt.date, dt.time)):
        return v.isoformat()
    return "" if v is None else str(v)


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    return out


def build_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Config from defaults, then the file at ``path``, then ``overrides``."""
    raw = {}
    if path is not None:
        with open(path) as fh:
            raw.update(parse_config_text(fh.read()))
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    values = {}
    for key, value in raw.items():
        conv = _CONVERTERS.get(key)
        if conv is None:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[key] = conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    return RunConfig(**values).validate()


def resolve_inputs(paths) -> List[str]:
    """Absolute paths for input files, failing early on any missing one."""
    out = []
    for p in paths:
        if not os.path.isfile(p):
            raise FileNotFoundError(f"input file not found: {p}")
        out.append(os.path.abspath(p))
    return out
