"""Synthetic markets in midpoint time.

Each day draws one beta from the gamma law and then ``events_per_day``
single-tick returns ``xi_t / sqrt(beta)``. Prices carry over from one day's
close to the next day's open; there are no overnight gaps.

Every day owns a random stream derived from ``(seed, day_index)`` so days can
be generated in any order, or in parallel, with identical results.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from ._io import atomic_write
from .dist_core import GammaParams, STOCK_PARAMS, sample_beta
from .ingest import QuoteEvent

__all__ = [
    "SlowVol",
    "SynthConfig",
    "SynthDay",
    "day_rng",
    "simulate_day_returns",
    "simulate_slow_vol_day",
    "simulate_market",
    "render_quotes",
    "trading_dates",
    "write_quotes_csv",
    "write_truth_csv",
]

# Stream ids spawned from each day's seed sequence.
_STREAM_BETA, _STREAM_XI, _STREAM_VOL = 0, 1, 2


@dataclass(frozen=True)
class SlowVol:
    """AR(1) wander of log sigma_t around the day's level.

    ``amplitude`` is the stationary standard deviation of the log-volatility
    offset; each step's innovation has scale ``amplitude * sqrt(1 - phi**2)``.
    """

    phi: float
    amplitude: float

    def __post_init__(self):
        if not 0.0 <= self.phi < 1.0:
            raise ValueError("slow_vol.phi must lie in [0, 1)")
        if not self.amplitude >= 0.0:
            raise ValueError("slow_vol.amplitude must be >= 0")


@dataclass(frozen=True)
class SynthConfig:
    params: GammaParams = STOCK_PARAMS["AZN"]
    days: int = 675
    events_per_day: int = 1425
    initial_price: float = 100.0
    spread_ticks: int = 1
    tick_size: float = 0.25
    seed: int = 20000502
    slow_vol: Optional[SlowVol] = None
    start_date: dt.date = dt.date(2000, 5, 2)
    open_time: dt.time = dt.time(8, 0)
    session_minutes: float = 510.0

    def __post_init__(self):
        if self.days < 1:
            raise ValueError("days must be >= 1")
        if self.events_per_day < 2:
            raise ValueError("events_per_day must be >= 2")
        if not self.initial_price > 0:
            raise ValueError("initial_price must be > 0")
        if self.spread_ticks < 0:
            raise ValueError("spread_ticks must be >= 0")
        if not self.tick_size > 0:
            raise ValueError("tick_size must be > 0")
        if not self.session_minutes > 30:
            raise ValueError("session_minutes must exceed the 30 minute truncation")

    @property
    def half_spread(self) -> float:
        return 0.5 * self.spread_ticks * self.tick_size


@dataclass
class SynthDay:
    """One simulated day.

    ``mid_prices`` are the exact midpoints that :func:`render_quotes` emits;
    ``log_prices`` is their log and ``returns`` its first difference, so all
    three agree bit for bit with what ingestion reconstructs.
    """

    day_index: int
    date: dt.date
    true_beta: float
    returns: np.ndarray
    log_prices: np.ndarray
    mid_prices: np.ndarray = field(repr=False)


def day_rng(seed: int, day_index: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(day_index, stream))
    return np.random.default_rng(ss)


def trading_dates(start: dt.date, n: int) -> list:
    """The first ``n`` weekdays on or after ``start``."""
    out = []
    d = start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def _day_beta(cfg: SynthConfig, day_index: int) -> float:
    return float(sample_beta(cfg.params, day_rng(cfg.seed, day_index, _STREAM_BETA)))


def simulate_day_returns(cfg: SynthConfig, day_index: int, day_beta: Optional[float] = None):
    """Raw single-tick returns for one day, and the beta they were drawn with."""
    beta = _day_beta(cfg, day_index) if day_beta is None else float(day_beta)
    xi = day_rng(cfg.seed, day_index, _STREAM_XI).standard_normal(cfg.events_per_day)
    sigma = 1.0 / math.sqrt(beta)
    if cfg.slow_vol is None:
        return beta, sigma * xi
    return beta, _slow_vol_sigma(cfg, day_index, sigma) * xi


def _slow_vol_sigma(cfg: SynthConfig, day_index: int, sigma: float) -> np.ndarray:
    phi, amp = cfg.slow_vol.phi, cfg.slow_vol.amplitude
    n = cfg.events_per_day
    if amp == 0.0:
        return np.full(n, sigma)
    eta = day_rng(cfg.seed, day_index, _STREAM_VOL).standard_normal(n)
    innov = amp * math.sqrt(1.0 - phi * phi)
    h = np.empty(n)
    # stationary start so the wander has no intraday trend
    h[0] = amp * eta[0]
    for t in range(1, n):
        h[t] = phi * h[t - 1] + innov * eta[t]
    return sigma * np.exp(h)


def _canonical_day(cfg, day_index, date, beta, raw_returns, open_log_price):
    log_path = open_log_price + np.concatenate(([0.0], np.cumsum(raw_returns)))
    mids = np.exp(log_path)
    log_prices = np.log(mids)
    return SynthDay(
        day_index=day_index,
        date=date,
        true_beta=beta,
        returns=np.diff(log_prices),
        log_prices=log_prices,
        mid_prices=mids,
    )


def simulate_slow_vol_day(cfg: SynthConfig, day_beta: float, day_index: int = 0,
                          open_price: Optional[float] = None) -> SynthDay:
    """Simulate one day with intraday log-volatility following an AR(1).

    With ``amplitude == 0`` the result equals the constant-volatility day
    drawn from the same seed.
    """
    if cfg.slow_vol is None:
        raise ValueError("simulate_slow_vol_day needs cfg.slow_vol")
    beta, raw = simulate_day_returns(cfg, day_index, day_beta)
    date = trading_dates(cfg.start_date, day_index + 1)[-1]
    price = cfg.initial_price if open_price is None else open_price
    return _canonical_day(cfg, day_index, date, beta, raw, math.log(price))


def simulate_market(cfg: SynthConfig) -> list:
    """Simulate ``cfg.days`` consecutive days of midpoint-time returns."""
    dates = trading_dates(cfg.start_date, cfg.days)
    days = []
    open_log = math.log(cfg.initial_price)
    for i, date in enumerate(dates):
        beta, raw = simulate_day_returns(cfg, i)
        day = _canonical_day(cfg, i, date, beta, raw, open_log)
        days.append(day)
        open_log = float(day.log_prices[-1])
    return days


def _quotes_for_mid(mid: float, half: float):
    # Nudge bid and ask by a few ulps until (bid + ask) / 2 is exactly mid.
    # Nudging ask alone can cycle forever when rounding ties straddle a binade.
    target = 2.0 * mid
    bid0, ask0 = mid - half, mid + half
    bid = bid0
    for _ in range(8):
        ask = ask0
        for _ in range(8):
            s = bid + ask
            if s == target:
                return bid, ask
            ask = math.nextafter(ask, math.inf if s < target else -math.inf)
        bid = math.nextafter(bid, -math.inf)
    raise ArithmeticError(f"no quote pair with midpoint exactly {mid!r}")


def render_quotes(day: SynthDay, cfg: SynthConfig) -> Iterator[QuoteEvent]:
    """Quote events whose midpoints reproduce ``day.mid_prices`` exactly.

    Events are spread evenly over the part of the session that survives the
    30 minute opening truncation, so ingestion keeps every one of them.
    """
    start = dt.datetime.combine(day.date, cfg.open_time) + dt.timedelta(minutes=30)
    span = dt.timedelta(minutes=cfg.session_minutes - 30)
    n = len(day.mid_prices)
    step = span / n
    if step <= dt.timedelta(0):
        raise ValueError("too many events for the session length")
    half = cfg.half_spread
    for i, mid in enumerate(day.mid_prices.tolist()):
        if half == 0.0:
            bid = ask = mid
        else:
            if mid - half <= 0.0:
                raise ValueError(f"spread too wide for midpoint {mid!r}")
            bid, ask = _quotes_for_mid(mid, half)
        yield QuoteEvent(start + i * step, bid, ask)


def write_quotes_csv(path, days: Iterable[SynthDay], cfg: SynthConfig) -> int:
    """Write all days as ``timestamp,bid,ask`` rows; returns the row count."""
    rows = 0
    with atomic_write(path) as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "bid", "ask"])
        for day in days:
            for ev in render_quotes(day, cfg):
                w.writerow([ev.timestamp.isoformat(), repr(ev.bid), repr(ev.ask)])
                rows += 1
    return rows


def write_truth_csv(path, days: Sequence[SynthDay]) -> None:
    with atomic_write(path) as fh:
        w = csv.writer(fh)
        w.writerow(["day_index", "true_beta"])
        for day in days:
            w.writerow([day.day_index, repr(day.true_beta)])
