"""Command line: ``simulate``, ``estimate`` and ``figures``.

Exit codes: 0 success, 2 usage, 3 I/O or missing upstream file, 4 bad data,
5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

from . import __version__
from ._io import atomic_write
from .config import ConfigError, RunConfig, build_config, resolve_inputs
from .dist_core import STOCK_PARAMS, GammaParams, QuadratureError
from .estimate import ConvergenceError, DailyBeta, estimate_all_days, fit_gamma_mle
from .figures import Dataset, cross_dataset_series, dataset_series, write_series
from .ingest import FormatError, IngestError, build_all_series, parse_quotes, read_returns_csv, returns_at_scale, write_midpoints_csv, write_returns_csv
from .synth import SlowVol, SynthConfig, simulate_market, write_quotes_csv, write_truth_csv

log = logging.getLogger("gammamix")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4, 5


class DataError(Exception):
    """Input data could not support the requested computation."""


class DependencyError(OSError):
    """An upstream artifact the command needs is missing."""


def _params(cfg: RunConfig) -> GammaParams:
    if cfg.a is not None:
        return GammaParams(cfg.a, cfg.b)
    return STOCK_PARAMS[cfg.stock]


def _label(cfg: RunConfig) -> str:
    if cfg.label:
        return cfg.label
    return cfg.stock if cfg.a is None else "custom"


def synth_config(cfg: RunConfig) -> SynthConfig:
    slow = None
    if cfg.slow_vol_amplitude is not None:
        slow = SlowVol(cfg.slow_vol_phi if cfg.slow_vol_phi is not None else 0.99, cfg.slow_vol_amplitude)
    return SynthConfig(
        params=_params(cfg),
        days=cfg.days,
        events_per_day=cfg.events_per_day,
        initial_price=cfg.initial_price,
        spread_ticks=cfg.spread_ticks,
        tick_size=cfg.tick_size,
        seed=cfg.seed,
        slow_vol=slow,
        start_date=cfg.start_date,
        open_time=cfg.open_time,
    )


def cmd_simulate(cfg: RunConfig) -> dict:
    """Write ``<out>/<label>/quotes.csv`` and the ``truth.csv`` sidecar."""
    scfg = synth_config(cfg)
    label = _label(cfg)
    outdir = os.path.join(cfg.out, label)
    os.makedirs(outdir, exist_ok=True)
    days = simulate_market(scfg)
    quotes = os.path.join(outdir, "quotes.csv")
    truth = os.path.join(outdir, "truth.csv")
    rows = write_quotes_csv(quotes, days, scfg)
    write_truth_csv(truth, days)
    summary = {
        "label": label,
        "days": scfg.days,
        "events_per_day": scfg.events_per_day,
        "quote_rows": rows,
        "seed": scfg.seed,
        "a": scfg.params.a,
        "b": scfg.params.b,
        "quotes": quotes,
        "truth": truth,
    }
    print(f"simulated {label}: {scfg.days} days x {scfg.events_per_day} events, "
          f"{rows} quote rows, seed {scfg.seed} -> {outdir}")
    return summary


def _dataset_labels(cfg: RunConfig, paths: Sequence[str]) -> List[str]:
    if cfg.labels:
        return list(cfg.labels)
    labels = []
    for p in paths:
        parent = os.path.basename(os.path.dirname(p))
        stem = os.path.splitext(os.path.basename(p))[0]
        labels.append(parent if stem == "quotes" and parent else stem)
    if len(set(labels)) != len(labels):
        raise ConfigError(f"dataset labels collide: {labels}; set labels explicitly")
    return labels


def cmd_estimate(cfg: RunConfig) -> List[dict]:
    """Ingest each quote file, fit gamma(a, b) to daily betas, write reports."""
    if not cfg.quotes:
        raise ConfigError("estimate needs at least one quotes file (quotes = path[,path...])")
    paths = resolve_inputs(cfg.quotes)
    labels = _dataset_labels(cfg, cfg.quotes)
    reports = []
    for label, path in zip(labels, paths):
        outdir = os.path.join(cfg.out, label)
        os.makedirs(outdir, exist_ok=True)
        parsed = parse_quotes(path)
        series = build_all_series(parsed.events, cfg.open_time)
        betas, skipped = estimate_all_days(series, cfg.tau_set)
        if not betas:
            raise DataError(f"{path}: all {len(series)} days rejected")
        if len(betas) < 10:
            raise DataError(f"{path}: {len(betas)} usable days; the gamma fit needs at least 10")
        fit = fit_gamma_mle(betas)
        report = fit.report()
        report.update(
            label=label,
            source=path,
            days_in_input=len(series),
            days_rejected=len(skipped),
            tau_set=list(cfg.tau_set),
            quote_rows=parsed.report.rows,
            quote_rows_rejected=dict(parsed.report.counts),
            version=__version__,
            format_version=cfg.format_version,
        )
        with atomic_write(os.path.join(outdir, "fit.json"), newline=None) as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with atomic_write(os.path.join(outdir, "daily_beta.csv")) as fh:
            w = csv.writer(fh)
            w.writerow(["day", "beta_hat", "ticks"])
            for d in betas:
                w.writerow([d.day.isoformat(), repr(d.beta_hat), d.ticks])
        with atomic_write(os.path.join(outdir, "skipped_days.csv")) as fh:
            w = csv.writer(fh)
            w.writerow(["day", "reason"])
            for s in skipped:
                w.writerow([s.day.isoformat(), s.reason])
        kept = {d.day for d in betas}
        preamble = [f"gammamix {__version__}", f"label: {label}", f"source: {path}"]
        write_returns_csv(
            os.path.join(outdir, "returns.csv"),
            (returns_at_scale(s, tau) for tau in cfg.figure_taus for s in series if s.day in kept),
            preamble,
        )
        if cfg.write_midpoints:
            write_midpoints_csv(os.path.join(outdir, "midpoints.csv"), series, preamble)
        print(f"{label}: a={fit.params.a:.4g} b={fit.params.b:.4g} from {fit.n} days "
              f"({len(skipped)} rejected); {parsed.report.summary()}")
        reports.append(report)
    return reports


def _require(path):
    if not os.path.isfile(path):
        raise DependencyError(f"missing upstream artifact: {path}")
    return path


def load_dataset(outdir: str, label: str) -> Dataset:
    base = os.path.join(outdir, label)
    with open(_require(os.path.join(base, "fit.json"))) as fh:
        fit = json.load(fh)
    betas = []
    with open(_require(os.path.join(base, "daily_beta.csv")), newline="") as fh:
        for row in csv.DictReader(fh):
            betas.append(DailyBeta(dt.date.fromisoformat(row["day"]), float(row["beta_hat"]), int(row["ticks"])))
    returns = read_returns_csv(_require(os.path.join(base, "returns.csv")))
    return Dataset(label, GammaParams(fit["a"], fit["b"]), betas, returns)


def _discover(outdir: str) -> List[str]:
    if not os.path.isdir(outdir):
        raise DependencyError(f"missing output directory: {outdir}")
    return sorted(d for d in os.listdir(outdir) if os.path.isfile(os.path.join(outdir, d, "fit.json")))


def cmd_figures(cfg: RunConfig) -> List[str]:
    """Write figure series CSVs, and optionally vector renderings, to ``<out>/figures``."""
    labels = list(cfg.datasets) or _discover(cfg.out)
    if not labels:
        raise DependencyError(f"no estimated datasets (fit.json) under {cfg.out}")
    datasets = [load_dataset(cfg.out, lab) for lab in labels]
    figdir = os.path.join(cfg.out, "figures")
    extra = {"format_version": cfg.format_version}
    written = []
    qq_all = []
    for ds in datasets:
        series = dataset_series(ds, cfg.figure_taus, gauss_tau=cfg.collapse_tau)
        for s in series:
            written.append(write_series(figdir, s, extra))
        qq_all += [s for s in series if s.name == "qq"]
        if cfg.render:
            from .plotting import render_dataset

            written.append(render_dataset(series, os.path.join(figdir, f"fig1_{ds.label}.{cfg.image_format}")))
    collapse = cross_dataset_series(datasets, cfg.collapse_tau)
    for s in collapse:
        written.append(write_series(figdir, s, extra))
    if cfg.render:
        from .plotting import render_cross

        written.append(render_cross(qq_all, collapse, os.path.join(figdir, f"fig2.{cfg.image_format}")))
    with atomic_write(os.path.join(figdir, "manifest.json"), newline=None) as fh:
        json.dump({"version": __version__, "datasets": labels,
                   "files": sorted(os.path.basename(p) for p in written)}, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(written)} figure files for {', '.join(labels)} -> {figdir}")
    return written


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "figures": cmd_figures}


def _parse_set(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gammamix", description=__doc__.splitlines()[0].replace("``", ""))
    parser.add_argument("--version", action="version", version=f"gammamix {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=COMMANDS[name].__doc__.splitlines()[0].replace("``", ""))
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        if name == "simulate":
            p.add_argument("--stock", choices=sorted(STOCK_PARAMS))
            p.add_argument("--days", type=int)
            p.add_argument("--events-per-day", type=int, dest="events_per_day")
            p.add_argument("--label")
        elif name == "estimate":
            p.add_argument("quotes", nargs="*", help="quote CSV files")
        else:
            p.add_argument("--render", action="store_const", const=True, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = _parse_set(args.set)
        for key in ("seed", "out", "stock", "days", "events_per_day", "label", "render"):
            v = getattr(args, key, None)
            if v is not None:
                overrides[key] = v
        if getattr(args, "quotes", None):
            overrides["quotes"] = tuple(args.quotes)
        if args.config is not None and not os.path.isfile(args.config):
            raise FileNotFoundError(f"config file not found: {args.config}")
        cfg = build_config(args.config, overrides)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, IngestError, DataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, QuadratureError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
