"""Figure data: beta density, xi* and r* densities, |r*| ccdfs, Q-Q, collapse.

Every series is a table of ``x,y,n`` rows. Files open with ``#`` comment
lines naming the series, the fitted parameters and the package version.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import norm

from . import __version__
from ._io import atomic_write
from .dist_core import GammaParams, StudentLaw, collapse_curve, gamma_pdf, normalize_r, student_ccdf_abs, student_pdf
from .estimate import (
    DEFAULT_COLLAPSE_EDGES,
    DailyBeta,
    collapse_series,
    empirical_ccdf_abs,
    empirical_density,
    qq_points,
)

log = logging.getLogger(__name__)

__all__ = ["Series", "Dataset", "dataset_series", "cross_dataset_series", "write_series", "read_series"]

CCDF_MAX_POINTS = 2000


@dataclass
class Series:
    name: str
    figure: str
    x: np.ndarray
    y: np.ndarray
    n: int
    meta: Dict[str, str] = field(default_factory=dict)
    columns: Sequence[str] = ("x", "y", "n")


@dataclass
class Dataset:
    """Everything the figures need from one estimated stock."""

    label: str
    params: GammaParams
    betas: List[DailyBeta]
    returns: Mapping[int, Mapping[dt.date, np.ndarray]]


def _thin_ccdf(dist, max_points=CCDF_MAX_POINTS):
    if dist.n <= max_points:
        return dist.x, dist.y
    idx = np.unique(np.geomspace(1, dist.n, max_points).astype(int) - 1)
    return dist.x[idx], dist.y[idx]


def _pooled(ds: Dataset, tau: int) -> np.ndarray:
    parts = [np.asarray(v) for _, v in sorted(ds.returns.get(tau, {}).items())]
    return np.concatenate(parts) if parts else np.empty(0)


def dataset_series(ds: Dataset, taus: Sequence[int], gauss_tau: int = 80) -> List[Series]:
    """Series for the single-stock panels: beta density, xi*, r* density, ccdf."""
    a, b = ds.params.a, ds.params.b
    meta = {"label": ds.label, "a": repr(a), "b": repr(b)}
    out = []

    beta_vals = np.array([d.beta_hat for d in ds.betas])
    bins = max(5, min(30, len(beta_vals) // 10))
    if len(beta_vals) >= 100:
        hist = empirical_density(beta_vals, bins=bins)
        out.append(Series("beta_density", "1a", hist.x, hist.y, hist.n, meta))
    else:
        log.warning("%s: %d daily betas, too few for a density", ds.label, len(beta_vals))
    grid = np.linspace(max(beta_vals.min(), 1e-12) * 0.5, beta_vals.max() * 1.2, 400) if beta_vals.size else np.empty(0)
    if grid.size:
        out.append(Series("gamma_fit", "1a", grid, np.asarray(gamma_pdf(grid, ds.params)), len(beta_vals), meta))

    beta_by_day = {d.day: d.beta_hat for d in ds.betas}
    xi_edges = np.linspace(-6.0, 6.0, 49)
    rstar_grid = np.linspace(-10.0, 10.0, 401)
    for tau in taus:
        by_day = ds.returns.get(tau, {})
        xi = [np.asarray(r) * math.sqrt(beta_by_day[d] / tau) for d, r in sorted(by_day.items()) if d in beta_by_day]
        xi = np.concatenate(xi) if xi else np.empty(0)
        r = _pooled(ds, tau)
        if r.size < 100:
            log.warning("%s: tau=%d has %d returns; omitted", ds.label, tau, r.size)
            continue
        tmeta = dict(meta, tau=str(tau))
        if xi.size >= 100:
            h = empirical_density(xi, edges=xi_edges)
            out.append(Series(f"xi_density_tau{tau}", "1b", h.x, h.y, h.n, tmeta))
        rs = np.asarray(normalize_r(r, b, tau))
        h = empirical_density(rs, edges=np.linspace(-10.0, 10.0, 81))
        out.append(Series(f"rstar_density_tau{tau}", "1c", h.x, h.y, h.n, tmeta))
        cc = empirical_ccdf_abs(rs)
        cx, cy = _thin_ccdf(cc)
        out.append(Series(f"rstar_ccdf_tau{tau}", "1d", cx, cy, cc.n, tmeta))
        if tau == gauss_tau:
            # Gaussian with the sample variance, for contrast with the Student law
            s2 = float(np.var(rs))
            g = np.exp(-rstar_grid**2 / (2 * s2)) / math.sqrt(2 * math.pi * s2)
            out.append(Series(f"gauss_density_tau{tau}", "1c", rstar_grid, g, rs.size, tmeta))
            gx = np.geomspace(1e-2, 1e2, 200)
            out.append(Series(f"gauss_ccdf_tau{tau}", "1d", gx, 2 * norm.sf(gx / math.sqrt(s2)), rs.size, tmeta))

    out.append(Series("normal_density", "1b", np.linspace(-6, 6, 241), norm.pdf(np.linspace(-6, 6, 241)), 0, meta))
    # The law in r* units does not depend on tau; evaluate it at tau = 1.
    law1 = StudentLaw(ds.params, 1)
    sc = law1.scale
    out.append(Series("student_density", "1c", rstar_grid, np.asarray(student_pdf(rstar_grid * sc, law1)) * sc, 0, meta))
    cgrid = np.geomspace(1e-2, 1e2, 200)
    out.append(Series("student_ccdf", "1d", cgrid, np.asarray(student_ccdf_abs(cgrid * sc, law1)), 0, meta))

    if len(beta_vals) >= 10:
        qq = qq_points(ds.params, ds.betas)
        out.append(Series("qq", "2a", qq[:, 0], qq[:, 1], len(beta_vals), meta, columns=("q_fit", "q_emp")))
    return out


def cross_dataset_series(datasets: Sequence[Dataset], tau: int = 80) -> List[Series]:
    """Normalized densities P*(r*) at one tau for every dataset, plus the curve."""
    out = []
    for ds in datasets:
        r = _pooled(ds, tau)
        col = collapse_series({tau: r}, ds.params, edges=DEFAULT_COLLAPSE_EDGES)
        if tau not in col:
            log.warning("%s: tau=%d has %d returns; omitted from collapse", ds.label, tau, r.size)
            continue
        d = col[tau]
        keep = d.counts > 0
        meta = {"label": ds.label, "a": repr(ds.params.a), "b": repr(ds.params.b), "tau": str(tau)}
        out.append(Series(f"collapse_{ds.label}", "2b", d.x[keep], d.y[keep], d.n, meta))
    grid = np.linspace(-8, 8, 321)
    out.append(Series("collapse_curve", "2b", grid, np.asarray(collapse_curve(grid)), 0, {"tau": str(tau)}))
    return out


def _header(series: Series, extra: Mapping[str, str]) -> List[str]:
    lines = [f"gammamix {__version__}", f"series: {series.name}", f"figure: {series.figure}"]
    lines += [f"{k}: {v}" for k, v in series.meta.items()]
    lines += [f"{k}: {v}" for k, v in extra.items()]
    return lines


def write_series(directory, series: Series, extra: Optional[Mapping[str, str]] = None) -> str:
    """Write ``series`` atomically as ``fig<figure>_<name>.csv``; returns the path."""
    os.makedirs(directory, exist_ok=True)
    label = series.meta.get("label")
    stem = f"fig{series.figure}_{series.name}" + (f"_{label}" if label and not series.name.endswith(label) else "")
    path = os.path.join(directory, stem + ".csv")
    with atomic_write(path) as fh:
        for line in _header(series, extra or {}):
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(series.columns)
        if len(series.columns) == 2:
            for x, y in zip(series.x.tolist(), series.y.tolist()):
                w.writerow([repr(x), repr(y)])
        else:
            for x, y in zip(series.x.tolist(), series.y.tolist()):
                w.writerow([repr(x), repr(y), series.n])
    return path


def read_series(path) -> Series:
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition(": ")
            meta[k] = v
        else:
            body.append(line)
    rows = list(csv.reader(body))
    cols = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(cols))
    n = int(data[0, 2]) if len(cols) == 3 and len(data) else 0
    return Series(meta.get("series", ""), meta.get("figure", ""), data[:, 0], data[:, 1], n, meta, tuple(cols))
