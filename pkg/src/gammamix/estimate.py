"""Daily beta estimation, gamma MLE, empirical distributions and collapse.

Per-day beta is the inverse of a multi-scale realized variance: for each
``tau`` the sample variance of nonoverlapping ``tau``-returns divided by
``tau``, averaged with weights equal to the number of returns.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .dist_core import GammaParams, gamma_ppf, normalize_p, normalize_xi
from .ingest import MidpointSeries, returns_at_scale
from .special import digamma, lgamma, trigamma

__all__ = [
    "DEFAULT_TAU_SET",
    "DEFAULT_FIGURE_TAUS",
    "DEFAULT_QQ_LEVELS",
    "DayRejected",
    "ShortDayError",
    "DegenerateDayError",
    "ConvergenceError",
    "BinningError",
    "DailyBeta",
    "SkippedDay",
    "GammaFit",
    "EmpiricalDistribution",
    "KSResult",
    "estimate_daily_beta",
    "estimate_all_days",
    "fit_gamma_mle",
    "empirical_density",
    "empirical_ccdf_abs",
    "qq_points",
    "dkw_epsilon",
    "kolmogorov_sf",
    "ks_statistic",
    "collapse_series",
    "CollapseAgreement",
    "collapse_agreement",
    "pooled_returns",
    "xi_star_series",
]

DEFAULT_TAU_SET = (1, 2, 4, 8, 16, 32, 64)
DEFAULT_FIGURE_TAUS = (10, 20, 40, 80, 160, 320, 640)
DEFAULT_QQ_LEVELS = tuple(round(0.01 * k, 2) for k in range(1, 100))

MAX_NEWTON_ITER = 200
NEWTON_TOL = 1e-10
# log(mean) - mean(log) below this means the sample is numerically constant
_MIN_SPREAD = 1e-13


class DayRejected(ValueError):
    def __init__(self, day, reason):
        super().__init__(f"{day}: {reason}")
        self.day = day
        self.reason = reason


class ShortDayError(DayRejected):
    pass


class DegenerateDayError(DayRejected):
    pass


class ConvergenceError(ArithmeticError):
    def __init__(self, message, last_iterate, iterations):
        super().__init__(f"{message} (last a = {last_iterate!r} after {iterations} iterations)")
        self.last_iterate = last_iterate
        self.iterations = iterations


class BinningError(ValueError):
    pass


@dataclass(frozen=True)
class DailyBeta:
    day: dt.date
    beta_hat: float
    ticks: int


class SkippedDay(NamedTuple):
    day: dt.date
    reason: str


def estimate_daily_beta(series: MidpointSeries, tau_set: Sequence[int] = DEFAULT_TAU_SET) -> DailyBeta:
    """Inverse multi-scale realized variance of one day.

    Raises :class:`ShortDayError` when the day has fewer than
    ``2 * max(tau_set)`` ticks and :class:`DegenerateDayError` when the
    returns have no spread.
    """
    tau_set = sorted(set(int(t) for t in tau_set))
    if not tau_set or tau_set[0] < 1:
        raise ValueError("tau_set must hold positive integers")
    need = 2 * tau_set[-1]
    if series.ticks < need:
        raise ShortDayError(series.day, f"{series.ticks} ticks < {need}")
    num = 0.0
    den = 0
    mean_sq = 0.0
    for tau in tau_set:
        r = returns_at_scale(series, tau).returns
        n = len(r)
        num += n * float(np.var(r, ddof=1)) / tau
        mean_sq += n * float(np.mean(r * r)) / tau
        den += n
    var = num / den
    if not var > _MIN_SPREAD * (mean_sq / den):
        raise DegenerateDayError(series.day, "returns have zero variance")
    return DailyBeta(series.day, 1.0 / var, series.ticks)


def estimate_all_days(series: Iterable[MidpointSeries], tau_set: Sequence[int] = DEFAULT_TAU_SET
                      ) -> Tuple[List[DailyBeta], List[SkippedDay]]:
    betas, skipped = [], []
    for s in series:
        try:
            betas.append(estimate_daily_beta(s, tau_set))
        except DayRejected as exc:
            skipped.append(SkippedDay(exc.day, exc.reason))
    return betas, skipped


@dataclass(frozen=True)
class GammaFit:
    params: GammaParams
    n: int
    loglik: float
    iterations: int

    def report(self) -> dict:
        return {
            "a": self.params.a,
            "b": self.params.b,
            "n_days": self.n,
            "loglik": self.loglik,
            "iterations": self.iterations,
        }


def _beta_values(betas) -> np.ndarray:
    vals = np.array([b.beta_hat if isinstance(b, DailyBeta) else b for b in betas], dtype=float)
    return vals


def gamma_loglik(values: np.ndarray, p: GammaParams) -> float:
    n = len(values)
    return float(
        n * (p.a * math.log(p.b) - lgamma(p.a))
        + (p.a - 1.0) * np.sum(np.log(values))
        - p.b * np.sum(values)
    )


def fit_gamma_mle(betas) -> GammaFit:
    """Maximum-likelihood gamma(a, rate b) fit to daily betas.

    Solves log(a) - digamma(a) = log(mean) - mean(log) by Newton's method
    from the moment estimate; then b = a / mean.
    """
    x = _beta_values(betas)
    if len(x) < 10:
        raise ValueError(f"need at least 10 betas, got {len(x)}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("betas must be finite and > 0")
    mean = float(np.mean(x))
    spread = math.log(mean) - float(np.mean(np.log(x)))
    var = float(np.var(x))
    a = mean * mean / var if var > 0 else math.inf
    # log(a) - digamma(a) falls strictly from +inf to 0, so a root exists
    # only for a strictly positive spread
    if not spread > _MIN_SPREAD:
        raise ConvergenceError("no finite root: betas are numerically identical, a diverges", a, 0)
    for it in range(1, MAX_NEWTON_ITER + 1):
        g = math.log(a) - float(digamma(a)) - spread
        if abs(g) < NEWTON_TOL:
            break
        dg = 1.0 / a - float(trigamma(a))
        step = g / dg
        new = a - step
        # keep the iterate positive
        a = new if new > 0 else 0.5 * a
    else:
        raise ConvergenceError("Newton iteration did not converge", a, MAX_NEWTON_ITER)
    params = GammaParams(a, a / mean)
    return GammaFit(params, len(x), gamma_loglik(x, params), it)


@dataclass
class EmpiricalDistribution:
    """Binned density or unsigned-return complementary CDF.

    ``x``/``y`` are the plotted points. For densities ``edges`` and
    ``counts`` describe the histogram; for ccdfs ``x`` holds the sorted
    absolute samples and ``y[i]`` is the fraction at least ``x[i]``.
    """

    kind: str
    x: np.ndarray
    y: np.ndarray
    n: int
    binning: str
    edges: Optional[np.ndarray] = None
    counts: Optional[np.ndarray] = None
    yerr: Optional[np.ndarray] = None

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def widths(self):
        return np.diff(self.edges)

    def integral(self) -> float:
        if self.kind != "density":
            raise TypeError("integral is defined for densities")
        return float(np.sum(self.y * self.widths))

    def ccdf(self, x):
        """Exact P(|S| > x) for the sample behind a ccdf distribution."""
        if self.kind != "ccdf":
            raise TypeError("ccdf is defined for ccdf distributions")
        x = np.asarray(x, dtype=float)
        return 1.0 - np.searchsorted(self.x, x, side="right") / self.n


def _log_abs_edges(samples, bins):
    mags = np.abs(samples)
    pos = mags[mags > 0]
    top = float(mags.max())
    if pos.size == 0:
        raise BinningError("log-abs binning needs nonzero samples")
    inner = float(np.quantile(pos, 0.01))
    if inner >= top:
        inner = top / 2.0
    outer = np.geomspace(inner, np.nextafter(top, math.inf), bins + 1)
    return np.concatenate((-outer[::-1], outer))


def empirical_density(samples, bins: int = 50, binning: str = "linear",
                      range: Optional[Tuple[float, float]] = None, edges=None) -> EmpiricalDistribution:
    """Bin-width normalized histogram.

    ``binning="log-abs"`` places ``bins`` geometric bins on each side of zero
    (mirrored), plus one central bin. Densities are normalized by the total
    sample count, so they integrate to one unless ``range``/``edges`` clip
    samples away.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 100:
        raise BinningError(f"need at least 100 samples, got {n}")
    if edges is None:
        if binning == "linear":
            edges = np.histogram_bin_edges(x, bins=bins, range=range)
        elif binning == "log-abs":
            edges = _log_abs_edges(x, bins)
        else:
            raise BinningError(f"unknown binning {binning!r}")
    edges = np.asarray(edges, dtype=float)
    if n < len(edges) - 1:
        raise BinningError(f"{n} samples for {len(edges) - 1} bins")
    counts, edges = np.histogram(x, bins=edges)
    widths = np.diff(edges)
    dens = counts / (n * widths)
    err = np.sqrt(counts * (1.0 - counts / n)) / (n * widths)
    centers = 0.5 * (edges[1:] + edges[:-1])
    return EmpiricalDistribution("density", centers, dens, n, binning, edges, counts, err)


def empirical_ccdf_abs(samples) -> EmpiricalDistribution:
    """Exact step ccdf of |samples| (no binning)."""
    mags = np.sort(np.abs(np.asarray(samples, dtype=float).ravel()))
    n = mags.size
    if n == 0:
        raise ValueError("empty sample")
    y = (n - np.arange(n)) / n
    return EmpiricalDistribution("ccdf", mags, y, n, "exact")


def qq_points(fit: GammaParams, betas, levels: Sequence[float] = DEFAULT_QQ_LEVELS) -> np.ndarray:
    """Pairs (q, empirical CDF at the fitted q-quantile of beta)."""
    if isinstance(fit, GammaFit):
        fit = fit.params
    x = np.sort(_beta_values(betas))
    if x.size < 10:
        raise ValueError("need at least 10 betas")
    q = np.asarray(levels, dtype=float)
    beta_q = np.atleast_1d(gamma_ppf(q, fit))
    emp = np.searchsorted(x, beta_q, side="right") / x.size
    return np.column_stack((q, emp))


def dkw_epsilon(n: int, alpha: float = 0.01) -> float:
    """Half-width of the (1 - alpha) Dvoretzky-Kiefer-Wolfowitz band."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def kolmogorov_sf(lam: float) -> float:
    """P(K > lam) for the Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        # theta-function form converges fast for small lam
        s = sum(math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8 * lam * lam)) for k in range(1, 8))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2 * math.pi) / lam * s))
    s = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * lam * lam)
        s += term if k % 2 else -term
        if term < 1e-300:
            break
    return min(1.0, max(0.0, 2.0 * s))


class KSResult(NamedTuple):
    D: float
    p_value: float
    n: int


def ks_statistic(samples, law_cdf: Callable) -> KSResult:
    """One-sample Kolmogorov-Smirnov test.

    D is exact; the p-value uses the asymptotic Kolmogorov distribution with
    Stephens' finite-n correction of the scaling.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < 10:
        raise ValueError("need at least 10 samples")
    F = np.clip(np.asarray(law_cdf(x), dtype=float), 0.0, 1.0)
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - F)), float(np.max(F - (i - 1) / n)), 0.0)
    rn = math.sqrt(n)
    return KSResult(d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d), n)


def pooled_returns(series: Iterable[MidpointSeries], tau: int) -> np.ndarray:
    parts = [returns_at_scale(s, tau).returns for s in series]
    return np.concatenate(parts) if parts else np.empty(0)


DEFAULT_COLLAPSE_EDGES = np.linspace(-8.0, 8.0, 65)


def collapse_series(returns_by_tau: Mapping[int, np.ndarray], fit: GammaParams,
                    edges=DEFAULT_COLLAPSE_EDGES) -> Dict[int, EmpiricalDistribution]:
    """Empirical densities per tau in normalized (r*, P*) coordinates.

    Samples are scaled to r* = r / sqrt(b tau), histogrammed on shared
    ``edges`` as a density per unit r*, and mapped to
    P* = (Lambda P) ** (1 / (a + 1/2)). ``yerr`` carries the propagated
    binomial error. Taus with fewer than 100 samples are left out.
    """
    if isinstance(fit, GammaFit):
        fit = fit.params
    out = {}
    power = 1.0 / (fit.a + 0.5)
    for tau in sorted(returns_by_tau):
        r = np.asarray(returns_by_tau[tau], dtype=float)
        if r.size < 100:
            continue
        r_star = r / math.sqrt(fit.b * tau)
        dens = empirical_density(r_star, edges=edges)
        p_star = np.asarray(normalize_p(dens.y, fit.a), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(dens.y > 0, dens.yerr / dens.y, 0.0)
        out[tau] = EmpiricalDistribution(
            "density", dens.x, p_star, dens.n, "P*", dens.edges, dens.counts, p_star * power * rel
        )
    return out


class CollapseAgreement(NamedTuple):
    worst_z: float
    worst: Optional[Tuple[int, int, float]]
    comparisons: int
    failures: int


def collapse_agreement(collapsed: Mapping[int, EmpiricalDistribution], min_count: int = 200,
                       z_max: float = 3.0) -> CollapseAgreement:
    """Pairwise comparison of collapsed densities on shared bins.

    For each pair of taus and each bin where both histograms hold at least
    ``min_count`` samples, ``z = |P1* - P2*| / sqrt(err1^2 + err2^2)``.
    ``worst`` is ``(tau1, tau2, bin_center)`` of the largest ``z``.
    """
    taus = sorted(collapsed)
    worst_z, worst, comparisons, failures = 0.0, None, 0, 0
    for i, t1 in enumerate(taus):
        d1 = collapsed[t1]
        for t2 in taus[i + 1:]:
            d2 = collapsed[t2]
            if not np.array_equal(d1.edges, d2.edges):
                raise BinningError("collapsed densities must share bin edges")
            ok = (d1.counts >= min_count) & (d2.counts >= min_count)
            if not ok.any():
                continue
            z = np.abs(d1.y[ok] - d2.y[ok]) / np.hypot(d1.yerr[ok], d2.yerr[ok])
            comparisons += int(ok.sum())
            failures += int((z > z_max).sum())
            k = int(np.argmax(z))
            if z[k] > worst_z:
                worst_z, worst = float(z[k]), (t1, t2, float(d1.x[ok][k]))
    return CollapseAgreement(worst_z, worst, comparisons, failures)


BetaLike = Union[float, DailyBeta]


def xi_star_series(days: Iterable[Tuple[MidpointSeries, BetaLike]], tau: int) -> np.ndarray:
    """Pool r * sqrt(beta_day / tau) over days."""
    parts = []
    for series, beta in days:
        b = beta.beta_hat if isinstance(beta, DailyBeta) else float(beta)
        r = returns_at_scale(series, tau).returns
        if r.size:
            parts.append(np.asarray(normalize_xi(r, tau, b)))
    return np.concatenate(parts) if parts else np.empty(0)
