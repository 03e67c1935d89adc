"""Shared checks for the market-level criteria (xi* Gaussianity, collapse)."""

from scipy.stats import norm

from gammamix.estimate import (
    DEFAULT_FIGURE_TAUS,
    collapse_agreement,
    collapse_series,
    estimate_all_days,
    fit_gamma_mle,
    ks_statistic,
    pooled_returns,
    xi_star_series,
)


def xi_star_pvalues(days, series, taus=DEFAULT_FIGURE_TAUS):
    """KS p-value of pooled xi* against N(0,1) per tau, using the true betas."""
    pairs = [(s, d.true_beta) for s, d in zip(series, days)]
    return {tau: ks_statistic(xi_star_series(pairs, tau), norm.cdf).p_value for tau in taus}


def market_collapse(series, taus=DEFAULT_FIGURE_TAUS):
    """Collapse agreement for one market, normalized with its own gamma fit."""
    betas, _ = estimate_all_days(series)
    fit = fit_gamma_mle(betas)
    col = collapse_series({tau: pooled_returns(series, tau) for tau in taus}, fit)
    return collapse_agreement(col), fit
