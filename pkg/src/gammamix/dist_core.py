"""Gamma-mixed Gaussian return law.

On a single day returns over ``tau`` midpoint ticks are Gaussian with variance
``tau / beta``. Across days ``beta`` (the inverse squared volatility) is gamma
distributed with shape ``a`` and rate ``b``::

    f(beta | a, b) = b**a / Gamma(a) * beta**(a - 1) * exp(-b * beta)

Mixing the two gives a Student-type marginal whose complementary CDF decays
with exponent ``2a``. All densities are evaluated in log space; with ``b`` of
order 1e-6 the raw factors over- and underflow easily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special as sp_special

from .special import gamma_ratio_half, lgamma

__all__ = [
    "DomainError",
    "QuadratureError",
    "GammaParams",
    "StudentLaw",
    "Undefined",
    "LawMoments",
    "STOCK_PARAMS",
    "gamma_pdf",
    "gamma_logpdf",
    "gamma_cdf",
    "gamma_ppf",
    "conditional_gaussian_pdf",
    "student_logpdf",
    "student_pdf",
    "student_cdf",
    "student_ccdf_abs",
    "marginal_pdf_numeric",
    "normalize_xi",
    "normalize_r",
    "normalize_p",
    "collapse_curve",
    "collapse_lambda",
    "sample_beta",
    "sample_return",
    "law_moments",
]

_LOG_2PI = math.log(2.0 * math.pi)


class DomainError(ValueError):
    """An argument lies outside the domain of a distribution function."""


class QuadratureError(ArithmeticError):
    """Numerical integration failed to reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved abs. error {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class GammaParams:
    """Shape ``a`` and rate ``b`` of the law of beta = 1/sigma**2.

    ``b`` carries the units of a squared log-return per midpoint tick, so the
    mean of beta is ``a / b``.
    """

    a: float
    b: float

    def __post_init__(self):
        for name in ("a", "b"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating)) and math.isfinite(v) and v > 0):
                raise DomainError(f"GammaParams.{name} must be finite and > 0, got {v!r}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def mean(self) -> float:
        return self.a / self.b


@dataclass(frozen=True)
class StudentLaw:
    """Marginal return law for returns over ``tau`` midpoint ticks."""

    params: GammaParams
    tau: int

    def __post_init__(self):
        if isinstance(self.tau, bool) or int(self.tau) != self.tau or self.tau < 1:
            raise DomainError(f"tau must be a positive integer, got {self.tau!r}")
        object.__setattr__(self, "tau", int(self.tau))

    @property
    def scale(self) -> float:
        """sqrt(b * tau): the unit in which normalized returns r* are measured."""
        return math.sqrt(self.params.b * self.tau)


# Fitted (a, b) per stock, London Stock Exchange 2000-2002.
STOCK_PARAMS = {
    "AZN": GammaParams(2.7, 0.44e-6),
    "LLOY": GammaParams(3.4, 1.1e-6),
    "PRU": GammaParams(2.6, 1.5e-6),
    "RTR": GammaParams(3.9, 3.6e-6),
    "VOD": GammaParams(3.9, 2.1e-6),
}


def _check_beta(beta):
    beta = np.asarray(beta, dtype=float)
    if not np.all(np.isfinite(beta)) or np.any(beta <= 0):
        raise DomainError("beta must be finite and > 0")
    return beta


def _check_tau(tau):
    if isinstance(tau, bool) or int(tau) != tau or tau < 1:
        raise DomainError(f"tau must be a positive integer, got {tau!r}")
    return int(tau)


def _out(arr):
    return arr[()] if arr.ndim == 0 else arr


def gamma_logpdf(beta, p: GammaParams):
    beta = _check_beta(beta)
    return _out(p.a * math.log(p.b) - lgamma(p.a) + (p.a - 1.0) * np.log(beta) - p.b * beta)


def gamma_pdf(beta, p: GammaParams):
    """Density of beta under gamma(a, rate=b)."""
    return _out(np.exp(np.asarray(gamma_logpdf(beta, p))))


def gamma_cdf(beta, p: GammaParams):
    beta = _check_beta(beta)
    return _out(np.asarray(sp_special.gammainc(p.a, p.b * beta)))


def gamma_ppf(q, p: GammaParams):
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise DomainError("quantile level must lie in (0, 1)")
    return _out(np.asarray(sp_special.gammaincinv(p.a, q)) / p.b)


def conditional_gaussian_pdf(r, tau, beta):
    """Gaussian density of a tau-tick return given the day's beta."""
    tau = _check_tau(tau)
    beta = _check_beta(beta)
    r = np.asarray(r, dtype=float)
    logp = 0.5 * (np.log(beta) - _LOG_2PI - math.log(tau)) - beta * r * r / (2.0 * tau)
    return _out(np.exp(logp))


def student_logpdf(r, law: StudentLaw):
    a, b = law.params.a, law.params.b
    r = np.asarray(r, dtype=float)
    two_btau = 2.0 * b * law.tau
    logp = (
        gamma_ratio_half(a)
        - 0.5 * (_LOG_2PI + math.log(b * law.tau))
        - (a + 0.5) * np.log1p(r * r / two_btau)
    )
    return _out(np.asarray(logp))


def student_pdf(r, law: StudentLaw):
    """Closed-form marginal density of a tau-tick return."""
    return _out(np.exp(np.asarray(student_logpdf(r, law))))


def _abs_tail(x, law: StudentLaw):
    # P(|r| > x) = I_z(a, 1/2) with z = 1 / (1 + x^2 / (2 b tau))
    z = 1.0 / (1.0 + x * x / (2.0 * law.params.b * law.tau))
    return sp_special.betainc(law.params.a, 0.5, z)


def student_ccdf_abs(x, law: StudentLaw):
    """P(|r| > x) for unsigned returns."""
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise DomainError("x must be >= 0")
    return _out(np.asarray(_abs_tail(x, law)))


def student_cdf(r, law: StudentLaw):
    """Signed CDF P(R <= r)."""
    r = np.asarray(r, dtype=float)
    half_tail = 0.5 * _abs_tail(np.abs(r), law)
    return _out(np.where(r < 0, half_tail, 1.0 - half_tail))


def marginal_pdf_numeric(r, law: StudentLaw, epsabs=0.0, epsrel=1e-11, limit=200):
    """Mixture density evaluated by adaptive quadrature over beta.

    Integrates P(r, tau | beta) f(beta) on (0, inf) after the substitution
    beta = (a/b) u / (1 - u), u in (0, 1). Independent of the closed form
    used by :func:`student_pdf`.
    """
    if epsabs > 1e-10:
        raise DomainError("absolute tolerance must be <= 1e-10")
    if limit < 8:
        raise DomainError("limit must allow at least 8 subintervals (one per breakpoint span)")
    a, b = law.params.a, law.params.b
    tau = law.tau
    m = a / b
    log_norm = a * math.log(b) - float(lgamma(a))

    def integrand(u, r):
        if u <= 0.0 or u >= 1.0:
            return 0.0
        one_minus = 1.0 - u
        beta = m * u / one_minus
        log_cond = 0.5 * (math.log(beta) - _LOG_2PI - math.log(tau)) - beta * r * r / (2.0 * tau)
        log_gam = log_norm + (a - 1.0) * math.log(beta) - b * beta
        log_jac = math.log(m) - 2.0 * math.log(one_minus)
        return math.exp(log_cond + log_gam + log_jac)

    def one(rv):
        # the integrand in beta peaks at (a - 1/2) / (b + r^2 / 2 tau); far in
        # the tails that lies at tiny u and must be a breakpoint to be found
        peak = max(a - 0.5, 0.5) / (b + rv * rv / (2.0 * tau))
        pts = sorted({min(k * peak / (m + k * peak), 0.5) for k in (0.25, 1.0, 4.0, 16.0)} | {0.5})
        res = integrate.quad(
            integrand, 0.0, 1.0, args=(rv,), epsabs=epsabs, epsrel=epsrel,
            limit=limit, points=pts, full_output=1,
        )
        val, err = res[0], res[1]
        if len(res) > 3:
            raise QuadratureError(f"quadrature did not converge at r={rv!r}: {res[3]}", err)
        return val

    r = np.asarray(r, dtype=float)
    vals = np.array([one(float(rv)) for rv in r.ravel()]).reshape(r.shape)
    return _out(vals)


def normalize_xi(r, tau, beta):
    """xi* = r / sqrt(tau / beta); standard normal under the day's own beta."""
    tau = _check_tau(tau)
    beta = _check_beta(beta)
    return _out(np.asarray(r, dtype=float) * np.sqrt(beta / tau))


def normalize_r(r, b, tau):
    """r* = r / sqrt(b * tau)."""
    tau = _check_tau(tau)
    if not (math.isfinite(b) and b > 0):
        raise DomainError("b must be finite and > 0")
    return _out(np.asarray(r, dtype=float) / math.sqrt(b * tau))


def collapse_lambda(a):
    """Lambda = sqrt(2 pi) Gamma(a) / Gamma(a + 1/2)."""
    return math.exp(0.5 * _LOG_2PI - float(gamma_ratio_half(a)))


def normalize_p(density, a):
    """P* = (Lambda * P) ** (1 / (a + 1/2)) for a density measured per unit r*."""
    density = np.asarray(density, dtype=float)
    if np.any(np.isnan(density)) or np.any(density < 0):
        raise DomainError("density must be >= 0")
    if not (math.isfinite(a) and a > 0):
        raise DomainError("a must be finite and > 0")
    with np.errstate(divide="ignore"):
        logd = np.log(density)
    log_lam = 0.5 * _LOG_2PI - float(gamma_ratio_half(a))
    return _out(np.exp((log_lam + logd) / (a + 0.5)))


def collapse_curve(r_star):
    """Universal curve (1 + r*^2 / 2)^-1 that every law collapses onto."""
    r_star = np.asarray(r_star, dtype=float)
    return _out(1.0 / (1.0 + 0.5 * r_star * r_star))


def sample_beta(p: GammaParams, rng: np.random.Generator, size=None):
    """Draw beta ~ gamma(shape=a, rate=b)."""
    return rng.gamma(p.a, 1.0 / p.b, size=size)


def sample_return(beta, tau, rng: np.random.Generator, size=None):
    """Draw a tau-tick return from N(0, tau / beta)."""
    tau = _check_tau(tau)
    beta = _check_beta(beta)
    return rng.normal(0.0, np.sqrt(tau / beta), size=size)


@dataclass(frozen=True)
class Undefined:
    """A moment that does not exist for the given shape parameter."""

    reason: str

    def __bool__(self):
        return False

    def __str__(self):
        return "undefined"


Moment = Union[float, Undefined]


@dataclass(frozen=True)
class LawMoments:
    variance: Moment
    excess_kurtosis: Moment
    cdf_tail_exponent: float


def law_moments(law: StudentLaw) -> LawMoments:
    a, b = law.params.a, law.params.b
    if a > 1:
        var: Moment = b * law.tau / (a - 1.0)
    else:
        var = Undefined(f"variance requires a > 1 (a = {a})")
    if a > 2:
        kurt: Moment = 3.0 / (a - 2.0)
    else:
        kurt = Undefined(f"kurtosis requires a > 2 (a = {a})")
    return LawMoments(variance=var, excess_kurtosis=kurt, cdf_tail_exponent=2.0 * a)
