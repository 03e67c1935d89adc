"""Gamma-mixture model of intraday returns in midpoint time."""

__version__ = "0.1.0"

from .dist_core import (  # noqa: E402
    STOCK_PARAMS,
    GammaParams,
    StudentLaw,
    law_moments,
    marginal_pdf_numeric,
    normalize_p,
    normalize_r,
    normalize_xi,
    student_ccdf_abs,
    student_pdf,
)
from .estimate import estimate_daily_beta, fit_gamma_mle  # noqa: E402
from .ingest import build_midpoint_series, parse_quotes, returns_at_scale  # noqa: E402
from .synth import SynthConfig, render_quotes, simulate_market  # noqa: E402

__all__ = [
    "STOCK_PARAMS",
    "GammaParams",
    "StudentLaw",
    "law_moments",
    "marginal_pdf_numeric",
    "normalize_p",
    "normalize_r",
    "normalize_xi",
    "student_ccdf_abs",
    "student_pdf",
    "estimate_daily_beta",
    "fit_gamma_mle",
    "build_midpoint_series",
    "parse_quotes",
    "returns_at_scale",
    "SynthConfig",
    "render_quotes",
    "simulate_market",
]
