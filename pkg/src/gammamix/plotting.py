"""Static renderings of the figure series (matplotlib, non-interactive)."""

from __future__ import annotations

import os
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .figures import Series  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
    "svg.hashsalt": "gammamix",
    "svg.fonttype": "none",
}


def _by_name(series: Sequence[Series]) -> Dict[str, Series]:
    return {s.name: s for s in series}


def _tau_series(series, prefix):
    found = [s for s in series if s.name.startswith(prefix)]
    return sorted(found, key=lambda s: int(s.meta.get("tau", 0)))


def _save(fig, path):
    tmp = f"{path}.tmp{os.getpid()}"
    fmt = os.path.splitext(path)[1].lstrip(".")
    meta = {"Date": None} if fmt in ("svg", "pdf") else {}
    fig.savefig(tmp, format=fmt, metadata=meta, bbox_inches="tight")
    plt.close(fig)
    os.replace(tmp, path)
    return path


def render_dataset(series: Sequence[Series], path: str) -> str:
    """Four panels for one stock: beta density, xi*, r* density, |r*| ccdf."""
    named = _by_name(series)
    label = next((s.meta.get("label") for s in series if s.meta.get("label")), "")
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(7.0, 5.6))
        ax = axes[0, 0]
        if "beta_density" in named:
            s = named["beta_density"]
            ax.plot(s.x, s.y, "o", label="daily beta")
        if "gamma_fit" in named:
            s = named["gamma_fit"]
            ax.plot(s.x, s.y, "-", label=f"gamma a={float(s.meta['a']):.3g} b={float(s.meta['b']):.3g}")
        ax.set_xlabel(r"$\beta$")
        ax.set_ylabel("density")
        ax.legend()

        ax = axes[0, 1]
        for s in _tau_series(series, "xi_density_tau"):
            m = s.y > 0
            ax.plot(s.x[m], s.y[m], ".", label=f"tau={s.meta['tau']}")
        if "normal_density" in named:
            s = named["normal_density"]
            ax.plot(s.x, s.y, "k-", label="N(0,1)")
        ax.set_yscale("log")
        ax.set_xlabel(r"$\xi^*$")
        ax.legend()

        ax = axes[1, 0]
        for s in _tau_series(series, "rstar_density_tau"):
            m = s.y > 0
            ax.plot(s.x[m], s.y[m], ".", label=f"tau={s.meta['tau']}")
        if "student_density" in named:
            s = named["student_density"]
            ax.plot(s.x, s.y, "k-", label="Student law")
        for s in _tau_series(series, "gauss_density_tau"):
            ax.plot(s.x, s.y, "k--", label=f"Gaussian tau={s.meta['tau']}")
        ax.set_yscale("log")
        ax.set_ylim(bottom=1e-5)
        ax.set_xlabel(r"$r^*$")
        ax.set_ylabel("density")
        ax.legend()

        ax = axes[1, 1]
        for s in _tau_series(series, "rstar_ccdf_tau"):
            ax.loglog(s.x, s.y, ".", label=f"tau={s.meta['tau']}")
        if "student_ccdf" in named:
            s = named["student_ccdf"]
            ax.loglog(s.x, s.y, "k-", label="Student law")
        for s in _tau_series(series, "gauss_ccdf_tau"):
            ax.loglog(s.x, s.y, "k--", label="Gaussian")
        ax.set_xlim(1e-2, 1e2)
        ax.set_ylim(1e-6, 2.0)
        ax.set_xlabel(r"$|r^*|$")
        ax.set_ylabel(r"$F(|r^*|)$")
        ax.legend()
        fig.suptitle(label)
        fig.tight_layout()
        return _save(fig, path)


def render_cross(qq: List[Series], collapse: Sequence[Series], path: str) -> str:
    """Q-Q of beta for every stock, and the P*(r*) collapse."""
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.0, 3.0))
        for s in qq:
            ax1.plot(s.x, s.y, ".-", label=s.meta.get("label", ""))
        ax1.plot([0, 1], [0, 1], "k:", lw=0.8)
        ax1.set_xlabel("fitted F")
        ax1.set_ylabel("empirical F")
        ax1.legend()
        for s in collapse:
            if s.name == "collapse_curve":
                ax2.plot(s.x, s.y, "k-", label=r"$(1+r^{*2}/2)^{-1}$")
            else:
                ax2.plot(s.x, s.y, ".", label=s.meta.get("label", ""))
        ax2.set_xlabel(r"$r^*$")
        ax2.set_ylabel(r"$P^*$")
        ax2.legend()
        fig.tight_layout()
        return _save(fig, path)
