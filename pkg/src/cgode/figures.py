"""Figure rendering for study results.

Renders convergence plots next to the serialized study output using the
non-interactive Agg backend, so runs work headless.  Failed or saturated
cells are simply dropped from the curves.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .study import StudyConfig, StudyMode

__all__ = [
    "render_h_convergence",
    "render_h_effectivity",
    "render_p_convergence",
    "render_study_figures",
]


def _finite_series(rows, attr):
    """(k or r, value) pairs for rows where the metric is usable."""
    xs, ys = [], []
    for row in rows:
        val = getattr(row, attr)
        if row.error is None and val is not None and math.isfinite(val) and val > 0.0:
            xs.append(row)
            ys.append(val)
    return xs, ys


def _by_degree(rows):
    grouped = {}
    for row in rows:
        grouped.setdefault(row.r, []).append(row)
    for group in grouped.values():
        group.sort(key=lambda row: row.k)
    return grouped


def render_h_convergence(rows, path, title: str) -> None:
    """Log-log error and bound versus step size, one curve pair per degree."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for r, group in sorted(_by_degree(rows).items()):
        sel, errs = _finite_series(group, "linf_error")
        ax.loglog([row.k for row in sel], errs, "o-", label=f"error, degree {r}")
        sel, bounds = _finite_series(group, "estimator_bound")
        ax.loglog([row.k for row in sel], bounds, "s--", label=f"bound, degree {r}")
    ax.set_xlabel("time step k")
    ax.set_ylabel("max norm over (0, T)")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_h_effectivity(rows, path, title: str) -> None:
    """Effectivity (bound / error) versus step size per degree."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for r, group in sorted(_by_degree(rows).items()):
        sel, effs = _finite_series(group, "effectivity")
        ax.semilogx([row.k for row in sel], effs, "o-", label=f"degree {r}")
    ax.axhline(1.0, color="black", linewidth=0.8, alpha=0.6)
    ax.set_xlabel("time step k")
    ax.set_ylabel("effectivity")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_p_convergence(rows, path, title: str) -> None:
    """Semilog error and bound versus polynomial degree at fixed step."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ordered = sorted(rows, key=lambda row: row.r)
    sel, errs = _finite_series(ordered, "linf_error")
    ax.semilogy([row.r for row in sel], errs, "o-", label="error")
    sel, bounds = _finite_series(ordered, "estimator_bound")
    ax.semilogy([row.r for row in sel], bounds, "s--", label="bound")
    ax.set_xlabel("polynomial degree r")
    ax.set_ylabel("max norm over (0, T)")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_study_figures(config: StudyConfig, rows) -> list:
    """Render the figures matching the study mode next to the output file.

    Returns the list of written figure paths (empty for single mode).
    """
    if not config.output_path:
        return []
    stem, _ = os.path.splitext(config.output_path)
    paths = []
    if config.mode is StudyMode.HSTUDY:
        conv = f"{stem}_convergence.png"
        render_h_convergence(rows, conv, f"{config.problem}: h-convergence, T = {config.T:g}")
        eff = f"{stem}_effectivity.png"
        render_h_effectivity(rows, eff, f"{config.problem}: estimator effectivity")
        paths += [conv, eff]
    elif config.mode is StudyMode.PSTUDY:
        conv = f"{stem}_convergence.png"
        render_p_convergence(
            rows, conv, f"{config.problem}: p-convergence, k = {config.step_size:g}"
        )
        paths.append(conv)
    return paths
