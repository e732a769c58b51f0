"""Render sweep tables to image files next to the CSV output."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

ORDER_NAMES = {"0": "order 0 (RWA)", "1": "order 1", "1tp": "order 1, two-photon only", "2": "order 2"}

# strips the timestamp/version so that identical data gives identical files
_PNG_METADATA = {"Software": None}


def style():
    plt.rcParams.update({
        "font.size": 10,
        "axes.labelsize": 11,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "legend.fontsize": 8,
        "legend.frameon": False,
        "savefig.dpi": 150,
    })


def plot_lifetimes(rows: Sequence, path: str | Path, x: str = "alpha_sq", title: str = "") -> Path:
    """Semilog T_X against ``x``, one curve per (series, order); failed points skipped.

    Unconverged points are drawn hollow.
    """
    style()
    curves = defaultdict(list)
    for r in rows:
        if r.error or r.t_x_us is None:
            continue
        key = (r.series, r.order)
        curves[key].append((getattr(r, x), r.t_x_us, bool(r.converged)))

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for (series, order), pts in curves.items():
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        label = ORDER_NAMES.get(order, order)
        if series:
            label = f"{series}, {label}"
        (line,) = ax.semilogy(xs, ys, "-", label=label)
        ax.semilogy([p[0] for p in pts if p[2]], [p[1] for p in pts if p[2]], "o", ms=4, color=line.get_color())
        ax.semilogy([p[0] for p in pts if not p[2]], [p[1] for p in pts if not p[2]], "o", ms=4,
                    mfc="none", color=line.get_color())
    ax.set_xlabel({"alpha_sq": r"$|\alpha|^2$", "kerr_over_2pi_hz": r"$K/2\pi$ (Hz)",
                   "kappa_2ph_per_us": r"$\kappa_{2ph}$ ($\mu$s$^{-1}$)"}.get(x, x))
    ax.set_ylabel(r"$T_X$ ($\mu$s)")
    if title:
        ax.set_title(title, fontsize=10)
    if curves:
        ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, metadata=_PNG_METADATA)
    plt.close(fig)
    return path
