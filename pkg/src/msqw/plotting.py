"""Matplotlib figures written next to the CSV reports."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

plt.rcParams.update({
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "figure.figsize": (4.5, 3.2),
    "savefig.dpi": 150,
})


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_medians(points, path, title: str = "") -> Path:
    """Median success probability against n, one line per stage count."""
    by_m = defaultdict(list)
    for pt in points:
        by_m[pt.m].append(pt)
    fig, ax = plt.subplots()
    for m in sorted(by_m):
        pts = sorted(by_m[m], key=lambda p: p.n)
        ax.errorbar([p.n for p in pts], [p.median for p in pts], yerr=[p.stderr for p in pts],
                    marker="o", ms=3, capsize=2, label=f"m = {m}")
    ax.set_yscale("log")
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_xlabel("qubits n")
    ax.set_ylabel("median success probability")
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def plot_fits(fits, path) -> Path:
    """Slope and intercept of ln P = a n + b against the stage count."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7, 3))
    ms = [f.m for f in fits]
    ax1.errorbar(ms, [f.a for f in fits], yerr=[f.a_stderr for f in fits], marker="o", capsize=2)
    ax1.set_xlabel("stages m")
    ax1.set_ylabel("slope a(m)")
    ax2.errorbar(ms, [f.b for f in fits], yerr=[f.b_stderr for f in fits], marker="o", capsize=2)
    ax2.set_xlabel("stages m")
    ax2.set_ylabel("intercept b(m)")
    for ax in (ax1, ax2):
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    return _save(fig, path)


def plot_trace(trace, path, n: int, t_s: float | None = None) -> Path:
    t, sim, quad = zip(*trace)
    fig, ax = plt.subplots()
    ax.plot(t, sim, label="simulated")
    ax.plot(t, quad, label="2nd order")
    if t_s is not None:
        ax.axvline(t_s, ls=":", color="C0", label="t_s")
    ax.set_ylim(-n * 1.05, n * 1.05)
    ax.set_xlabel("t")
    ax.set_ylabel("graph energy")
    ax.legend()
    return _save(fig, path)
