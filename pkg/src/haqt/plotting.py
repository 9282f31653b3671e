"""Benchmark figure rendering.

Produces the log-log mean-infidelity-vs-ensemble-size figure with both
reference bound lines (Gill-Massar and its guarantee-factor multiple) as a
deterministic SVG byte string; the caller owns file placement. The CSV
table is the authoritative numeric output, the figure a convenience view.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

matplotlib.rcParams["svg.hashsalt"] = "haqt-report"

_SERIES_STYLE = {
    "sqt": dict(color="#1f5fbf", marker="o", label="SQT"),
    "haqt": dict(color="#c0392b", marker="s", label="HAQT"),
}


def render_benchmark_svg(report) -> bytes:
    """Render a BenchReport to SVG bytes (no timestamps, reproducible)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    protocols = list(dict.fromkeys(c.protocol for c in report.cells))
    grid = sorted({c.total_shots for c in report.cells})

    for protocol in protocols:
        cells = sorted((c for c in report.cells if c.protocol == protocol),
                       key=lambda c: c.total_shots)
        ns = [c.total_shots for c in cells]
        means = [c.mean_infidelity for c in cells]
        errs = [c.std_error for c in cells]
        style = _SERIES_STYLE.get(protocol, dict(marker="^", label=protocol))
        ax.errorbar(ns, means, yerr=errs, capsize=3, linestyle="-", **style)

    if report.cells:
        lo = [c for c in report.cells if c.total_shots == grid[0]][0]
        dim = lo.dim
        gm = {c.total_shots: c.gm_bound for c in report.cells}
        ab = {c.total_shots: c.alpha_bound for c in report.cells}
        ax.plot(grid, [gm[n] for n in grid], "k:", label="Gill-Massar bound")
        ax.plot(grid, [ab[n] for n in grid], "k:", alpha=0.55,
                label="bound x guarantee factor")
        ax.set_title(f"mean infidelity vs ensemble size (d = {dim})")

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("ensemble size N")
    ax.set_ylabel("mean infidelity")
    ax.grid(True, which="both", alpha=0.25)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()

    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()
