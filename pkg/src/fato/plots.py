"""Figure rendering for the report-path CLI flags.

The sweep and waveform commands write delimited data; each accepts
--plot to also render the matching figure next to the data file.  Kept
separate so the numeric modules stay free of matplotlib, and headless:
the Agg backend is forced before pyplot ever loads.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["plot_sweep", "plot_waveform", "plot_profiles"]


def _finite(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = np.isfinite(xs) & np.isfinite(ys)
    return xs[keep], ys[keep]


def plot_sweep(records, path: str, *, title: str = "") -> None:
    """Infidelity curves (log scale) for whichever columns are present."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = [r.x for r in records]
    series = [
        ("simulated", [1.0 - r.fidelity_sim for r in records], "o-"),
        ("analytic", [1.0 - r.fidelity_analytic for r in records], "s--"),
        ("reference", [1.0 - r.fidelity_rwa for r in records], ":"),
    ]
    drew = False
    for label, ys, style in series:
        x, y = _finite(xs, ys)
        if x.size:
            ax.plot(x, np.maximum(y, 1e-16), style, label=label, ms=4)
            drew = True
    if not drew:
        # time_ratio style sweeps carry durations, not fidelities
        x, y = _finite(xs, [r.total_time for r in records])
        ax.plot(x, y, "o-", ms=4, label="total time")
        ax.set_ylabel("total time")
    else:
        ax.set_yscale("log")
        ax.set_ylabel("infidelity")
    ax.set_xlabel("x")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_waveform(waveform, seq, path: str, samples: int = 2048) -> None:
    """Truncated series on top of the underlying switching function."""
    from .fourier import eval_waveform

    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    t = np.linspace(0.0, waveform.period, samples)
    ax.plot(t, eval_waveform(waveform, t), lw=1.2,
            label=f"K={waveform.order}")
    if seq is not None and seq.bangs:
        edges = [0.0]
        for _, d in seq.bangs:
            edges.append(edges[-1] + d)
        for i, (lv, _) in enumerate(seq.bangs):
            ax.hlines(lv, edges[i], edges[i + 1], colors="k", lw=0.8, alpha=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("f(t)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_profiles(drive, path: str, bandwidth: float | None = None,
                  samples: int = 2048) -> None:
    """SWAP pulse trains, rectangular or bandwidth-truncated."""
    from .fourier import eval_waveform, order_for_bandwidth

    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    if bandwidth is None:
        edges = [0.0]
        for d in drive.x_profile.durations:
            edges.append(edges[-1] + d)
        for prof, label in ((drive.x_profile, "x"), (drive.y_profile, "y")):
            tt, ff = [], []
            for i, (_, amp) in enumerate(prof.segments):
                tt += [edges[i], edges[i + 1]]
                ff += [amp, amp]
            ax.plot(tt, ff, lw=1.0, label=label)
    else:
        order = order_for_bandwidth(bandwidth, drive.total_time)
        t = np.linspace(0.0, drive.total_time, samples)
        ax.plot(t, eval_waveform(drive.x_profile.series(order), t), lw=1.0, label="x")
        ax.plot(t, eval_waveform(drive.y_profile.series(order), t), lw=1.0, label="y")
    ax.set_xlabel("t")
    ax.set_ylabel("amplitude")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
