"""Figures for the CLI reports (Agg backend, PNG, no timestamps in metadata)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .grid import nodes
from .solver import RunRecord

_METADATA = {"Software": None}


def _figure(nrows=1, ncols=1, size=(6.4, 4.0)):
    fig = Figure(figsize=size, dpi=100)
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, ncols, squeeze=False)
    return fig, axes


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_METADATA)
    return path


def plot_run(record: RunRecord, path) -> Path:
    """Sup norms (log scale), fronts, and the snapshot profiles of one run."""
    fig, ax = _figure(1, 3, size=(13.0, 4.0))
    t = record.t
    for norm, label in ((record.norm_u, "|u|"), (record.norm_v, "|v|")):
        pos = norm > 0
        ax[0, 0].semilogy(t[pos], norm[pos], label=label)
    ax[0, 0].set_xlabel("t")
    ax[0, 0].set_ylabel("sup norm")
    ax[0, 0].legend()
    ax[0, 1].plot(t, record.h, label="h")
    ax[0, 1].plot(t, record.g, "--", label="g")
    ax[0, 1].set_xlabel("t")
    ax[0, 1].set_ylabel("front")
    ax[0, 1].legend()
    snaps = list(record.snapshots) or ([record.final_state] if record.final_state else [])
    for st in snaps:
        s = nodes(st.n)
        ax[0, 2].plot(st.h * s, st.w, label=f"u, t={st.t:.3g}")
        ax[0, 2].plot(st.g * s, st.z, ":", label=f"v, t={st.t:.3g}")
    ax[0, 2].set_xlabel("r")
    ax[0, 2].set_ylabel("profile")
    if 0 < len(snaps) <= 6:
        ax[0, 2].legend(fontsize=7)
    fig.suptitle(f"A = {record.data.A:g}: {record.termination} at t = {record.t_stop:.6g}")
    return _save(fig, path)


def plot_phase(amplitudes: Sequence[float], labels: Sequence[str], path,
               threshold: float | None = None) -> Path:
    """Outcome label against amplitude."""
    order = sorted(set(labels))
    fig, ax = _figure()
    A = np.asarray(amplitudes, float)
    y = np.array([order.index(lab) for lab in labels])
    ax[0, 0].scatter(A, y)
    ax[0, 0].set_yticks(range(len(order)))
    ax[0, 0].set_yticklabels(order)
    if np.all(A > 0):
        ax[0, 0].set_xscale("log")
    if threshold is not None:
        ax[0, 0].axvline(threshold, color="k", lw=0.8, ls="--")
    ax[0, 0].set_xlabel("A")
    return _save(fig, path)


def plot_lifespan(amplitudes: Sequence[float], T: Sequence[float], path,
                  slope: float | None = None, intercept: float | None = None) -> Path:
    """log T against log A, with the fitted line when given."""
    fig, ax = _figure()
    A = np.asarray(amplitudes, float)
    T = np.asarray(T, float)
    ok = np.isfinite(T) & (T > 0)
    ax[0, 0].loglog(A[ok], T[ok], "o", label="T(A)")
    if slope is not None and intercept is not None and ok.any():
        x = np.linspace(np.log(A[ok].min()), np.log(A[ok].max()), 50)
        ax[0, 0].loglog(np.exp(x), np.exp(intercept + slope * x), "-",
                        label=f"slope {slope:.3f}")
    ax[0, 0].set_xlabel("A")
    ax[0, 0].set_ylabel("blow-up time")
    ax[0, 0].legend()
    return _save(fig, path)
