"""Figure rendering for the report paths (PNG files next to the CSV/JSON).

Everything goes through the Agg backend; no interactive windows.
"""

from __future__ import annotations

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

DPI = 130


def _save(fig, path):
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def plot_field(fld, path, title=None, log_scale=True):
    """Heatmap of a polar field in cartesian coordinates."""
    g = fld.grid
    xs, ys = g.nodes_xy()
    vals = fld.values
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    if log_scale and (vals > 0).any():
        floor = vals[vals > 0].min()
        data = np.log10(np.maximum(vals, floor))
        label = "log10 u"
    else:
        data, label = vals, "u"
    pc = ax.pcolormesh(xs, ys, data, shading="gouraud", cmap="viridis")
    fig.colorbar(pc, ax=ax, label=label)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_profiles(profiles, path, title=None):
    """Angular functions eta(theta) for a list of AngularProfile."""
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for prof in profiles:
        ax.plot(prof.thetas, prof.etas,
                label=f"p={prof.p:g} N={prof.N} c={prof.c:g} "
                      f"{prof.kind[:4]} a={prof.a:.4f}")
    ax.set_xlabel("theta")
    ax.set_ylabel("eta")
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_decay_ladder(pairs, path, ylabel, title=None, reference_slope=None):
    """log-log ladder plot for (r, value) pairs."""
    pairs = [(r, v) for r, v in pairs if v > 0]
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    if pairs:
        rs, vs = zip(*pairs)
        ax.loglog(rs, vs, "o-", lw=1)
        if reference_slope is not None:
            rs = np.asarray(rs)
            ref = vs[0] * (rs / rs[0]) ** reference_slope
            ax.loglog(rs, ref, "k--", lw=0.8,
                      label=f"slope {reference_slope:g}")
            ax.legend(fontsize=8)
    ax.set_xlabel("r")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_harnack_ladders(report, path, title=None):
    """One line per ladder-valued estimate in a HarnackReport."""
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    drew = False
    for rec in report.records:
        ladder = rec["constants"].get("ladder")
        if ladder is None or len(rec["radii"]) != len(ladder):
            continue
        ax.semilogx(rec["radii"], ladder, "o-", lw=1, label=rec["estimate_id"])
        drew = True
    if drew:
        ax.legend(fontsize=8)
    ax.set_xlabel("r")
    ax.set_ylabel("measured constant")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_barrier(params, profile_fn, report, path, title=None):
    """Barrier profile over its annulus with failing stencils marked."""
    lo, hi = report.annulus
    s = np.linspace(lo, hi, 400)
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.plot(s, profile_fn(s), lw=1.2)
    if report.failures:
        ax.set_title(f"{title or ''} ({len(report.failures)} failing stencils)")
    elif title:
        ax.set_title(title)
    ax.set_xlabel("s")
    ax.set_ylabel("barrier value")
    return _save(fig, path)


def plot_convergence(diffs, path, title=None):
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.semilogy(range(1, len(diffs) + 1), diffs, "o-")
    ax.set_xlabel("ladder level")
    ax.set_ylabel("relative successive difference")
    if title:
        ax.set_title(title)
    return _save(fig, path)
