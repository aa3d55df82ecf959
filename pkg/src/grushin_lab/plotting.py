"""Geodesic fans, cut-locus polylines and their matplotlib rendering."""

from __future__ import annotations

import math

import numpy as np

from .core import exp_arrays
from .cutlocus import cut_locus

FAN_U = tuple(np.round(np.linspace(-2.0, 2.0, 9), 12))


def momentum_u(x, u, v, t):
    """dx/dt along the geodesic: u cos(tv) - x v sin(tv)."""
    return u * np.cos(t * v) - x * v * np.sin(t * v)


def ray_fan(q, us=FAN_U, vs=(1.0, -1.0), n: int = 200):
    """Rows (ray_id, t, x, y, u, v) of rays up to their minimality horizon.

    With |v| = 1 every ray stops minimizing at t = pi.
    """
    rows = []
    ray_id = 0
    for v in vs:
        t = np.linspace(0.0, math.pi / abs(v), n)
        for u in us:
            if u == 0 and q[0] == 0:
                continue
            xs, ys = exp_arrays(q[0], q[1], u, v, t)
            us_t = momentum_u(q[0], u, v, t)
            for k in range(n):
                rows.append((ray_id, float(t[k]), float(xs[k]), float(ys[k]), float(us_t[k]), float(v)))
            ray_id += 1
    return rows


def cut_rows(q, length: float = 4.0, n: int = 2):
    """Rows (segment_id, s, x, y) sampling the cut locus of q."""
    rows = []
    for seg, (xs, ys) in enumerate(cut_locus(q).polylines(length, n)):
        s = np.hypot(xs - xs[0], ys - ys[0])
        for k in range(len(xs)):
            rows.append((seg, float(s[k]), float(xs[k]), float(ys[k])))
    return rows


def render_panel(ax, q, fan, cuts, title=None):
    by_ray = {}
    for ray_id, _, x, y, _, _ in fan:
        by_ray.setdefault(ray_id, ([], []))
        by_ray[ray_id][0].append(x)
        by_ray[ray_id][1].append(y)
    for xs, ys in by_ray.values():
        ax.plot(xs, ys, color="0.35", lw=0.8)
    by_seg = {}
    for seg, _, x, y in cuts:
        by_seg.setdefault(seg, ([], []))
        by_seg[seg][0].append(x)
        by_seg[seg][1].append(y)
    for xs, ys in by_seg.values():
        ax.plot(xs, ys, color="red", lw=2)
    ax.plot([q[0]], [q[1]], "ko", ms=4)
    ax.axvline(0.0, color="0.7", lw=0.5, ls=":")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)


def render_figure(panels, path) -> None:
    """Draw one subplot per (q, fan_rows, cut_rows) panel and save to path."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4.5))
    axes = np.atleast_1d(axes)
    for ax, (q, fan, cuts) in zip(axes, panels):
        render_panel(ax, q, fan, cuts, title=f"q = ({q[0]:g}, {q[1]:g})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
