"""Rays, minimality horizon and cut loci of the Grushin plane.

A ray ``t -> exp_q(t u, t v)`` minimizes length until ``t* = pi / |v|``
(forever when v = 0).  From an on-axis point the cut locus is the y-axis
(its closure contains q).  From (x0, y0) with x0 != 0 it is the pair of
vertical half-lines on x = -x0 starting at heights y0 +/- pi x0^2 / 2; this is
the (1, 0) picture moved by a dilation of ratio |x0|, a reflection when
x0 < 0, and a vertical translation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import Covector, Point, SpaceKind, exp_arrays, hamiltonian_arrays
from .distance import GridOracleConfig, graph_oracle_distance
from .errors import DomainError, NoMeeting

ORACLE_TOL = 0.02


@dataclass(frozen=True)
class RaySpec:
    q: Point
    lam: Covector

    def __post_init__(self):
        if self.lam[0] == 0 and self.lam[1] == 0:
            raise DomainError("a ray needs a nonzero covector")

    def at(self, t):
        return exp_arrays(self.q[0], self.q[1], self.lam[0], self.lam[1], t)

    def length(self, t: float) -> float:
        return t * math.sqrt(2 * hamiltonian_arrays(self.q[0], self.lam[0], self.lam[1]))


class CutKind(enum.Enum):
    VERTICAL_AXIS_CLOSURE = "VerticalAxisClosure"
    TWO_VERTICAL_HALF_LINES = "TwoVerticalHalfLines"


@dataclass(frozen=True)
class CutDescription:
    """Cut locus of ``base``.

    For half-lines: {(x_c_signed, y0 + (y_offset + s))} and
    {(x_c_signed, y0 - (y_offset + s))}, s >= 0, with y0 the base ordinate.
    """

    kind: CutKind
    base: Point
    x_c_signed: float = 0.0
    y_offset: float = 0.0

    def distance_to(self, p) -> float:
        """Euclidean distance from p to the described closed set."""
        if self.kind is CutKind.VERTICAL_AXIS_CLOSURE:
            return abs(p[0])
        dy = abs(p[1] - self.base[1])
        gap = max(self.y_offset - dy, 0.0)
        return math.hypot(p[0] - self.x_c_signed, gap)

    def polylines(self, length: float = 3.0, n: int = 2):
        """Finite pieces of the cut set, as lists of (x, y) arrays."""
        y0 = self.base[1]
        if self.kind is CutKind.VERTICAL_AXIS_CLOSURE:
            ys = np.linspace(y0 - length, y0 + length, n)
            return [(np.zeros(n), ys)]
        s = np.linspace(0.0, length, n)
        xs = np.full(n, self.x_c_signed)
        return [(xs, y0 + self.y_offset + s), (xs, y0 - self.y_offset - s)]


def minimality_time(ray: RaySpec) -> float:
    v = ray.lam[1]
    return math.inf if v == 0 else math.pi / abs(v)


def cut_locus(q) -> CutDescription:
    x0, y0 = q
    if x0 == 0:
        return CutDescription(CutKind.VERTICAL_AXIS_CLOSURE, Point(0.0, float(y0)))
    return CutDescription(CutKind.TWO_VERTICAL_HALF_LINES, Point(float(x0), float(y0)),
                          x_c_signed=-float(x0), y_offset=math.pi * x0 * x0 / 2)


def meeting_point(q, u: float, v: float):
    """First time the rays with covectors (u, v) and (-u, v) meet, and where.

    The x-gap between the rays is 2 u sin(t v) / v, so the crossing is
    bracketed in [pi / (2|v|), 3 pi / (2|v|)] and found by root finding; the
    returned time is the closed form pi / |v| once the root confirms it.
    """
    if v == 0:
        raise DomainError("rays with v = 0 are straight lines and never meet again")
    if u == 0 and q[0] == 0:
        raise NoMeeting("u = 0 from an on-axis point is the trivial geodesic")
    t_star = math.pi / abs(v)
    if u != 0:
        def gap(t):
            xa, _ = exp_arrays(q[0], q[1], u, v, t)
            xb, _ = exp_arrays(q[0], q[1], -u, v, t)
            return float(xa - xb)

        root = brentq(gap, 0.5 * t_star, 1.5 * t_star, xtol=1e-14)
        if abs(root - t_star) > 1e-9 * t_star:
            raise NoMeeting(f"root {root} disagrees with pi/|v| = {t_star}")
    x, y = exp_arrays(q[0], q[1], u, v, t_star)
    return Point(float(x), float(y)), t_star


def is_minimizing(ray: RaySpec, t: float, cfg: GridOracleConfig | None = None) -> bool:
    """Whether the ray is still length-minimizing at time t.

    Before t* this holds by construction; beyond it the ray length is compared
    with the grid-oracle distance, within ORACLE_TOL.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    if t < minimality_time(ray):
        return True
    end = ray.at(t)
    L = ray.length(t)
    if cfg is None:
        cfg = GridOracleConfig(h=min(0.005, L / 500))
        # fall back to a node budget when the fixed spacing would be too large
        try:
            d = graph_oracle_distance(ray.q, end, SpaceKind.FULL_PLANE, cfg)
        except DomainError:
            d = graph_oracle_distance(ray.q, end, SpaceKind.FULL_PLANE, GridOracleConfig())
    else:
        d = graph_oracle_distance(ray.q, end, SpaceKind.FULL_PLANE, cfg)
    return L <= d * (1 + ORACLE_TOL)
