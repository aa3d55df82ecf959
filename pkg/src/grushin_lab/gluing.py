"""Metric-measure double of the Grushin half-plane.

Two copies A, B of the closed half-plane {x >= 0} are glued by the identity
along the y-axis.  A path between different copies must cross the axis, so

    d((A, p), (B, q)) = inf_s  d+(p, (0, s)) + d+(q, (0, s)),

and the measure is the sum of the Lebesgue measures of the two copies.  The
result is isometric to the full Grushin plane via (B, (x, y)) -> (-x, y).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Point, SpaceKind, hamiltonian_arrays, reflect_x
from .distance import distance, invert_exp_batch, path_length_bound
from .errors import DomainError
from .regions import Region

HALF = SpaceKind.HALF_PLANE_PLUS
GRID_NODES = 256
GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5) - 1) / 2


class Copy(enum.Enum):
    A = "A"
    B = "B"
    BOTH = "Both"


@dataclass(frozen=True)
class GluedPoint:
    copy: Copy
    p: Point

    def __post_init__(self):
        if self.copy is Copy.BOTH:
            raise DomainError("a glued point lives in copy A or copy B")
        if not self.p[0] >= 0:
            raise DomainError("glued points use half-plane coordinates with x >= 0")

    def to_plane(self) -> Point:
        """Image under the isometry of the double onto the full plane."""
        return Point(*self.p) if self.copy is Copy.A else reflect_x(self.p)


@dataclass(frozen=True)
class BorelSetSpec:
    region: Region
    copy: Copy


class _AxisDistance:
    """d+(p, (0, s)) with warm-started Newton between nearby s."""

    def __init__(self, p):
        self.p = Point(*p)
        self.seed = None

    def batch(self, s):
        u, v, ok = invert_exp_batch(self.p, np.zeros_like(s), s)
        d = np.sqrt(2 * hamiltonian_arrays(self.p[0], u, v))
        for i in np.flatnonzero(~ok):
            d[i] = distance(self.p, (0.0, float(s[i])), HALF).value
        return d, u, v

    def __call__(self, s: float) -> float:
        res = distance(self.p, (0.0, s), HALF, seed=self.seed)
        if res.witness is not None:
            self.seed = res.witness
        return res.value


def glued_distance(P: GluedPoint, Q: GluedPoint) -> float:
    if P.p[0] == 0 or Q.p[0] == 0 or P.copy is Q.copy:
        # boundary points belong to both copies
        return distance(P.p, Q.p, HALF).value
    p, q = Point(*P.p), Point(*Q.p)
    bound = path_length_bound(p, reflect_x(q))
    reach = max(p[0], q[0]) * bound + bound * bound / 2
    s = np.linspace(min(p[1], q[1]) - reach, max(p[1], q[1]) + reach, GRID_NODES)
    dp, dq = _AxisDistance(p), _AxisDistance(q)
    fp, up, vp = dp.batch(s)
    fq, uq, vq = dq.batch(s)
    f = fp + fq
    i = int(np.argmin(f))
    a, b = s[max(i - 1, 0)], s[min(i + 1, s.size - 1)]
    if np.isfinite(up[i]):
        dp.seed = (up[i], vp[i])
    if np.isfinite(uq[i]):
        dq.seed = (uq[i], vq[i])

    def total(z):
        return dp(z) + dq(z)

    # golden-section search on the bracketing cell pair
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = total(c), total(d)
    while b - a > GOLDEN_TOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = total(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = total(d)
    return float(min(fc, fd, f[i]))


def double_equivalence_residual(p, q) -> float:
    """|d_double((A, p), (B, q)) - d_plane(p, reflect(q))|."""
    glued = glued_distance(GluedPoint(Copy.A, Point(*p)), GluedPoint(Copy.B, Point(*q)))
    plane = distance(p, reflect_x(q), SpaceKind.FULL_PLANE).value
    return abs(glued - plane)


def glued_measure(B: BorelSetSpec) -> float:
    """Lebesgue measure of the copy-A part plus the copy-B part."""
    per_copy = B.region.clipped_area(+1)
    return 2 * per_copy if B.copy is Copy.BOTH else per_copy
