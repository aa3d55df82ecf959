"""Closed-form geometry of the Grushin plane.

The Grushin structure on R^2 is generated by the orthonormal frame
``X1 = d/dx``, ``X2 = x d/dy``; away from the y-axis it is the Riemannian
metric ``dx^2 + dy^2 / x^2``.  Geodesics are projections of the Hamiltonian
flow of ``H = (u^2 + x^2 v^2) / 2`` and are available in closed form.

All numerical kernels here accept numpy arrays and broadcast; the public
functions taking :class:`Point` / :class:`Covector` work on scalars or arrays
alike.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BasePointOutsideSpace, DomainError

# Below this |w| the removable-singularity kernels use their Taylor series.
SERIES_THRESHOLD = 0.1
# Slack on the half-plane endpoint test, absorbs rounding of x_1.
HALF_PLANE_SLACK = 1e-12


class Point(NamedTuple):
    x: float
    y: float


class Covector(NamedTuple):
    """Initial momentum ``u dx + v dy``."""

    u: float
    v: float


class SpaceKind(enum.Enum):
    FULL_PLANE = "plane"
    HALF_PLANE_PLUS = "halfplane+"
    HALF_PLANE_MINUS = "halfplane-"

    @property
    def side(self) -> int:
        """+1 / -1 for the half-planes, 0 for the full plane."""
        return {"plane": 0, "halfplane+": 1, "halfplane-": -1}[self.value]

    @classmethod
    def parse(cls, name: str | SpaceKind) -> SpaceKind:
        if isinstance(name, SpaceKind):
            return name
        aliases = {
            "plane": cls.FULL_PLANE,
            "full": cls.FULL_PLANE,
            "double": cls.FULL_PLANE,
            "halfplane+": cls.HALF_PLANE_PLUS,
            "halfplane": cls.HALF_PLANE_PLUS,
            "halfplane-": cls.HALF_PLANE_MINUS,
        }
        try:
            return aliases[name.strip().lower()]
        except KeyError:
            raise DomainError(f"unknown space {name!r}") from None


@dataclass(frozen=True)
class GeodesicSpec:
    q: Point
    lam: Covector


# ---------------------------------------------------------------------------
# Removable-singularity kernels
# ---------------------------------------------------------------------------


def _series_or(w, series, closed):
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < SERIES_THRESHOLD
    if w.ndim == 0:
        return series(w) if small else closed(w)
    out = np.empty_like(w)
    out[small] = series(w[small])
    big = ~small
    out[big] = closed(w[big])
    return out


def sinc(w):
    """sin(w) / w, equal to 1 at w = 0."""
    def series(z):
        z2 = z * z
        return 1 + z2 * (-1 / 6 + z2 * (1 / 120 + z2 * (-1 / 5040 + z2 / 362880)))

    return _series_or(w, series, lambda z: np.sin(z) / z)


def sin_minus_wcos_over_w3(w):
    """(sin w - w cos w) / w^3, equal to 1/3 at w = 0."""
    def series(z):
        z2 = z * z
        return 1 / 3 + z2 * (-1 / 30 + z2 * (1 / 840 + z2 * (-1 / 45360 + z2 / 3991680)))

    return _series_or(w, series, lambda z: (np.sin(z) - z * np.cos(z)) / z**3)


def _two_w_minus_sin2w_over_4w3(w):
    """(2w - sin 2w) / (4 w^3), equal to 1/3 at w = 0."""
    def series(z):
        z2 = z * z
        return 1 / 3 + z2 * (-1 / 15 + z2 * (2 / 315 + z2 * (-1 / 2835 + z2 * 2 / 155925)))

    return _series_or(w, series, lambda z: (2 * z - np.sin(2 * z)) / (4 * z**3))


# ---------------------------------------------------------------------------
# Array kernels
# ---------------------------------------------------------------------------


def hamiltonian_arrays(x, u, v):
    return 0.5 * (u * u + x * x * v * v)


def exp_arrays(x, y, u, v, t=1.0):
    """Endpoint of the geodesic from (x, y) with covector (u, v) at time t."""
    U = t * np.asarray(u, dtype=float)
    w = t * np.asarray(v, dtype=float)
    s = sinc(w)
    sw = np.sin(w)
    xt = x * np.cos(w) + U * s
    yt = (
        y
        + x * x * (2 * w + np.sin(2 * w)) / 4
        + U * U * w * _two_w_minus_sin2w_over_4w3(w)
        + U * x * sw * s
    )
    return xt, yt


def exp_differential(x, u, v):
    """Partial derivatives of (x_1, y_1) with respect to (u, v).

    Returns ``(dxdu, dxdv, dydu, dydv)``; the determinant is the Jacobian
    :func:`jacobian_arrays`.
    """
    s = sinc(v)
    h = sin_minus_wcos_over_w3(v)
    k = _two_w_minus_sin2w_over_4w3(v)
    sv, cv = np.sin(v), np.cos(v)
    dxdu = s
    dxdv = -x * sv - u * v * h
    dydu = 2 * u * v * k + x * sv * s
    dydv = x * x * cv * cv + u * u * (s * s - 2 * k) + u * x * (2 * cv * s - s * s)
    return dxdu, dxdv, dydu, dydv


def jacobian_arrays(x, u, v):
    """Determinant of d exp_q / d(u, v) at the covector (u, v)."""
    return u * u * sin_minus_wcos_over_w3(v) + (u * x + x * x) * sinc(v)


def domain_mask(x, u, v, side=0):
    """Membership in the injectivity domain D_q (side 0) or D_q^{+/-}."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ok = (hamiltonian_arrays(x, u, v) != 0) & (np.abs(v) < np.pi)
    if side:
        x1 = x * np.cos(v) + u * sinc(v)
        ok = ok & (side * x1 >= -HALF_PLANE_SLACK)
    return ok


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def hamiltonian(q, lam):
    return hamiltonian_arrays(q[0], lam[0], lam[1])


def exp_map(q, lam, t=1.0) -> Point:
    xt, yt = exp_arrays(q[0], q[1], lam[0], lam[1], t)
    if np.ndim(xt) == 0:
        return Point(float(xt), float(yt))
    return Point(xt, yt)


def exp_jacobian(q, lam):
    J = jacobian_arrays(q[0], lam[0], lam[1])
    return float(J) if np.ndim(J) == 0 else J


def in_space(p, space) -> bool:
    side = SpaceKind.parse(space).side
    return side == 0 or side * p[0] >= 0


def check_in_space(p, space) -> None:
    if not in_space(p, space):
        raise BasePointOutsideSpace(f"point {tuple(p)} is not in {SpaceKind.parse(space).value}")


def in_injectivity_domain(q, lam, space=SpaceKind.FULL_PLANE) -> bool:
    space = SpaceKind.parse(space)
    check_in_space(q, space)
    return bool(domain_mask(q[0], lam[0], lam[1], space.side))


def geodesic_samples(spec: GeodesicSpec, n: int) -> list[Point]:
    if n < 2:
        raise DomainError("need at least two samples")
    t = np.linspace(0.0, 1.0, n)
    xs, ys = exp_arrays(spec.q[0], spec.q[1], spec.lam[0], spec.lam[1], t)
    return [Point(float(a), float(b)) for a, b in zip(xs, ys)]


def dilate(p, eps: float) -> Point:
    """Anisotropic dilation (x, y) -> (eps x, eps^2 y), a homothety of ratio eps."""
    if not eps > 0:
        raise DomainError("dilation factor must be positive")
    return Point(eps * p[0], eps * eps * p[1])


def reflect_x(p) -> Point:
    """Reflection through the y-axis, (x, y) -> (-x, y)."""
    return Point(-p[0], p[1])


def translate_y(p, c: float) -> Point:
    return Point(p[0], p[1] + c)
