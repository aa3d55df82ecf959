"""Disks and rectangles: Lebesgue area, half-plane clipping, uniform sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _segment_area(r: float, d: float) -> float:
    """Area of the part of a radius-r disk beyond a chord at signed offset d."""
    if d >= r:
        return 0.0
    if d <= -r:
        return math.pi * r * r
    return r * r * math.acos(d / r) - d * math.sqrt(r * r - d * d)


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("disk radius must be positive")

    def area(self) -> float:
        return math.pi * self.r * self.r

    def clipped_area(self, side: int) -> float:
        """Area of the intersection with {side * x >= 0} (side 0: whole disk)."""
        if side == 0:
            return self.area()
        # part with side*x >= 0 is the part beyond the chord at offset -side*cx
        return _segment_area(self.r, -side * self.cx)

    def inside(self, side: int) -> bool:
        return side == 0 or side * self.cx - self.r >= 0

    def sample(self, rng: np.random.Generator, n: int):
        rad = self.r * np.sqrt(rng.random(n))
        ang = 2 * np.pi * rng.random(n)
        return self.cx + rad * np.cos(ang), self.cy + rad * np.sin(ang)


@dataclass(frozen=True)
class Rectangle:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise DomainError("rectangle corners must satisfy x0 < x1 and y0 < y1")

    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def clipped_area(self, side: int) -> float:
        if side == 0:
            return self.area()
        lo, hi = (max(self.x0, 0.0), self.x1) if side > 0 else (self.x0, min(self.x1, 0.0))
        return max(hi - lo, 0.0) * (self.y1 - self.y0)

    def inside(self, side: int) -> bool:
        return side == 0 or min(side * self.x0, side * self.x1) >= 0

    def sample(self, rng: np.random.Generator, n: int):
        return rng.uniform(self.x0, self.x1, n), rng.uniform(self.y0, self.y1, n)


Region = Disk | Rectangle


def parse_region(text: str) -> Region:
    """``disk:cx,cy,r`` or ``rect:x0,x1,y0,y1``."""
    kind, _, rest = text.partition(":")
    try:
        vals = [float(s) for s in rest.split(",")]
    except ValueError:
        raise DomainError(f"bad region {text!r}") from None
    if kind == "disk" and len(vals) == 3:
        return Disk(*vals)
    if kind in ("rect", "rectangle") and len(vals) == 4:
        return Rectangle(*vals)
    raise DomainError(f"bad region {text!r}; expected disk:cx,cy,r or rect:x0,x1,y0,y1")
