import math

import numpy as np
import pytest

from grushin_lab.errors import DomainError
from grushin_lab.regions import Disk, Rectangle, parse_region


def test_disk_areas():
    d = Disk(0, 0, 1)
    assert d.area() == pytest.approx(math.pi)
    assert d.clipped_area(+1) == pytest.approx(math.pi / 2)
    assert Disk(3, 0, 1).clipped_area(+1) == pytest.approx(math.pi)
    assert Disk(3, 0, 1).clipped_area(-1) == 0.0
    assert Disk(0.5, 0, 1).clipped_area(+1) + Disk(0.5, 0, 1).clipped_area(-1) == pytest.approx(math.pi)


def test_clipped_area_by_sampling():
    rng = np.random.default_rng(0)
    d = Disk(0.3, 1, 1)
    x, _ = d.sample(rng, 400_000)
    assert d.clipped_area(+1) == pytest.approx(d.area() * np.mean(x >= 0), rel=5e-3)


def test_rectangle():
    r = Rectangle(-1, 2, 0, 1)
    assert r.area() == 3
    assert r.clipped_area(+1) == 2
    assert r.clipped_area(-1) == 1
    assert not r.inside(+1)
    assert Rectangle(0, 2, 0, 1).inside(+1)


def test_parse():
    assert parse_region("disk:1,2,0.5") == Disk(1, 2, 0.5)
    assert parse_region("rect:0,1,2,3") == Rectangle(0, 1, 2, 3)
    for bad in ("disk:1,2", "square:1,1,1", "disk:a,b,c"):
        with pytest.raises(DomainError):
            parse_region(bad)
    with pytest.raises(DomainError):
        Disk(0, 0, 0)
