import math

import numpy as np
import pytest

from grushin_lab.core import exp_map
from grushin_lab.cutlocus import CutKind, RaySpec, cut_locus, is_minimizing, meeting_point, minimality_time
from grushin_lab.distance import boundary_preimages, distance
from grushin_lab.errors import DomainError, NoMeeting


def test_meeting_point_example():
    pt, t = meeting_point((1, 0), 1, 1)
    assert t == pytest.approx(math.pi, abs=1e-12)
    assert pt == pytest.approx((-1, math.pi), abs=1e-9)
    pt, _ = meeting_point((1, 0), 0.5, 1)
    assert pt.y == pytest.approx(5 * math.pi / 8, abs=1e-12)


def test_cut_locus_shapes():
    c = cut_locus((0, 2))
    assert c.kind is CutKind.VERTICAL_AXIS_CLOSURE
    assert c.distance_to((0, 100)) == 0
    c = cut_locus((1, 0))
    assert c.kind is CutKind.TWO_VERTICAL_HALF_LINES
    assert (c.x_c_signed, c.y_offset) == (-1, pytest.approx(math.pi / 2))
    assert c.distance_to((-1, 0)) == pytest.approx(math.pi / 2)
    assert c.distance_to((-1, -3)) == 0


def test_meeting_points_land_on_cut_locus():
    rng = np.random.default_rng(4)
    for _ in range(200):
        q = (rng.uniform(-3, 3), rng.uniform(-3, 3))
        u, v = rng.uniform(-3, 3), rng.choice([-1, 1]) * rng.uniform(0.1, 3)
        pt, t = meeting_point(q, u, v)
        assert t == pytest.approx(minimality_time(RaySpec(q, (u, v))), rel=1e-12)
        assert cut_locus(q).distance_to(pt) <= 1e-9 * max(1, abs(pt.y))


def test_u_zero_ray_hits_cut_boundary():
    for x0, y0, v in [(1, 0, 1), (2, -1, 0.5), (-0.7, 3, -2)]:
        pt, t = meeting_point((x0, y0), 0, v)
        expected = (-x0, y0 + math.copysign(math.pi * x0 * x0 / 2, v))
        assert pt == pytest.approx(expected, abs=1e-12)


def test_symmetry_derivation():
    # off-axis cut loci come from the (1, 0) one by dilation, reflection and translation
    for x0, y0 in [(2, 1), (-0.5, -3), (3, 0)]:
        ref = cut_locus((1, 0))
        c = cut_locus((x0, y0))
        assert c.x_c_signed == pytest.approx(-x0)
        assert c.y_offset == pytest.approx(ref.y_offset * x0 * x0)


def test_exactly_two_geodesics():
    for s in [0.1, 1.0, 4.0]:
        p = (-1.0, math.pi / 2 + s)
        cands = boundary_preimages((1, 0), p)
        assert len(cands) == 2
        for c in cands:
            assert exp_map((1, 0), c) == pytest.approx(p, abs=1e-10)


def test_axis_distance_from_meeting_data():
    for y in [0.1, 1.0, 2.0]:
        # u = sqrt(2 pi y), v = pi reaches (0, y) at t = 1 from the origin
        pt = exp_map((0, 0), (math.sqrt(2 * math.pi * y), math.pi))
        assert pt == pytest.approx((0, y), abs=1e-12)
        assert distance((0, 0), (0, y)).value == pytest.approx(math.sqrt(2 * math.pi * y), rel=1e-12)


def test_errors():
    with pytest.raises(DomainError):
        meeting_point((1, 0), 1, 0)
    with pytest.raises(NoMeeting):
        meeting_point((0, 0), 0, 1)
    with pytest.raises(DomainError):
        RaySpec((0, 0), (0, 0))
    with pytest.raises(DomainError):
        is_minimizing(RaySpec((0, 0), (1, 1)), 0)


def test_minimizing_before_horizon():
    assert is_minimizing(RaySpec((0, 0), (1, 1)), 0.9 * math.pi)
    assert is_minimizing(RaySpec((1, 0), (1, 0)), 50.0)


@pytest.mark.slow
def test_minimality_flips():
    assert not is_minimizing(RaySpec((0, 0), (1, 1)), 1.2 * math.pi)
    assert not is_minimizing(RaySpec((1, 0), (0.5, 2)), 1.3 * math.pi / 2)
