"""Acceptance criteria, one test per criterion, each reporting a PASS/FAIL line."""

import json
import math
import time

import numpy as np
import pytest

from grushin_lab.cli import run
from grushin_lab.core import SpaceKind, dilate, domain_mask, exp_arrays, exp_jacobian, exp_map
from grushin_lab.curvature import fd_gauss_curvature, negativity_check, negativity_eigenvalues
from grushin_lab.cutlocus import RaySpec, cut_locus, is_minimizing, meeting_point
from grushin_lab.distance import distance, graph_oracle_distance
from grushin_lab.gluing import double_equivalence_residual
from grushin_lab.mcp import (
    coeff_triple,
    easier_form,
    in_slope_domain,
    jacobian_ratio,
    pointwise_N,
    quadratic_form_check,
    set_contraction_check,
    verify_mcp,
)
from grushin_lab.regions import Disk

from .test_core import rk4_flow

HALF = SpaceKind.HALF_PLANE_PLUS
PLANE = SpaceKind.FULL_PLANE


def cli_report(capsys, *argv):
    code = run(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_criterion_01_half_plane_scan(capsys, criterion):
    t0 = time.perf_counter()
    code, rep = cli_report(capsys, "mcp-scan", "--space", "halfplane+")
    elapsed = time.perf_counter() - t0
    r = rep["result"]
    ok = (code == 0 and 3.95 <= r["n_min"] <= 4.0 + 1e-9 and r["supremum"] == "approached"
          and r["witness_branch"] == "VZero" and elapsed < 60)
    criterion(1, ok, f"n_min={r['n_min']} ({r['supremum']}, {r['witness_branch']}, limit {r['n_limit']}) in {elapsed:.1f}s")
    assert ok


def test_criterion_02_plane_scan(capsys, criterion):
    code, rep = cli_report(capsys, "mcp-scan", "--space", "plane")
    r, w = rep["result"], rep["witness"]
    exact = pointwise_N((1.0, 0.0), (-3.0, 0.0))
    ok = (code == 0 and 4.999 <= r["n_min"] <= 5.0 + 1e-9 and abs(w["u"] + 3 * w["x"]) <= 1e-6
          and w["v"] == 0 and abs(exact - 5) <= 1e-12)
    criterion(2, ok, f"n_min={r['n_min']} witness (u,v)=({w['u']},{w['v']}) at x={w['x']}; N(-3,0)={exact!r}")
    assert ok


def test_criterion_03_doubling_counterexample(capsys, criterion):
    half4, _ = cli_report(capsys, "mcp-verify", "--space", "halfplane+", "--N", "4")
    dbl4, rep = cli_report(capsys, "mcp-verify", "--space", "double", "--N", "4")
    w = rep["witness"]
    q, lam, t = (w["x"], w["y"]), (w["u"], w["v"]), w["t"]
    witness_ok = (domain_mask(q[0], lam[0], lam[1], 0) and jacobian_ratio(q, lam, t) < t ** (4 - 2)
                  and pointwise_N(q, lam) > 4)
    dbl5, _ = cli_report(capsys, "mcp-verify", "--space", "double", "--N", "5")
    _, prod = cli_report(capsys, "mcp-scan", "--space", "product:1")
    p = prod["result"]
    prod_ok = 4.95 <= p["n_min"] <= 5.0 + 1e-9 and p["n_limit"] == 5.0
    ok = half4 == 0 and dbl4 == 2 and witness_ok and dbl5 == 0 and prod_ok
    criterion(3, ok, f"exits half/N4={half4} double/N4={dbl4} double/N5={dbl5}; "
                     f"witness ratio {jacobian_ratio(q, lam, t):.4f} < t^2={t * t:.4f}; "
                     f"product:1 n_min={p['n_min']} limit {p['n_limit']}")
    assert ok


def test_criterion_04_branch_identities(criterion):
    rng = np.random.default_rng(2024)
    n = 100_000
    v = rng.uniform(1e-4, math.pi - 1e-4, 4 * n)
    a = rng.uniform(-10, 10, 4 * n)
    keep = in_slope_domain(a, v) & (a != 0)
    a, v = a[keep][:n], v[keep][:n]
    assert a.size == n
    worst = 0.0
    coeffs_ok = True
    for ai, vi in zip(a.tolist(), v.tolist()):
        c = coeff_triple(vi)
        lhs = quadratic_form_check(ai, vi, 4)
        worst = max(worst, abs(lhs - (c.c2 * ai * ai + vi * c.c1 * ai + c.c0)))
        coeffs_ok &= c.c0 >= 0 and c.c2 >= 2 * vi * math.cos(vi)
    easier_ok = bool(np.all(easier_form(a, v) >= 0))
    res = verify_mcp(HALF, 3.9)
    u_w = res.witness.lam.u if res.witness else float("nan")
    ok = worst <= 1e-12 and coeffs_ok and easier_ok and not res.holds and u_w > 29 and res.witness.q.x == 1
    criterion(4, ok, f"max identity gap {worst:.2e} on {n} samples; c0>=0, c2>=2v cos v: {coeffs_ok}; "
                     f"easier form >= 0: {easier_ok}; N=3.9 witness u={u_w:.4g} at x=1")
    assert ok


def test_criterion_05_oracle_equivalences(criterion):
    rng = np.random.default_rng(55)
    n = 1000
    x, y = rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)
    u, v = rng.uniform(-2, 2, n), rng.uniform(-3, 3, n)
    t = rng.uniform(0, 1.5, n)
    xs, ys = rk4_flow(x, y, u, v, t)
    ex, ey = exp_arrays(x, y, u, v, t)
    rk4_err = float(np.max(np.hypot(ex - xs, ey - ys)))

    jac_err = 0.0
    for i in range(300):
        q, lam = (x[i], y[i]), (u[i], v[i])
        J = exp_jacobian(q, lam)
        if abs(J) < 1e-3:
            continue
        h = 1e-5
        du = (np.array(exp_map(q, (lam[0] + h, lam[1]))) - np.array(exp_map(q, (lam[0] - h, lam[1])))) / (2 * h)
        dv = (np.array(exp_map(q, (lam[0], lam[1] + h))) - np.array(exp_map(q, (lam[0], lam[1] - h)))) / (2 * h)
        jac_err = max(jac_err, abs(du[0] * dv[1] - du[1] * dv[0] - J) / abs(J))

    gauss_err = max(abs(fd_gauss_curvature((xx, 0.0), h=1e-3) + 2 / xx**2) for xx in np.linspace(0.5, 3, 26))
    ok = rk4_err <= 1e-8 and jac_err <= 1e-6 and gauss_err <= 1e-4
    criterion(5, ok, f"RK4 {rk4_err:.1e}; FD Jacobian rel {jac_err:.1e}; FD Gauss {gauss_err:.1e}")
    assert ok


@pytest.mark.slow
def test_criterion_06_double_equivalence(criterion):
    rng = np.random.default_rng(66)
    n = 1000
    P = np.column_stack([rng.uniform(0.01, 2, n), rng.uniform(-2, 2, n)])
    Q = np.column_stack([rng.uniform(0.01, 2, n), rng.uniform(-2, 2, n)])
    worst = max(double_equivalence_residual(tuple(p), tuple(q)) for p, q in zip(P, Q))
    gaps = []
    for p, q in zip(P[:4], Q[:4]):
        target = (-q[0], q[1])
        d = distance(tuple(p), target).value
        gaps.append(abs(graph_oracle_distance(tuple(p), target) - d) / d)
    ok = worst <= 1e-6 and max(gaps) <= 0.02
    criterion(6, ok, f"max residual {worst:.1e} over {n} pairs; graph oracle gap {max(gaps):.2%}")
    assert ok


def test_criterion_07_scaling(criterion):
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        p = (rng.uniform(-2, 2), rng.uniform(-2, 2))
        q = (rng.uniform(-2, 2), rng.uniform(-2, 2))
        d = distance(p, q).value
        for eps in (0.1, 0.5, 2.0):
            worst = max(worst, abs(distance(dilate(p, eps), dilate(q, eps)).value - eps * d))
    ok = worst <= 1e-9
    criterion(7, ok, f"max |d(dp, dq) - eps d(p, q)| = {worst:.1e} on 100 pairs x 3 eps")
    assert ok


@pytest.mark.slow
def test_criterion_08_cut_locus(criterion):
    pt, t = meeting_point((1, 0), 1, 1)
    meet_ok = math.hypot(pt.x + 1, pt.y - math.pi) <= 1e-9 and abs(t - math.pi) <= 1e-9
    rng = np.random.default_rng(88)
    land = 0.0
    for _ in range(200):
        q = (rng.uniform(-3, 3), rng.uniform(-3, 3))
        u, v = rng.uniform(-3, 3), rng.choice([-1, 1]) * rng.uniform(0.1, 3)
        m, _ = meeting_point(q, u, v)
        land = max(land, cut_locus(q).distance_to(m))
    gaps = {y: abs(graph_oracle_distance((0, 0), (0, y)) / math.sqrt(2 * math.pi * y) - 1) for y in (0.1, 1.0, 2.0)}
    ray = RaySpec((0, 0), (1, 1))
    flips = is_minimizing(ray, 0.9 * math.pi) and not is_minimizing(ray, 1.2 * math.pi)
    ok = meet_ok and land <= 1e-9 and max(gaps.values()) <= 0.02 and flips
    criterion(8, ok, f"meeting point {tuple(round(c, 12) for c in pt)} at t={t:.12f}; landing {land:.1e}; "
                     f"axis oracle gaps {', '.join(f'{g:.2%}' for g in gaps.values())}; flip at t*: {flips}")
    assert ok


def _random_disks(rng, n, half):
    out = []
    for _ in range(n):
        r = rng.uniform(0.1, 0.8)
        cx = rng.uniform(r + 0.05, 3.0) if half else rng.uniform(-3, 3)
        out.append(Disk(cx, rng.uniform(-2, 2), r))
    return out


@pytest.mark.slow
def test_criterion_09_set_contraction(criterion):
    rng = np.random.default_rng(99)
    ts = [0.25, 0.5, 0.75]
    fails, worst_margin, count = 0, math.inf, 0
    for space, N in ((HALF, 4), (PLANE, 5)):
        half = space is HALF
        for disk in _random_disks(rng, 20, half):
            q = (rng.uniform(0.05, 2.0) if half else rng.uniform(-2, 2), rng.uniform(-2, 2))
            results = set_contraction_check(q, disk, ts, N, space, n_samples=1_000_000, seed=count)
            for r in results:
                worst_margin = min(worst_margin, (r.lhs - r.rhs) / max(r.stderr, 1e-300))
                fails += not r.holds(3.0)
            count += 1
    ok = fails == 0
    criterion(9, ok, f"{count} disks x {len(ts)} times at 1e6 samples; violations beyond 3 sigma: {fails}; "
                     f"smallest margin {worst_margin:.1f} sigma")
    assert ok


def test_criterion_10_bakry_emery(criterion):
    xs = np.geomspace(0.1, 10, 21)
    Ns = np.concatenate([[2 + 1e-6, 2.01, 2.5], np.linspace(3, 100, 98)])
    all_neg, worst = True, 0.0
    for x in xs:
        for N in Ns:
            all_neg &= negativity_check((x, 0.0), N)
            ev = negativity_eigenvalues((x, 0.0), N)
            expected = np.sort([-1 / (x * x * (N - 2)), 0.0])
            worst = max(worst, float(np.max(np.abs(ev - expected) / np.maximum(1, np.abs(expected)))))
    ok = all_neg and worst <= 1e-10
    criterion(10, ok, f"negative on {xs.size} x {Ns.size} grid: {all_neg}; eigenvalue gap {worst:.1e}")
    assert ok
