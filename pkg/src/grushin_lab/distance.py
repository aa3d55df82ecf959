"""Grushin distance by inverting the exponential map.

Inside the injectivity domain ``D_q = {H != 0, |v| < pi}`` the exponential map
is a diffeomorphism, so ``d(q, p) = sqrt(2 H(lam))`` for the unique
``lam in D_q`` with ``exp_q(lam) = p``.  Points on the cut locus are reached
only from the closed boundary ``|v| = pi``, where the map is still explicit.
A Dijkstra shortest path on a grid gives an independent upper estimate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .core import (
    Covector,
    SpaceKind,
    check_in_space,
    exp_arrays,
    exp_differential,
    hamiltonian_arrays,
)
from .errors import CutLocusPoint, DomainError, NotInImage, Unreachable

V_EDGE = math.pi - 1e-6
NEWTON_MAX_ITER = 80
NEWTON_MAX_HALVINGS = 40
NEWTON_TOL = 1e-12
ACCEPT_TOL = 1e-10
SEED_GRID = 64
SEEDS_TRIED = 8


class DistanceStatus(enum.Enum):
    UNIQUE = "Unique"
    CUT_POINT = "CutPoint"
    ORACLE_ONLY = "OracleOnly"


class DistanceMethod(enum.Enum):
    NEWTON = "Newton"
    GRAPH = "Graph"


@dataclass(frozen=True)
class DistanceResult:
    value: float
    witness: Covector | None
    status: DistanceStatus
    method: DistanceMethod


@dataclass(frozen=True)
class GridOracleConfig:
    """Grid for :func:`graph_oracle_distance`.

    ``h`` is the nominal spacing (chosen from ``target_nodes`` when None);
    ``bbox`` is ``(xmin, xmax, ymin, ymax)`` (derived from an admissible-path
    bound when None).  ``radius`` selects the stencil: every primitive lattice
    offset with max(|i|, |j|) <= radius.  ``max_nodes`` and ``max_edges``
    bound memory; larger grids raise DomainError.
    """

    h: float | None = None
    bbox: tuple[float, float, float, float] | None = None
    radius: int = 4
    axis_policy: str = "InfiniteVerticalCostOnAxis"
    target_nodes: int = 200_000
    max_nodes: int = 1_500_000
    max_edges: int = 20_000_000

    def __post_init__(self):
        if self.h is not None and not self.h > 0:
            raise DomainError("grid spacing must be positive")
        if self.axis_policy != "InfiniteVerticalCostOnAxis":
            raise DomainError(f"unsupported axis policy {self.axis_policy!r}")
        if self.radius < 1:
            raise DomainError("stencil radius must be >= 1")


def _tol(p) -> float:
    return ACCEPT_TOL * max(1.0, abs(p[0]), abs(p[1]))


def path_length_bound(q, p) -> float:
    """Length of the best horizontal-vertical-horizontal admissible path."""
    dx = abs(q[0] - p[0])
    dy = abs(q[1] - p[1])
    if dy == 0:
        return dx
    # vertical leg at abscissa s costs dy / |s|; optimum lies beyond both points
    reach = max(abs(q[0]), abs(p[0]), math.sqrt(dy))
    s = np.concatenate([np.geomspace(1e-3, 4 * reach + 1, 400), -np.geomspace(1e-3, 4 * reach + 1, 400)])
    total = np.abs(s - q[0]) + dy / np.abs(s) + np.abs(s - p[0])
    return float(total.min())


# ---------------------------------------------------------------------------
# Newton inversion
# ---------------------------------------------------------------------------


def _newton(x, y, px, py, u, v):
    """Damped Newton for exp_(x, y)(u, v) = (px, py), vectorized over seeds.

    Steps are backtracked until the residual decreases and |v| < pi.
    """
    u = np.array(u, dtype=float)
    v = np.array(v, dtype=float)
    px = np.broadcast_to(np.asarray(px, dtype=float), u.shape)
    py = np.broadcast_to(np.asarray(py, dtype=float), u.shape)

    def residual(uu, vv, tx, ty):
        ex, ey = exp_arrays(x, y, uu, vv)
        return ex - tx, ey - ty

    fx, fy = residual(u, v, px, py)
    res = np.hypot(fx, fy)
    active = res > NEWTON_TOL
    for _ in range(NEWTON_MAX_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ua, va = u[idx], v[idx]
        a, b, c, d = exp_differential(x, ua, va)
        det = a * d - b * c
        with np.errstate(divide="ignore", invalid="ignore"):
            du = -(d * fx[idx] - b * fy[idx]) / det
            dv = -(-c * fx[idx] + a * fy[idx]) / det
        bad = ~np.isfinite(du) | ~np.isfinite(dv)
        du[bad] = 0.0
        dv[bad] = 0.0
        step = np.ones(idx.size)
        pending = ~bad
        new_u, new_v = ua.copy(), va.copy()
        new_fx, new_fy = fx[idx].copy(), fy[idx].copy()
        new_res = res[idx].copy()
        for _ in range(NEWTON_MAX_HALVINGS):
            if not pending.any():
                break
            k = np.flatnonzero(pending)
            cu = ua[k] + step[k] * du[k]
            cv = va[k] + step[k] * dv[k]
            inside = np.abs(cv) < math.pi
            gx, gy = residual(cu, cv, px[idx][k], py[idx][k])
            r = np.hypot(gx, gy)
            good = inside & (r < new_res[k])
            kg = k[good]
            new_u[kg], new_v[kg] = cu[good], cv[good]
            new_fx[kg], new_fy[kg], new_res[kg] = gx[good], gy[good], r[good]
            pending[kg] = False
            step[k[~good]] *= 0.5
        stalled = pending | bad
        u[idx], v[idx] = new_u, new_v
        fx[idx], fy[idx], res[idx] = new_fx, new_fy, new_res
        active[idx[stalled]] = False
        active &= res > NEWTON_TOL
    return u, v, res


def _seed_grid(q, radius: float, n: int = SEED_GRID):
    # sinh spacing in u keeps seeds dense near u = 0 while reaching |u| = radius
    s = np.linspace(-1.0, 1.0, n)
    us = radius * np.sinh(3 * s) / math.sinh(3)
    vs = np.linspace(-V_EDGE, V_EDGE, n)
    U, V = np.meshgrid(us, vs, indexing="ij")
    U, V = U.ravel(), V.ravel()
    X, Y = exp_arrays(q[0], q[1], U, V)
    return U, V, X, Y


def boundary_preimages(q, p, tol: float | None = None) -> list[Covector]:
    """Covectors on the closed boundary |v| = pi whose geodesic ends at p.

    At |v| = pi every geodesic from (x0, y0) ends on the line x = -x0 at
    height y0 +/- (pi x0^2 / 2 + u^2 / (2 pi)), so the preimages are explicit.
    """
    tol = _tol(p) if tol is None else tol
    x0, y0 = q
    dy = p[1] - y0
    if abs(p[0] + x0) > tol or dy == 0:
        return []
    sigma = math.copysign(1.0, dy)
    u2 = 2 * math.pi * (abs(dy) - math.pi * x0 * x0 / 2)
    if u2 < -tol:
        return []
    u = math.sqrt(max(u2, 0.0))
    roots = [u, -u] if u > math.sqrt(tol) else [0.0]
    out = []
    for r in roots:
        if hamiltonian_arrays(x0, r, sigma * math.pi) == 0:
            continue
        ex, ey = exp_arrays(x0, y0, r, sigma * math.pi)
        if math.hypot(ex - p[0], ey - p[1]) <= 10 * tol:
            out.append(Covector(r, sigma * math.pi))
    return out


def invert_exp(q, p, space=SpaceKind.FULL_PLANE, seed: Covector | None = None) -> Covector:
    """Return the unique covector in D_q (or D_q^{+/-}) with exp_q(lam) = p.

    ``seed`` is tried first (warm start); otherwise damped Newton runs from the
    best points of a seed grid covering |v| < pi.
    """
    space = SpaceKind.parse(space)
    check_in_space(q, space)
    check_in_space(p, space)
    if q[0] == p[0] and q[1] == p[1]:
        raise DomainError("invert_exp needs p != q")
    tol = _tol(p)
    cands = boundary_preimages(q, p)
    if cands:
        raise CutLocusPoint(f"{tuple(p)} lies on the cut locus of {tuple(q)}", cands)

    if seed is not None:
        u, v, res = _newton(q[0], q[1], p[0], p[1], [seed[0]], [seed[1]])
        if res[0] <= tol and abs(v[0]) < math.pi and hamiltonian_arrays(q[0], u[0], v[0]) > 0:
            return Covector(float(u[0]), float(v[0]))

    radius = 1.25 * path_length_bound(q, p) + 1e-9
    U, V, X, Y = _seed_grid(q, radius)
    order = np.argsort(np.hypot(X - p[0], Y - p[1]), kind="stable")[:SEEDS_TRIED]
    u, v, res = _newton(q[0], q[1], p[0], p[1], U[order], V[order])
    ok = (res <= tol) & (np.abs(v) < math.pi) & (hamiltonian_arrays(q[0], u, v) > 0)
    if not ok.any():
        # second chance from a wider fan of seeds before giving up
        order = np.argsort(np.hypot(X - p[0], Y - p[1]), kind="stable")[SEEDS_TRIED:8 * SEEDS_TRIED]
        u, v, res = _newton(q[0], q[1], p[0], p[1], U[order], V[order])
        ok = (res <= tol) & (np.abs(v) < math.pi) & (hamiltonian_arrays(q[0], u, v) > 0)
    if ok.any():
        H = hamiltonian_arrays(q[0], u, v)
        best = np.flatnonzero(ok)[np.argmin(H[ok])]
        return Covector(float(u[best]), float(v[best]))
    raise NotInImage(f"no preimage of {tuple(p)} found (best residual {res.min():.3g})")


def invert_exp_batch(q, px, py, seed_grid: int = 192):
    """Invert exp_q for many targets at once.

    Seeds come from the nearest image of a fixed seed grid; targets that fail
    are retried from further neighbours.  Returns ``(u, v, ok)``; entries with
    ``ok`` false are cut points or failures and are left as NaN.
    """
    px = np.asarray(px, dtype=float).ravel()
    py = np.asarray(py, dtype=float).ravel()
    n = px.size
    u_out = np.full(n, np.nan)
    v_out = np.full(n, np.nan)
    ok = np.zeros(n, dtype=bool)
    if n == 0:
        return u_out, v_out, ok
    far = max(path_length_bound(q, (a, b)) for a, b in zip(
        [px.min(), px.max(), px.min(), px.max()], [py.min(), py.min(), py.max(), py.max()]))
    U, V, X, Y = _seed_grid(q, 1.25 * far + 1e-9, seed_grid)
    tree = cKDTree(np.column_stack([X, Y]))
    tol = ACCEPT_TOL * np.maximum(1.0, np.maximum(np.abs(px), np.abs(py)))
    same = (px == q[0]) & (py == q[1])
    todo = np.flatnonzero(~same)
    for k in range(4):
        if todo.size == 0:
            break
        _, nn = tree.query(np.column_stack([px[todo], py[todo]]), k=k + 1)
        nn = nn if k == 0 else nn[:, k]
        u, v, res = _newton(q[0], q[1], px[todo], py[todo], U[nn], V[nn])
        good = (res <= tol[todo]) & (np.abs(v) < math.pi) & (hamiltonian_arrays(q[0], u, v) > 0)
        u_out[todo[good]] = u[good]
        v_out[todo[good]] = v[good]
        ok[todo[good]] = True
        todo = todo[~good]
    return u_out, v_out, ok


# ---------------------------------------------------------------------------
# Distance
# ---------------------------------------------------------------------------


def distance(q, p, space=SpaceKind.FULL_PLANE, oracle: GridOracleConfig | None = None,
             seed: Covector | None = None) -> DistanceResult:
    space = SpaceKind.parse(space)
    check_in_space(q, space)
    check_in_space(p, space)
    if q[0] == p[0] and q[1] == p[1]:
        return DistanceResult(0.0, None, DistanceStatus.UNIQUE, DistanceMethod.NEWTON)
    try:
        lam = invert_exp(q, p, space, seed=seed)
    except CutLocusPoint as exc:
        lengths = [math.sqrt(2 * hamiltonian_arrays(q[0], c.u, c.v)) for c in exc.candidates]
        i = int(np.argmin(lengths))
        return DistanceResult(lengths[i], exc.candidates[i], DistanceStatus.CUT_POINT, DistanceMethod.NEWTON)
    except NotInImage:
        value = graph_oracle_distance(q, p, space, oracle or GridOracleConfig())
        return DistanceResult(value, None, DistanceStatus.ORACLE_ONLY, DistanceMethod.GRAPH)
    value = math.sqrt(2 * hamiltonian_arrays(q[0], lam.u, lam.v))
    return DistanceResult(value, lam, DistanceStatus.UNIQUE, DistanceMethod.NEWTON)


# ---------------------------------------------------------------------------
# Grid oracle
# ---------------------------------------------------------------------------


def segment_length(xa, xb, dy):
    """Exact Grushin length of the straight segment from (xa, .) to (xb, . + dy).

    Vectorized over ``xa, xb``.  Segments with vertical motion that touch or
    cross the y-axis are not admissible and get infinite length.
    """
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    xa, xb = np.broadcast_arrays(xa, xb)
    if dy == 0:
        return np.abs(xb - xa)
    out = np.full(xa.shape, np.inf)
    vert = xa == xb
    with np.errstate(divide="ignore"):
        out[vert] = abs(dy) / np.abs(xa[vert])
    slanted = ~vert & (xa * xb > 0)
    za, zb = np.abs(xa[slanted]), np.abs(xb[slanted])
    c = np.abs(dy / (xb[slanted] - xa[slanted]))

    def prim(z):
        r = np.hypot(z, c)
        return r - c * np.log((c + r) / z)

    out[slanted] = np.abs(prim(zb) - prim(za))
    return out


def _stencil(radius: int):
    offs = []
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            if (di, dj) != (0, 0) and math.gcd(abs(di), abs(dj)) == 1:
                offs.append((di, dj))
    return offs


def _default_bbox(q, p, space: SpaceKind):
    D = path_length_bound(q, p)
    xlo = (q[0] + p[0] - D) / 2
    xhi = (q[0] + p[0] + D) / 2
    if space.side > 0:
        xlo = max(xlo, 0.0)
    elif space.side < 0:
        xhi = min(xhi, 0.0)
    # |dy/ds| <= |x(s)| <= |x_start| + s along a unit-speed curve
    d1 = np.linspace(0.0, D, 2001)
    d2 = D - d1
    up_q = q[1] + abs(q[0]) * d1 + d1**2 / 2
    up_p = p[1] + abs(p[0]) * d2 + d2**2 / 2
    lo_q = q[1] - abs(q[0]) * d1 - d1**2 / 2
    lo_p = p[1] - abs(p[0]) * d2 - d2**2 / 2
    yhi = float(np.max(np.minimum(up_q, up_p)))
    ylo = float(np.min(np.maximum(lo_q, lo_p)))
    return xlo, xhi, min(ylo, q[1], p[1]), max(yhi, q[1], p[1])


def _axis_ticks(a: float, b: float, lo: float, hi: float, h: float):
    """Lattice through a and b (when possible) covering [lo, hi], spacing ~h."""
    if a != b:
        m = max(1, round(abs(b - a) / h))
        step = abs(b - a) / m
    else:
        step = h
    start = a - math.ceil((a - lo) / step - 1e-9) * step
    count = int(math.floor((hi - start) / step + 1e-9)) + 1
    ticks = start + step * np.arange(count)
    return ticks, step, start


def graph_oracle_distance(q, p, space=SpaceKind.FULL_PLANE, cfg: GridOracleConfig | None = None) -> float:
    """Shortest admissible polyline on a lattice, an upper estimate of d(q, p).

    Edges are straight segments whose exact Grushin length is used as weight,
    so every lattice path is a genuine admissible curve.
    """
    space = SpaceKind.parse(space)
    cfg = cfg or GridOracleConfig()
    check_in_space(q, space)
    check_in_space(p, space)
    if q[0] == p[0] and q[1] == p[1]:
        return 0.0
    xlo, xhi, ylo, yhi = cfg.bbox or _default_bbox(q, p, space)
    for pt in (q, p):
        if not (xlo - 1e-12 <= pt[0] <= xhi + 1e-12 and ylo - 1e-12 <= pt[1] <= yhi + 1e-12):
            raise DomainError(f"bbox does not contain {tuple(pt)}")
    if cfg.h is not None:
        hx = hy = cfg.h
    else:
        # square node counts keep the lattice shape invariant under dilations
        side = math.sqrt(cfg.target_nodes)
        hx = max(xhi - xlo, 1e-9) / side
        hy = max(yhi - ylo, 1e-9) / side
    xs, hx, _ = _axis_ticks(q[0], p[0], xlo, xhi, hx)
    ys, hy, _ = _axis_ticks(q[1], p[1], ylo, yhi, hy)
    if space.side:
        xs = xs[space.side * xs >= -1e-12 * hx]
    nx, ny = xs.size, ys.size
    stencil = _stencil(cfg.radius)
    if nx * ny > cfg.max_nodes:
        raise DomainError(f"grid of {nx}x{ny} nodes exceeds max_nodes={cfg.max_nodes}; raise h or shrink bbox")
    if nx * ny * len(stencil) > cfg.max_edges:
        raise DomainError(f"grid of {nx}x{ny} nodes with {len(stencil)} offsets exceeds max_edges={cfg.max_edges}")

    node = np.arange(nx * ny, dtype=np.int32).reshape(nx, ny)
    rows, cols, wts = [], [], []
    for di, dj in stencil:
        i0, i1 = max(0, -di), nx - max(0, di)
        j0, j1 = max(0, -dj), ny - max(0, dj)
        if i1 <= i0 or j1 <= j0:
            continue
        w_col = segment_length(xs[i0:i1], xs[i0 + di:i1 + di], dj * hy)
        finite = np.isfinite(w_col)
        if not finite.any():
            continue
        ii = np.arange(i0, i1)[finite]
        src = node[ii, j0:j1]
        dst = node[ii + di, j0 + dj:j1 + dj]
        rows.append(src.ravel())
        cols.append(dst.ravel())
        wts.append(np.repeat(w_col[finite], j1 - j0))
    graph = coo_matrix(
        (np.concatenate(wts), (np.concatenate(rows), np.concatenate(cols))), shape=(nx * ny, nx * ny)
    ).tocsr()

    def locate(pt):
        i = int(np.argmin(np.abs(xs - pt[0])))
        j = int(np.argmin(np.abs(ys - pt[1])))
        return node[i, j]

    src, dst = locate(q), locate(p)
    dist = dijkstra(graph, directed=True, indices=src)
    value = float(dist[dst])
    if not math.isfinite(value):
        raise Unreachable(f"{tuple(p)} not reachable from {tuple(q)} inside bbox")
    return value
