"""Measure contraction MCP(0, N) for the Grushin plane and half-planes.

With phi_t the contraction toward q along the unique geodesics, the volume
of phi_t(A) is ``t^2 * int J(t lam) dlam`` over exp_q^{-1}(A).  MCP(0, N)
therefore reduces to the pointwise bound

    J(t u, t v) / J(u, v) >= t^(N - 2),    t in [0, 1],

over the injectivity domain, and taking logarithmic derivatives at t = 1 gives
the least admissible exponent at each covector (:func:`pointwise_N`).
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .core import (
    Covector,
    Point,
    SpaceKind,
    check_in_space,
    domain_mask,
    jacobian_arrays,
    sin_minus_wcos_over_w3,
    sinc,
)
from .distance import invert_exp_batch
from .errors import DomainError
from .regions import Region


class BranchTag(enum.Enum):
    V_ZERO = "VZero"
    U_ZERO = "UZero"
    GENERAL = "General"


def branch_of(lam) -> BranchTag:
    if lam[1] == 0:
        return BranchTag.V_ZERO
    if lam[0] == 0:
        return BranchTag.U_ZERO
    return BranchTag.GENERAL


@dataclass(frozen=True)
class RatioPoint:
    q: Point
    lam: Covector
    t: float
    a: float | None = None

    @classmethod
    def make(cls, q, lam, t=1.0):
        a = lam[1] * q[0] / lam[0] if lam[0] != 0 else None
        return cls(Point(*map(float, q)), Covector(*map(float, lam)), float(t), a)


@dataclass(frozen=True)
class CoeffTriple:
    c0: float
    c1: float
    c2: float


@dataclass(frozen=True)
class ScanConfig:
    """Sampling of the injectivity domain.

    ``u`` runs log-uniformly over +/-[u_min, u_max] times |x| (so the scan is
    invariant under dilations), plus u = 0; ``v`` runs uniformly over
    +/-[v_margin, pi - v_margin] plus v = 0.
    """

    u_min: float = 1e-3
    u_max: float = 1e4
    n_u: int = 400
    n_v: int = 300
    v_margin: float = 1e-4
    x_grid: tuple[float, ...] = (1.0,)
    t_grid: tuple[float, ...] = tuple(1 - np.geomspace(1e-6, 0.99, 24))
    tol: float = 1e-3
    refine: bool = True
    branches: tuple[str, ...] = ("VZero", "UZero", "General")

    def __post_init__(self):
        if not (0 < self.u_min < self.u_max) or self.n_u < 2 or self.n_v < 2:
            raise DomainError("invalid u/v grid")
        if not (0 < self.v_margin < math.pi / 2):
            raise DomainError("v_margin must lie in (0, pi/2)")
        if not self.x_grid or not self.t_grid:
            raise DomainError("x_grid and t_grid must be nonempty")
        if not all(0 < t < 1 for t in self.t_grid):
            raise DomainError("t_grid must lie in (0, 1)")
        if not self.tol > 0:
            raise DomainError("tol must be positive")

    def u_values(self, x: float) -> np.ndarray:
        scale = abs(x) if x != 0 else 1.0
        pos = np.geomspace(self.u_min, self.u_max, self.n_u) * scale
        return np.concatenate([-pos[::-1], [0.0], pos])

    def v_values(self) -> np.ndarray:
        pos = np.linspace(self.v_margin, math.pi - self.v_margin, self.n_v)
        return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass(frozen=True)
class Witness:
    q: Point
    lam: Covector
    t: float
    pointwise_n: float


@dataclass(frozen=True)
class ScanReport:
    """Result of :func:`scan_min_N`.

    ``n_min`` is the largest pointwise exponent found (grid plus local
    refinement).  When the maximiser sits on the edge of the u-range the
    supremum is only approached; ``n_limit`` then holds the |u| -> infinity
    limit along the witness direction and ``attained`` is False.
    """

    space: SpaceKind
    n_min: float
    n_limit: float
    attained: bool
    witness: RatioPoint
    witness_branch: BranchTag
    branch_sups: dict
    samples: int
    direct_estimate: float
    extra_dims: int = 0

    @property
    def supremum_status(self) -> str:
        return "attained" if self.attained else "approached"


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def f_a(a, v):
    """(1 + a v + a^2) sin v - v cos v."""
    return (1 + a * v + a * a) * np.sin(v) - v * np.cos(v)


def f_a_prime(a, v):
    return a * np.sin(v) + (a * v + a * a) * np.cos(v) + v * np.sin(v)


def n_v_zero(x, u):
    """Least exponent on horizontal geodesics: (4u^2 + 9xu + 6x^2) / (u^2 + 3xu + 3x^2)."""
    return (4 * u * u + 9 * x * u + 6 * x * x) / (u * u + 3 * x * u + 3 * x * x)


def n_u_zero(v):
    """Least exponent for u = 0: 1 + v cot v (equal to 2 at v = 0)."""
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1 + np.where(v == 0, 1.0, v * np.cos(v) / np.sin(v))
    return float(out) if out.ndim == 0 else out


def n_general(a, v):
    """Least exponent in the slope variable a = v x / u: 1 + v f_a'(v) / f_a(v)."""
    return 1 + v * f_a_prime(a, v) / f_a(a, v)


def pointwise_N_arrays(x, u, v):
    """2 + d/ds log J(s u, s v) at s = 1, vectorized and stable at v = 0."""
    s = sinc(v)
    h = sin_minus_wcos_over_w3(v)
    c = np.cos(v)
    num = u * u * (s - h) + u * x * c + x * x * (c - s)
    return 2 + num / jacobian_arrays(x, u, v)


def _check_domain(q, lam, space):
    space = SpaceKind.parse(space)
    check_in_space(q, space)
    if not domain_mask(q[0], lam[0], lam[1], space.side):
        raise DomainError(f"covector {tuple(lam)} is outside the injectivity domain at {tuple(q)}")
    return space


def jacobian_ratio(q, lam, t, space=SpaceKind.FULL_PLANE) -> float:
    """J(x, y, t u, t v) / J(x, y, u, v)."""
    _check_domain(q, lam, space)
    if not 0 < t <= 1:
        raise DomainError("t must lie in (0, 1]")
    x, u, v = q[0], lam[0], lam[1]
    return float(jacobian_arrays(x, t * u, t * v) / jacobian_arrays(x, u, v))


def pointwise_N(q, lam, space=SpaceKind.FULL_PLANE) -> float:
    """Least N for which the integrand inequality holds at (q, lam)."""
    _check_domain(q, lam, space)
    x, (u, v) = q[0], lam
    branch = branch_of(lam)
    if branch is BranchTag.V_ZERO:
        return float(n_v_zero(x, u))
    if branch is BranchTag.U_ZERO:
        return float(n_u_zero(v))
    return float(n_general(v * x / u, v))


def direct_N(q, lam, t_grid) -> float:
    """2 + max over t of log(ratio) / log(t): the exponent read off the ratio itself."""
    t = np.asarray(t_grid, dtype=float)
    x, u, v = q[0], lam[0], lam[1]
    ratio = jacobian_arrays(x, t * u, t * v) / jacobian_arrays(x, u, v)
    return float(2 + np.max(np.log(ratio) / np.log(t)))


C0_SERIES_BELOW = 1.0


def _c0(v: float) -> float:
    """int_0^v z (sin z - z cos z) dz, about v^5 / 15 near 0.

    The closed form 3 sin v - 3 v cos v - v^2 sin v cancels badly for small v,
    so the termwise-integrated Taylor series is used below C0_SERIES_BELOW.
    """
    if v >= C0_SERIES_BELOW:
        s, c = math.sin(v), math.cos(v)
        return 3 * s - 3 * v * c - v * v * s
    total = 0.0
    for k in range(1, 12):
        term = 2 * k / (math.factorial(2 * k + 1) * (2 * k + 3)) * v ** (2 * k + 3)
        total += term if k % 2 else -term
    return total


def coeff_triple(v: float) -> CoeffTriple:
    if not 0 < v < math.pi:
        raise DomainError("coefficients are defined for v in (0, pi)")
    s, c = math.sin(v), math.cos(v)
    return CoeffTriple(c0=_c0(v), c1=2 * s - v * c, c2=3 * s - v * c)


def in_slope_domain(a, v):
    """Half-plane constraint in slope coordinates: a^2 cos v + a sin v >= 0."""
    return a * a * np.cos(v) + a * np.sin(v) >= 0


def quadratic_form_check(a: float, v: float, N: float) -> float:
    """(N - 1) f_a(v) - v f_a'(v); nonnegative iff the exponent N works at (a, v)."""
    if not 0 < v < math.pi:
        raise DomainError("v must lie in (0, pi)")
    if a == 0 or not in_slope_domain(a, v):
        raise DomainError(f"(a, v) = ({a}, {v}) violates a^2 cos v + a sin v >= 0")
    return float((N - 1) * f_a(a, v) - v * f_a_prime(a, v))


def easier_form(a, v):
    """2 a^2 cos v + a (2 sin v - v cos v), a lower bound for the N = 4 form."""
    return 2 * a * a * np.cos(v) + a * (2 * np.sin(v) - v * np.cos(v))


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------


def _scan_one_x(x, side, cfg: ScanConfig):
    us, vs = cfg.u_values(x), cfg.v_values()
    U, V = np.meshgrid(us, vs, indexing="ij")
    ok = domain_mask(x, U, V, side)
    keep = {
        BranchTag.V_ZERO: V == 0,
        BranchTag.U_ZERO: (U == 0) & (V != 0),
        BranchTag.GENERAL: (U != 0) & (V != 0),
    }
    allowed = np.zeros_like(ok)
    for tag, mask in keep.items():
        if tag.value in cfg.branches:
            allowed |= mask
    ok &= allowed
    N = np.full(U.shape, -np.inf)
    N[ok] = pointwise_N_arrays(x, U[ok], V[ok])

    # ratio-based estimator on the same samples, accumulated one t at a time
    uu, vv = U[ok], V[ok]
    J1 = jacobian_arrays(x, uu, vv)
    direct = np.full(uu.shape, -np.inf)
    for t in cfg.t_grid:
        est = np.log(jacobian_arrays(x, t * uu, t * vv) / J1) / math.log(t)
        np.maximum(direct, est, out=direct)

    sups = {}
    for tag, mask in keep.items():
        sel = mask & ok
        if sel.any():
            sups[tag] = float(N[sel].max())
    flat = int(np.argmax(N))
    i, j = np.unravel_index(flat, N.shape)
    return {
        "x": x,
        "n": float(N[i, j]),
        "u": float(U[i, j]),
        "v": float(V[i, j]),
        "iu": int(i),
        "iv": int(j),
        "us": us,
        "vs": vs,
        "sups": sups,
        "count": int(ok.sum()),
        "direct": float(2 + direct.max()) if direct.size else -math.inf,
    }


def _refine(x, side, u, v, branch, best, cfg: ScanConfig, us, vs, iu, iv):
    """Polish the grid maximiser inside the neighbouring grid cells."""
    umax = cfg.u_max * (abs(x) if x != 0 else 1.0)

    def value(uu, vv):
        if abs(uu) > umax or abs(vv) > math.pi - cfg.v_margin:
            return -math.inf
        if not domain_mask(x, uu, vv, side):
            return -math.inf
        return float(pointwise_N_arrays(x, uu, vv))

    lo_u, hi_u = us[max(iu - 1, 0)], us[min(iu + 1, us.size - 1)]
    lo_v, hi_v = vs[max(iv - 1, 0)], vs[min(iv + 1, vs.size - 1)]
    if branch is BranchTag.V_ZERO and lo_u < hi_u:
        res = minimize_scalar(lambda s: -value(s, 0.0), bounds=(lo_u, hi_u), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(u))})
        cand = (float(res.x), 0.0)
    elif branch is BranchTag.U_ZERO and lo_v < hi_v:
        res = minimize_scalar(lambda s: -value(0.0, s), bounds=(lo_v, hi_v), method="bounded",
                              options={"xatol": 1e-12})
        cand = (0.0, float(res.x))
    elif branch is BranchTag.GENERAL:
        res = minimize(lambda z: -value(z[0], z[1]), x0=[u, v], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000})
        cand = (float(res.x[0]), float(res.x[1]))
        if cand[0] == 0 or cand[1] == 0:
            return u, v, best
    else:
        return u, v, best
    val = value(*cand)
    if val > best:
        return cand[0], cand[1], val
    return u, v, best


def _edge_limit(v: float) -> float:
    """lim_{|u| -> inf} of the pointwise exponent at fixed v: 1 + sinc(v) / h(v)."""
    return float(1 + sinc(v) / sin_minus_wcos_over_w3(v))


def scan_min_N(space=SpaceKind.HALF_PLANE_PLUS, cfg: ScanConfig | None = None, jobs: int = 1,
               extra_dims: int = 0) -> ScanReport:
    """Estimate the least N with MCP(0, N) by sampling the injectivity domain.

    ``extra_dims`` > 0 scans the product with a Euclidean factor R^k, whose
    Jacobian ratio picks up an extra factor t^k.
    """
    space = SpaceKind.parse(space)
    cfg = cfg or ScanConfig()
    if extra_dims < 0:
        raise DomainError("extra_dims must be >= 0")
    side = space.side
    xs = [abs(x) * side if side else x for x in cfg.x_grid]
    if jobs > 1 and len(xs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda x: _scan_one_x(x, side, cfg), xs))
    else:
        parts = [_scan_one_x(x, side, cfg) for x in xs]

    # deterministic reduction: first maximal entry in x_grid order
    best = max(range(len(parts)), key=lambda k: (parts[k]["n"], -k))
    part = parts[best]
    x, u, v, n = part["x"], part["u"], part["v"], part["n"]
    branch = branch_of((u, v))
    if cfg.refine:
        u, v, n = _refine(x, side, u, v, branch, n, cfg, part["us"], part["vs"], part["iu"], part["iv"])
        branch = branch_of((u, v))

    sups = {}
    for p in parts:
        for tag, val in p["sups"].items():
            sups[tag] = max(sups.get(tag, -math.inf), val)
    sups[branch] = max(sups.get(branch, -math.inf), n)

    umax = cfg.u_max * (abs(x) if x != 0 else 1.0)
    on_edge = u != 0 and abs(u) >= umax * (1 - 1e-12)
    limit = _edge_limit(v) if on_edge else n
    direct = max(max(p["direct"] for p in parts), direct_N((x, 0.0), (u, v), cfg.t_grid))
    witness = RatioPoint.make((x, 0.0), (u, v), 1.0)
    return ScanReport(
        space=space,
        n_min=n + extra_dims,
        n_limit=limit + extra_dims,
        attained=not on_edge,
        witness=witness,
        witness_branch=branch,
        branch_sups={tag: val + extra_dims for tag, val in sups.items()},
        samples=sum(p["count"] for p in parts),
        direct_estimate=direct + extra_dims,
        extra_dims=extra_dims,
    )


def product_min_N(report: ScanReport, k: int) -> float:
    """Least exponent for the product with R^k: the dimensional parameter adds."""
    if k < 0:
        raise DomainError("k must be >= 0")
    return report.n_min + k


@dataclass(frozen=True)
class VerifyResult:
    holds: bool
    witness: Witness | None
    report: ScanReport


def verify_mcp(space, N: float, cfg: ScanConfig | None = None, extra_dims: int = 0,
               report: ScanReport | None = None) -> VerifyResult:
    """Check MCP(0, N) on the sampled domain; on failure return the worst witness."""
    if not N > 2:
        raise DomainError("N must exceed 2")
    cfg = cfg or ScanConfig()
    report = report or scan_min_N(space, cfg, extra_dims=extra_dims)
    if report.n_min <= N + cfg.tol:
        return VerifyResult(True, None, report)
    w = report.witness
    x, (u, v) = w.q[0], w.lam
    t = np.asarray(cfg.t_grid)
    ratio = jacobian_arrays(x, t * u, t * v) / jacobian_arrays(x, u, v) * t**extra_dims
    gap = t ** (N - 2) - ratio
    tw = float(t[int(np.argmax(gap))])
    return VerifyResult(False, Witness(w.q, w.lam, tw, report.n_min), report)


# ---------------------------------------------------------------------------
# Set-level contraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionResult:
    lhs: float
    rhs: float
    stderr: float
    n_used: int
    n_discarded: int

    def holds(self, sigmas: float = 3.0) -> bool:
        return self.lhs >= self.rhs - sigmas * self.stderr


def set_contraction_check(q, A: Region, t, N: float, space=SpaceKind.FULL_PLANE,
                          n_samples: int = 100_000, seed: int = 0, chunk: int = 250_000):
    """Monte Carlo comparison of m(phi_t(A)) with t^N m(A).

    Uniform samples p of A are pulled back to covectors lam = exp_q^{-1}(p);
    the change of variables gives m(phi_t(A)) = m(A) * E[t^2 J(t lam) / J(lam)].
    Samples on the cut locus (a null set) are discarded.  ``t`` may be a
    sequence, in which case one pull-back serves every t and a list is returned.
    """
    space = SpaceKind.parse(space)
    check_in_space(q, space)
    if not A.inside(space.side):
        raise DomainError("region must lie inside the space")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((ts < 0) | (ts > 1)):
        raise DomainError("t must lie in [0, 1]")
    area = A.area()
    rng = np.random.default_rng(seed)
    total = np.zeros(ts.size)
    total_sq = np.zeros(ts.size)
    used = 0
    for start in range(0, n_samples, chunk):
        m = min(chunk, n_samples - start)
        px, py = A.sample(rng, m)
        u, v, ok = invert_exp_batch(q, px, py)
        u, v = u[ok], v[ok]
        J1 = jacobian_arrays(q[0], u, v)
        for k, tk in enumerate(ts):
            w = tk * tk * jacobian_arrays(q[0], tk * u, tk * v) / J1
            total[k] += float(w.sum())
            total_sq[k] += float((w * w).sum())
        used += int(ok.sum())
    if used == 0:
        raise DomainError("no usable samples")
    out = []
    for k, tk in enumerate(ts):
        mean = total[k] / used
        var = max(total_sq[k] / used - mean * mean, 0.0)
        out.append(ContractionResult(area * mean, float(tk) ** N * area, area * math.sqrt(var / used),
                                     used, n_samples - used))
    return out if np.ndim(t) else out[0]
