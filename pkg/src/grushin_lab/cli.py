"""``grushin-lab`` command line.

Every subcommand prints a JSON report (or CSV where noted) to stdout or to
``--out``.  Exit codes: 0 success, 1 domain or validation error, 2 when
``mcp-verify`` finds a violation, 3 numerical failure, 64 usage error.

Options may also come from a JSON object passed with ``--config``; explicit
flags win over the file, which wins over the built-in defaults.  Coordinates
are written ``x,y``; use ``--q=-1,0`` for values starting with a minus sign.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import curvature as curv
from . import report as rep
from .core import (
    GeodesicSpec,
    SpaceKind,
    check_in_space,
    exp_jacobian,
    exp_map,
    geodesic_samples,
    hamiltonian,
    in_injectivity_domain,
)
from .cutlocus import cut_locus, meeting_point
from .distance import GridOracleConfig, distance, graph_oracle_distance
from .errors import DomainError, GrushinError, NumericalFailure
from .gluing import double_equivalence_residual
from .mcp import ScanConfig, branch_of, pointwise_N, scan_min_N, set_contraction_check, verify_mcp
from .plotting import cut_rows, momentum_u, ray_fan, render_figure
from .regions import parse_region

EXIT_OK, EXIT_DOMAIN, EXIT_VERIFY, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3, 64

FIGURE_BASES = {"origin": (0.0, 0.0), "q10": (1.0, 0.0)}

DEFAULTS = {
    "exp": {"q": None, "lam": None, "t": 1.0},
    "geodesic": {"q": None, "lam": None, "t": 1.0, "n": 101, "format": "json"},
    "distance": {"q": None, "p": None, "space": "plane", "oracle": False, "h": None, "radius": 4},
    "mcp-scan": {"space": "halfplane+", "base": "halfplane+", "u_min": 1e-3, "u_max": 1e4, "n_u": 400,
                 "n_v": 300, "v_margin": 1e-4, "x_grid": [1.0], "t_grid": None, "tol": 1e-3, "refine": True},
    "contract": {"q": None, "region": None, "t": [0.25, 0.5, 0.75], "N": None, "space": "halfplane+",
                 "samples": 100_000, "seed": 0},
    "double-check": {"p": None, "q": None, "pairs": 100, "seed": 0, "oracle": False},
    "curvature": {"p": None, "N": None, "space": "plane"},
    "cutlocus": {"q": None, "u": None, "v": None, "length": 3.0, "n": 2, "format": "json"},
    "figure": {"out_dir": ".", "n": 200, "length": 4.0, "png": False},
}
DEFAULTS["mcp-verify"] = {**DEFAULTS["mcp-scan"], "N": None}
KNOWN_KEYS = {k for d in DEFAULTS.values() for k in d}


class UsageError(Exception):
    """A required option is missing."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Value parsing (shared by flags and config files)
# ---------------------------------------------------------------------------


def _floats(value, n=None, what="value"):
    if isinstance(value, str):
        parts = [s for s in value.split(",") if s.strip()]
        try:
            out = [float(s) for s in parts]
        except ValueError:
            raise DomainError(f"bad {what}: {value!r}") from None
    elif isinstance(value, (int, float)):
        out = [float(value)]
    else:
        out = [float(s) for s in value]
    if n is not None and len(out) != n:
        raise DomainError(f"{what} needs {n} comma-separated numbers, got {value!r}")
    if not all(math.isfinite(x) for x in out):
        raise DomainError(f"{what} must be finite")
    return out


def _pair(value, what):
    if value is None:
        raise UsageError(f"missing --{what}")
    return tuple(_floats(value, 2, what))


def _space(text, base="halfplane+"):
    """Space name to (SpaceKind, extra Euclidean dimensions)."""
    text = str(text)
    if text.startswith("product:"):
        try:
            k = int(text.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad product space {text!r}") from None
        if k < 0:
            raise DomainError("product dimension must be >= 0")
        return SpaceKind.parse(base), k
    return SpaceKind.parse(text), 0


def _scan_config(cfg) -> ScanConfig:
    kw = dict(u_min=float(cfg["u_min"]), u_max=float(cfg["u_max"]), n_u=int(cfg["n_u"]), n_v=int(cfg["n_v"]),
              v_margin=float(cfg["v_margin"]), x_grid=tuple(_floats(cfg["x_grid"], what="x_grid")),
              tol=float(cfg["tol"]), refine=bool(cfg["refine"]))
    if cfg.get("t_grid") is not None:
        kw["t_grid"] = tuple(_floats(cfg["t_grid"], what="t_grid"))
    return ScanConfig(**kw)


def _jobs(flag):
    if flag is not None:
        return flag
    env = os.environ.get("GRUSHIN_LAB_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"GRUSHIN_LAB_JOBS must be an integer, got {env!r}") from None
    return 1


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_exp(cfg, ctx):
    q, lam = _pair(cfg["q"], "q"), _pair(cfg["lam"], "lam")
    t = float(cfg["t"])
    p = exp_map(q, lam, t)
    diag = {"hamiltonian": hamiltonian(q, lam), "length": t * math.sqrt(2 * hamiltonian(q, lam))}
    if lam[0] != 0 or lam[1] != 0 or q[0] != 0:
        diag["jacobian"] = exp_jacobian(q, (t * lam[0], t * lam[1]))
    return {"x": p.x, "y": p.y}, diag, None


def cmd_geodesic(cfg, ctx):
    q, lam = _pair(cfg["q"], "q"), _pair(cfg["lam"], "lam")
    t, n = float(cfg["t"]), int(cfg["n"])
    pts = geodesic_samples(GeodesicSpec(q, (t * lam[0], t * lam[1])), n)
    ts = np.linspace(0.0, t, n)
    us = momentum_u(q[0], lam[0], lam[1], ts)
    rows = [(float(ts[k]), float(pts[k][0]), float(pts[k][1]), float(us[k]), float(lam[1])) for k in range(n)]
    if cfg["format"] == "csv":
        ctx["csv"] = (rows, ["t", "x", "y", "u", "v"])
        return None, None, None
    result = {"t": [r[0] for r in rows], "x": [r[1] for r in rows], "y": [r[2] for r in rows],
              "u": [r[3] for r in rows], "v": [r[4] for r in rows]}
    diag = {"length": t * math.sqrt(2 * hamiltonian(q, lam)),
            "minimizing": in_injectivity_domain(q, (t * lam[0], t * lam[1]))}
    return result, diag, None


def cmd_distance(cfg, ctx):
    q, p = _pair(cfg["q"], "q"), _pair(cfg["p"], "p")
    space, extra = _space(cfg["space"])
    if extra:
        raise DomainError("distance is defined on plane, halfplane+ and halfplane-")
    oracle_cfg = GridOracleConfig(h=None if cfg["h"] is None else float(cfg["h"]), radius=int(cfg["radius"]))
    res = distance(q, p, space, oracle=oracle_cfg)
    result = {"value": res.value, "status": res.status, "method": res.method}
    diag = {}
    if cfg["oracle"]:
        g = graph_oracle_distance(q, p, space, oracle_cfg)
        diag = {"oracle_value": g, "oracle_relative_gap": (g - res.value) / res.value if res.value else 0.0}
    witness = {"u": res.witness.u, "v": res.witness.v} if res.witness is not None else None
    return result, diag, witness


def _scan_result(report, space_name):
    w = report.witness
    result = {
        "space": space_name,
        "extra_dims": report.extra_dims,
        "n_min": report.n_min,
        "n_limit": report.n_limit,
        "supremum": report.supremum_status,
        "witness_branch": report.witness_branch,
        "branch_sups": {tag.value: report.branch_sups[tag] for tag in sorted(report.branch_sups, key=lambda b: b.value)},
        "samples": report.samples,
        "direct_estimate": report.direct_estimate,
    }
    witness = {"x": w.q[0], "y": w.q[1], "u": w.lam[0], "v": w.lam[1], "a": w.a,
               "branch": report.witness_branch}
    return result, witness


def cmd_mcp_scan(cfg, ctx):
    space, extra = _space(cfg["space"], cfg["base"])
    report = scan_min_N(space, _scan_config(cfg), jobs=ctx["jobs"], extra_dims=extra)
    result, witness = _scan_result(report, str(cfg["space"]))
    diag = {"resolved_space": space, "pointwise_at_witness": pointwise_N(
        report.witness.q, report.witness.lam) + extra}
    return result, diag, witness


def cmd_mcp_verify(cfg, ctx):
    if cfg["N"] is None:
        raise UsageError("missing --N")
    N = float(cfg["N"])
    space, extra = _space(cfg["space"], cfg["base"])
    scfg = _scan_config(cfg)
    report = scan_min_N(space, scfg, jobs=ctx["jobs"], extra_dims=extra)
    res = verify_mcp(space, N, scfg, extra_dims=extra, report=report)
    result = {"holds": res.holds, "N": N, "n_min": report.n_min, "n_limit": report.n_limit,
              "supremum": report.supremum_status}
    witness = None
    if not res.holds:
        w = res.witness
        witness = {"x": w.q[0], "y": w.q[1], "u": w.lam[0], "v": w.lam[1], "t": w.t,
                   "pointwise_n": w.pointwise_n, "branch": branch_of(w.lam)}
        ctx["exit"] = EXIT_VERIFY
    return result, {"resolved_space": space, "tol": scfg.tol}, witness


def cmd_contract(cfg, ctx):
    q = _pair(cfg["q"], "q")
    if cfg["region"] is None or cfg["N"] is None:
        raise UsageError("contract needs --region and --N")
    region = parse_region(cfg["region"])
    space, extra = _space(cfg["space"])
    if extra:
        raise DomainError("contract works on plane, halfplane+ or halfplane-")
    ts = _floats(cfg["t"], what="t")
    N = float(cfg["N"])
    results = set_contraction_check(q, region, ts, N, space, n_samples=int(cfg["samples"]), seed=int(cfg["seed"]))
    rows = [{"t": t, "lhs": r.lhs, "rhs": r.rhs, "stderr": r.stderr, "holds": r.holds()}
            for t, r in zip(ts, results)]
    result = {"area": region.area(), "holds": all(r["holds"] for r in rows), "by_t": rows}
    diag = {"n_used": results[0].n_used, "n_discarded": results[0].n_discarded, "sigmas": 3.0}
    return result, diag, None


def cmd_double_check(cfg, ctx):
    if cfg["p"] is not None or cfg["q"] is not None:
        pairs = [(_pair(cfg["p"], "p"), _pair(cfg["q"], "q"))]
    else:
        rng = np.random.default_rng(int(cfg["seed"]))
        n = int(cfg["pairs"])
        if n < 1:
            raise DomainError("pairs must be >= 1")
        pts = np.column_stack([rng.uniform(0.05, 2.0, 2 * n), rng.uniform(-2.0, 2.0, 2 * n)])
        pairs = [((pts[2 * i, 0], pts[2 * i, 1]), (pts[2 * i + 1, 0], pts[2 * i + 1, 1])) for i in range(n)]
    for p, q in pairs:
        check_in_space(p, SpaceKind.HALF_PLANE_PLUS)
        check_in_space(q, SpaceKind.HALF_PLANE_PLUS)
    res = np.array([double_equivalence_residual(p, q) for p, q in pairs])
    result = {"pairs": len(pairs), "max_residual": float(res.max()), "mean_residual": float(res.mean())}
    diag = {}
    if cfg["oracle"]:
        gaps = []
        for p, q in pairs[:5]:
            d = distance(p, (-q[0], q[1])).value
            g = graph_oracle_distance(p, (-q[0], q[1]))
            gaps.append(abs(g - d) / d)
        diag["oracle_max_relative_gap"] = max(gaps)
    return result, diag, None


def cmd_curvature(cfg, ctx):
    if str(cfg["space"]) == "double" or str(cfg["space"]).startswith("product:"):
        raise DomainError("curvature is evaluated on plane or half-plane charts, not on the double or products")
    space = SpaceKind.parse(cfg["space"])
    p = _pair(cfg["p"], "p")
    check_in_space(p, space)
    result = {"gauss": curv.gauss_curvature(p),
              "metric": curv.metric_at(p).components,
              "ricci": curv.ricci(p).components}
    if cfg["N"] is not None:
        N = float(cfg["N"])
        be = curv.bakry_emery(p, N)
        result["bakry_emery"] = be.components
        result["bakry_emery_frame"] = be.frame_components()
        result["negativity_eigenvalues"] = curv.negativity_eigenvalues(p, N)
        result["negative"] = curv.negativity_check(p, N)
    return result, {"fd_gauss": curv.fd_gauss_curvature(p)}, None


def cmd_cutlocus(cfg, ctx):
    q = _pair(cfg["q"], "q")
    desc = cut_locus(q)
    if cfg["format"] == "csv":
        ctx["csv"] = (cut_rows(q, float(cfg["length"]), int(cfg["n"])), ["segment_id", "s", "x", "y"])
        return None, None, None
    result = {"kind": desc.kind, "base": desc.base, "x_c": desc.x_c_signed, "y_offset": desc.y_offset,
              "polylines": [{"x": xs, "y": ys} for xs, ys in desc.polylines(float(cfg["length"]), int(cfg["n"]))]}
    diag = {}
    if cfg["u"] is not None or cfg["v"] is not None:
        u = float(cfg["u"] if cfg["u"] is not None else 0.0)
        v = float(cfg["v"] if cfg["v"] is not None else 0.0)
        pt, t_meet = meeting_point(q, u, v)
        result["meeting_point"] = {"x": pt.x, "y": pt.y, "t": t_meet}
        diag["meeting_point_distance_to_cut"] = desc.distance_to(pt)
    return result, diag, None


def cmd_figure(cfg, ctx):
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    n = int(cfg["n"])
    if n < 2:
        raise DomainError("n must be >= 2")
    files, panels = [], []
    for name, q in FIGURE_BASES.items():
        fan = ray_fan(q, n=n)
        cuts = cut_rows(q, float(cfg["length"]))
        (out / f"fan_{name}.csv").write_text(rep.csv_text(fan, ["ray_id", "t", "x", "y", "u", "v"]), encoding="utf-8")
        (out / f"cut_{name}.csv").write_text(rep.csv_text(cuts, ["segment_id", "s", "x", "y"]), encoding="utf-8")
        files += [f"fan_{name}.csv", f"cut_{name}.csv"]
        panels.append((q, fan, cuts))
    if cfg["png"]:
        render_figure(panels, out / "figure.png")
        files.append("figure.png")
    result = {"files": files, "panels": [{"name": k, "q": v} for k, v in FIGURE_BASES.items()]}
    return result, {"rays_per_panel": len({r[0] for r in panels[0][1]})}, None


COMMANDS = {
    "exp": cmd_exp,
    "geodesic": cmd_geodesic,
    "distance": cmd_distance,
    "mcp-scan": cmd_mcp_scan,
    "mcp-verify": cmd_mcp_verify,
    "contract": cmd_contract,
    "double-check": cmd_double_check,
    "curvature": cmd_curvature,
    "cutlocus": cmd_cutlocus,
    "figure": cmd_figure,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _scan_flags(sp):
    sp.add_argument("--space", help="plane, halfplane+, halfplane-, double or product:k")
    sp.add_argument("--base", help="base space for product:k (default halfplane+)")
    sp.add_argument("--u-min", type=float)
    sp.add_argument("--u-max", type=float)
    sp.add_argument("--n-u", type=int)
    sp.add_argument("--n-v", type=int)
    sp.add_argument("--v-margin", type=float)
    sp.add_argument("--x-grid", help="comma-separated base abscissas")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--no-refine", dest="refine", action="store_const", const=False)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--jobs", type=int, help="worker cap (env GRUSHIN_LAB_JOBS)")

    parser = _Parser(prog="grushin-lab", description="Grushin plane geometry and MCP experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("exp", parents=[common], help="exponential map")
    sp.add_argument("--q")
    sp.add_argument("--lam")
    sp.add_argument("--t", type=float)

    sp = sub.add_parser("geodesic", parents=[common], help="sampled geodesic")
    sp.add_argument("--q")
    sp.add_argument("--lam")
    sp.add_argument("--t", type=float, help="final time")
    sp.add_argument("--n", type=int, help="number of samples")
    sp.add_argument("--format", choices=["json", "csv"])

    sp = sub.add_parser("distance", parents=[common], help="sub-Riemannian distance")
    sp.add_argument("--q")
    sp.add_argument("--p")
    sp.add_argument("--space")
    sp.add_argument("--oracle", action="store_const", const=True, help="also run the graph oracle")
    sp.add_argument("--h", type=float, help="graph oracle spacing")
    sp.add_argument("--radius", type=int, help="graph oracle stencil radius")

    sp = sub.add_parser("mcp-scan", parents=[common], help="estimate the least MCP exponent")
    _scan_flags(sp)

    sp = sub.add_parser("mcp-verify", parents=[common], help="check MCP(0, N); exit 2 when it fails")
    _scan_flags(sp)
    sp.add_argument("--N", type=float)

    sp = sub.add_parser("contract", parents=[common], help="Monte Carlo set contraction")
    sp.add_argument("--q")
    sp.add_argument("--region", help="disk:cx,cy,r or rect:x0,x1,y0,y1")
    sp.add_argument("--t", help="comma-separated times in [0, 1]")
    sp.add_argument("--N", type=float)
    sp.add_argument("--space")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)

    sp = sub.add_parser("double-check", parents=[common], help="glued double vs full plane")
    sp.add_argument("--p")
    sp.add_argument("--q")
    sp.add_argument("--pairs", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--oracle", action="store_const", const=True)

    sp = sub.add_parser("curvature", parents=[common], help="curvature and Bakry-Emery tensor")
    sp.add_argument("--p")
    sp.add_argument("--N", type=float)
    sp.add_argument("--space")

    sp = sub.add_parser("cutlocus", parents=[common], help="cut locus and meeting points")
    sp.add_argument("--q")
    sp.add_argument("--u", type=float)
    sp.add_argument("--v", type=float)
    sp.add_argument("--length", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--format", choices=["json", "csv"])

    sp = sub.add_parser("figure", parents=[common], help="ray fans and cut loci as CSV")
    sp.add_argument("--out-dir")
    sp.add_argument("--n", type=int, help="samples per ray")
    sp.add_argument("--length", type=float, help="length of drawn cut segments")
    sp.add_argument("--png", action="store_const", const=True, help="also render figure.png")
    return parser


def _merge(command, args):
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise DomainError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = sorted(set(loaded) - KNOWN_KEYS - {"jobs"})
        if unknown:
            raise DomainError(f"unknown config keys: {unknown}")
        if "jobs" in loaded and args.jobs is None:
            args.jobs = int(loaded["jobs"])
        cfg.update({k: v for k, v in loaded.items() if k in cfg})
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        cfg = _merge(command, args)
        ctx = {"jobs": _jobs(args.jobs), "exit": EXIT_OK}
        result, diag, witness = COMMANDS[command](cfg, ctx)
        if "csv" in ctx:
            rows, header = ctx["csv"]
            _emit(rep.csv_text(rows, header), args.out)
        else:
            report = rep.make_report(command, cfg, result, diag, witness)
            rep.validate(report)
            _emit(rep.dumps(report), args.out)
        return ctx["exit"]
    except UsageError as exc:
        print(f"grushin-lab {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"grushin-lab: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalFailure as exc:
        print(f"grushin-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GrushinError as exc:
        print(f"grushin-lab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
