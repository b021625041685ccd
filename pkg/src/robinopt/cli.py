"""Command-line front end.

Subcommands: dirichlet, robin, maximize, minimize, scan-lambda1, bounds,
sweep, concentrate, oracle. Structured reports are emitted as JSON with
stable key order (to stdout, or into --out DIR together with the CSV and
weight/field files); sweep-style tables are CSV.

Exit codes: 0 success; 2 usage or configuration error; 3 mathematically
refused request (the exact answer is known and a discrete run would be a
mesh artifact); 4 solver non-convergence; 5 a solver converged but a
structural identity or cross-check failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bounds as bnd
from . import energy as en
from . import maximizer as mx
from . import minimizer as mn
from . import oracle as orc
from .eigensolver import solve_dirichlet, solve_robin, verify_weak_residual
from .energy import BoundaryWeight, SolverParams
from .errors import ConfigError, ConvergenceError, InvariantViolationError, MathRefusalError
from .mesh import build_disk, build_interval, build_square, read_mesh, write_mesh

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REFUSED = 3
EXIT_NOCONV = 4
EXIT_INVARIANT = 5


def _parse_domain(spec):
    if spec is None:
        raise ConfigError("--domain is required for this command")
    parts = spec.split(":")
    if parts[0] == "builtin":
        kind = parts[1]
        if kind == "interval":
            return build_interval(int(parts[2]))
        if kind == "disk":
            return build_disk(float(parts[2]))
        if kind == "square":
            return build_square(float(parts[2]))
        raise ConfigError(f"unknown builtin domain {kind!r}")
    if parts[0] == "file":
        return read_mesh(":".join(parts[1:]))
    raise ConfigError(f"bad domain spec {spec!r}")


def _parse_list(spec):
    """Sweep spec: 'log:a:b:k', 'lin:a:b:k' or comma-separated values."""
    if spec.startswith("log:"):
        _, a, b, k = spec.split(":")
        vals = list(np.geomspace(float(a), float(b), int(k)))
    elif spec.startswith("lin:"):
        _, a, b, k = spec.split(":")
        vals = list(np.linspace(float(a), float(b), int(k)))
    else:
        vals = [float(v) for v in spec.split(",")]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError("sweep values must be strictly increasing")
    return vals


def _parse_sigma(mesh, spec):
    parts = spec.split(":")
    if parts[0] == "const":
        return BoundaryWeight.constant(mesh, float(parts[1]) * mesh.boundary_measure)
    if parts[0] == "file":
        return en.read_weight(mesh, ":".join(parts[1:]))
    if parts[0] == "dirac":
        point = [float(v) for v in parts[1].split(",")]
        return BoundaryWeight.dirac(mesh, point if len(point) > 1 else point[0] * np.ones(mesh.dim), float(parts[2]))
    raise ConfigError(f"bad sigma spec {spec!r}")


def _params(args):
    return SolverParams(
        p=args.p, tol_rq=args.tol_rq, tol_res=args.tol_res,
        max_outer=args.max_outer, eps_reg=args.eps_reg, seed=args.seed,
    )


def _workers(args):
    if args.serial:
        return 1
    if args.workers is not None:
        return max(1, args.workers)
    return mn.default_workers()


def _json_safe(obj):
    """Non-finite floats have no JSON representation; map them to null."""
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _emit(args, report, files=None):
    """Print the JSON report, or write it (and side files) under --out."""
    text = json.dumps(_json_safe(report), sort_keys=True, indent=2, allow_nan=False)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            fh.write(text + "\n")
        for name, lines in (files or {}).items():
            with open(os.path.join(args.out, name), "w") as fh:
                fh.write("\n".join(lines) + "\n")
    else:
        print(text)


def _eig_report(res, extra=None):
    rep = {
        "lambda": res.lam,
        "mode": res.mode,
        "outer_iters": res.outer_iters,
        "residual": res.residual,
        "rq_history": [float(v) for v in res.rq_history],
    }
    if res.warning:
        rep["warning"] = res.warning
    rep.update(extra or {})
    return rep


def _boundary_csv(mesh, flux, scale=1.0):
    """Per-boundary-node CSV along the boundary loop: arclength, mass, density."""
    loop = mesh.boundary_loop
    pts = mesh.nodes[loop]
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1) if mesh.dim == 2 else np.diff(pts[:, 0])
    arc = np.concatenate([[0.0], np.cumsum(np.abs(seg))])
    nodal = np.zeros(mesh.n_nodes)
    nodal[flux.nodes] = scale * flux.masses
    dens = np.zeros(mesh.n_nodes)
    dens_f = flux.as_facet_density(scale=scale)
    share = {}
    for k, f in enumerate(mesh.boundary_facets):
        for i in f:
            share.setdefault(int(i), []).append(dens_f[k])
    cols = "node," + ("x," if mesh.dim == 1 else "x,y,") + "arclength,mass,density"
    lines = [cols]
    for a, n in zip(arc, loop):
        d = float(np.mean(share.get(int(n), [0.0])))
        coord = ",".join(repr(float(c)) for c in mesh.nodes[n])
        lines.append(f"{int(n)},{coord},{a!r},{nodal[n]!r},{d!r}")
    return lines


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_dirichlet(args):
    mesh = _parse_domain(args.domain)
    res = solve_dirichlet(mesh, _params(args))
    check = verify_weak_residual(res, None, _params(args))
    _emit(args, _eig_report(res, {"weak_residual_check": check}))
    return EXIT_OK


def _cmd_robin(args):
    mesh = _parse_domain(args.domain)
    w = _parse_sigma(mesh, args.sigma)
    res = solve_robin(mesh, w, _params(args))
    check = verify_weak_residual(res, w, _params(args))
    extra = {"sigma_mass": w.total_mass, "weak_residual_check": check}
    if w.snap_distance:
        extra["snap_distance"] = w.snap_distance
    _emit(args, _eig_report(res, extra))
    return EXIT_OK if check["ok"] else EXIT_INVARIANT


def _cmd_maximize(args):
    mesh = _parse_domain(args.domain)
    rep = mx.sigma_max(mesh, args.m, _params(args))
    files = {}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        en.write_weight(rep.sigma_m, os.path.join(args.out, "sigma_m.bw"))
        files["sigma_m.csv"] = _boundary_csv(mesh, rep.aux.sigma_flux)
    _emit(args, rep.to_dict(), files)
    return EXIT_OK if rep.crosscheck_ok else EXIT_INVARIANT


def _cmd_minimize(args):
    mesh = _parse_domain(args.domain)
    rep = mn.lambda_inf(mesh, args.m, _params(args), workers=_workers(args))
    lines = ["node,x,y,lambda1_x,ell1_dirac"]
    for n, lx, ld in zip(rep.nodes, rep.lambda1_x, rep.lambda_dirac):
        xy = mesh.nodes[n]
        x = repr(float(xy[0]))
        y = repr(float(xy[1])) if mesh.dim == 2 else ""
        lines.append(f"{int(n)},{x},{y},{lx!r},{ld!r}")
    _emit(args, rep.to_dict(), {"minimize.csv": lines})
    return EXIT_OK


def _cmd_scan(args):
    mesh = _parse_domain(args.domain)
    scan = mn.scan_point_eigen(mesh, _params(args), workers=_workers(args))
    rep = {
        "p": scan.p,
        "lambda1_omega": scan.lambda1_omega,
        "argmin_node": int(scan.argmin_node),
        "tie_set": [int(t) for t in scan.tie_set],
        "values": {str(int(n)): float(v) for n, v in zip(scan.nodes, scan.values)},
        "failures": {str(k): v for k, v in scan.failures.items()},
    }
    _emit(args, rep)
    return EXIT_OK


def _cmd_bounds(args):
    mesh = _parse_domain(args.domain)
    rep = bnd.check_all(mesh, args.p, _parse_list(args.m_list), _params(args))
    _emit(args, rep.to_dict(), {"bounds.csv": rep.csv_lines()})
    return EXIT_OK if rep.all_pass else EXIT_INVARIANT


def _cmd_sweep(args):
    mesh = _parse_domain(args.domain)
    params = _params(args)
    lam_d = mx.dirichlet_ceiling(mesh, params)
    scan = None
    if args.p > mesh.dim:
        scan = mn.scan_point_eigen(mesh, params, workers=_workers(args))
    cache = mx._FCache(mesh, params, lam_d)
    header = "m,Lambda,lambda,belsup,inflow,upper_Lambda,upper_lambda"
    lines = [header]
    rows = []
    for m in _parse_list(args.m_list):
        rep = mx.sigma_max(mesh, m, params, lam_dirichlet=lam_d, _cache=cache)
        lam = low = up2 = None
        if scan is not None:
            mrep = mn.lambda_inf(mesh, m, params, scan=scan, workers=_workers(args))
            lam = mrep.lambda_inf
            low = bnd.inflow(m, scan.lambda1_omega, mesh.volume, args.p, dim=mesh.dim)
            up2 = min(scan.lambda1_omega, m / mesh.volume)
        bel = bnd.belsup(m, lam_d, mesh.volume, args.p)
        upper = min(lam_d, m / mesh.volume)
        row = [m, rep.Lambda, lam, bel, low, upper, up2]
        rows.append({"m": m, "Lambda": rep.Lambda, "lambda": lam, "belsup": bel,
                     "inflow": low, "upper_Lambda": upper, "upper_lambda": up2})
        lines.append(",".join("" if v is None else repr(float(v)) for v in row))
    _emit(args, {"p": args.p, "rows": rows}, {"sweep.csv": lines})
    return EXIT_OK


def _cmd_concentrate(args):
    volume = 1.0
    if args.domain:
        volume = _parse_domain(args.domain).volume
    run = mn.concentration_demo(args.p, args.m, [int(j) for j in _parse_list(args.j_list)], volume=volume)
    lines = ["j,alpha,Q,bound"]
    for j, a, q, b in run.rows():
        lines.append(f"{j},{a!r},{q!r},{b!r}")
    rep = {
        "p": run.p, "m": run.m, "volume": run.volume, "profile": run.profile,
        "monotone_tail": run.monotone_tail,
        "rows": [{"j": j, "alpha": a, "q": q, "bound": b} for j, a, q, b in run.rows()],
    }
    _emit(args, rep, {"concentrate.csv": lines})
    return EXIT_OK


def _cmd_oracle(args):
    name = args.name
    vals = [float(v) for v in args.args]
    if name == "interval-robin-p2":
        out = orc.interval_robin_p2(*vals)
    elif name == "interval-dirichlet-p":
        out = orc.interval_dirichlet_p(*vals)
    elif name == "disk-robin-p2":
        out = orc.disk_robin_p2_const(*vals)
    elif name == "brute-force-1d":
        p, sl, sr = vals[0], vals[1], vals[2]
        n = int(vals[3]) if len(vals) > 3 else 10_000
        out = orc.brute_force_1d(p, sl, sr, n_grid=n)
    else:
        raise ConfigError(
            f"unknown oracle {name!r}; available: interval-robin-p2, "
            "interval-dirichlet-p, disk-robin-p2, brute-force-1d"
        )
    _emit(args, {"oracle": name, "args": vals, "value": out})
    return EXIT_OK


def _cmd_mesh(args):
    mesh = _parse_domain(args.domain)
    rep = {
        "dim": mesh.dim, "n_nodes": mesh.n_nodes, "n_cells": mesh.n_cells,
        "volume": mesh.volume, "boundary_measure": mesh.boundary_measure,
        "inradius": mesh.inradius,
    }
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_mesh(mesh, os.path.join(args.out, "mesh.pmesh"))
    _emit(args, rep)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="robinopt",
        description="First Robin eigenvalue of the p-Laplacian and its "
                    "optimization over boundary weights of fixed mass.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, domain=True):
        if domain:
            sp.add_argument("--domain", help="builtin:interval:N | builtin:disk:H | builtin:square:H | file:PATH")
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--tol-rq", type=float, default=1e-9, dest="tol_rq")
        sp.add_argument("--tol-res", type=float, default=1e-8, dest="tol_res")
        sp.add_argument("--max-outer", type=int, default=500, dest="max_outer")
        sp.add_argument("--eps-reg", type=float, default=1e-10, dest="eps_reg")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output directory (default: JSON to stdout)")
        sp.add_argument("--serial", action="store_true", help="force the bit-reproducible serial path")
        sp.add_argument("--workers", type=int, default=None,
                        help="worker processes for scans (default: ROBINOPT_WORKERS or 1)")

    sp = sub.add_parser("dirichlet", help="first Dirichlet eigenvalue")
    common(sp)
    sp.set_defaults(fn=_cmd_dirichlet)

    sp = sub.add_parser("robin", help="first eigenvalue for a given boundary weight")
    common(sp)
    sp.add_argument("--sigma", required=True, help="const:V | file:PATH | dirac:X[,Y]:M")
    sp.set_defaults(fn=_cmd_robin)

    sp = sub.add_parser("maximize", help="maximizing weight of mass m and its eigenvalue")
    common(sp)
    sp.add_argument("--m", type=float, required=True)
    sp.set_defaults(fn=_cmd_maximize)

    sp = sub.add_parser("minimize", help="minimal Dirac eigenvalue at mass m (p > dim)")
    common(sp)
    sp.add_argument("--m", type=float, required=True)
    sp.set_defaults(fn=_cmd_minimize)

    sp = sub.add_parser("scan-lambda1", help="point-constrained eigenvalue per boundary node")
    common(sp)
    sp.set_defaults(fn=_cmd_scan)

    sp = sub.add_parser("bounds", help="verify the closed-form sandwiches over a mass grid")
    common(sp)
    sp.add_argument("--m-list", required=True, dest="m_list", help="log:A:B:K | lin:A:B:K | v1,v2,...")
    sp.set_defaults(fn=_cmd_bounds)

    sp = sub.add_parser("sweep", help="Lambda(m), lambda(m) and all bounds over a mass grid")
    common(sp)
    sp.add_argument("--m-list", required=True, dest="m_list")
    sp.set_defaults(fn=_cmd_sweep)

    sp = sub.add_parser("concentrate", help="vanishing concentration sequence for p <= 2 in 2D")
    common(sp)
    sp.add_argument("--m", type=float, default=1.0)
    sp.add_argument("--j-list", required=True, dest="j_list")
    sp.set_defaults(fn=_cmd_concentrate)

    sp = sub.add_parser("oracle", help="independent closed-form and brute-force values")
    sp.add_argument("name")
    sp.add_argument("args", nargs="*")
    sp.add_argument("--out")
    sp.set_defaults(fn=_cmd_oracle)

    sp = sub.add_parser("mesh", help="build a domain and report/export its mesh")
    common(sp)
    sp.set_defaults(fn=_cmd_mesh)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MathRefusalError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except ConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except InvariantViolationError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
