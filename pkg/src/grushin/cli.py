"""Command-line front end.

Every subcommand writes one JSON object or an RFC-4180 CSV table to
stdout. Exit status is 0 on success, 2 on a usage error and 3 on a
numerical failure, in which case a JSON error object goes to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from decimal import Decimal, InvalidOperation

from . import curvature, geodesics, regions, transport
from .curvature import EffectiveDim
from .errors import ConstructionError, DimError, DomainError, GrushinError, SupportError
from .model import Family, SpaceModel

__all__ = ["run", "main", "build_parser"]

USAGE, NUMERIC = 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- value parsing --------------------------------------------------------


def _space(text: str) -> SpaceModel:
    try:
        return SpaceModel.parse(text)
    except ConstructionError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dim(text: str) -> EffectiveDim:
    try:
        return EffectiveDim.parse(text)
    except DimError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return x, y


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _range(text: str) -> list[float]:
    """``v`` or ``start:stop:step`` (inclusive, decimal arithmetic)."""
    try:
        parts = [Decimal(p) for p in text.split(":")]
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise argparse.ArgumentTypeError(f"expected start:stop:step with step > 0, got {text!r}")
    start, stop, step = parts
    count = int((stop - start) / step)
    if count > 100_000:
        raise argparse.ArgumentTypeError(f"range {text!r} has too many points")
    return [float(start + k * step) for k in range(count + 1)]


# -- output ---------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), separators=(",", ":"), allow_nan=False)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


# -- subcommands ----------------------------------------------------------


def _cmd_ricci(a):
    fn = {"lemma": curvature.ricci_lemma, "closed": curvature.ricci_closed,
          "fd": curvature.ricci_fd}[a.method]
    r = fn(a.space, a.x, a.N)
    out = {"space": str(a.space), "x": a.x, "N": a.N.to_json(), "method": a.method,
           "rxx": r.rxx, "ryy": r.ryy_over_gyy}
    if a.format == "csv":
        return _csv(list(out), [list(out.values())])
    return _dumps(out) + "\n"


def _cmd_kmax(a):
    res = regions.kmax_closed(a.space, a.N)
    out = res.to_dict()
    out.update({"space": str(a.space), "N": a.N.to_json()})
    if a.K is not None:
        out["K"] = a.K
        out["bounds"] = res.feasible and res.kmax >= a.K
    if a.format == "csv":
        keys = ["space", "N", "feasible", "kmax", "binding", "attained"]
        return _csv(keys, [[out[k] for k in keys]])
    return _dumps(out) + "\n"


def _scan_cell(args):
    family, alpha, beta, gamma, N, K = args
    try:
        sp = SpaceModel(family, alpha, beta, gamma if family is Family.INFINITY else None)
    except ConstructionError:
        return None
    res = regions.kmax_closed(sp, N)
    feasible = res.feasible and (K is None or res.kmax >= K)
    g = gamma if family is Family.INFINITY else None
    return [family.value, alpha, beta, g, N.to_json() if N.infinite else N.value,
            feasible, res.kmax if res.feasible else None, res.binding.value]


def _cmd_region_scan(a):
    fam = a.family
    if fam is Family.INFINITY and a.gamma is None:
        raise UsageError("--gamma is required for the infinity family")
    alphas = [0.0] if fam is Family.INFINITY else a.alpha
    gammas = a.gamma if fam is Family.INFINITY else [None]
    cells = [(fam, al, be, ga, a.N, a.K) for al in alphas for be in a.beta for ga in gammas]
    with ThreadPoolExecutor(max_workers=4) as pool:
        rows = [r for r in pool.map(_scan_cell, cells) if r is not None]
    header = ["family", "alpha", "beta", "gamma", "N", "feasible", "kmax", "binding"]
    return _csv(header, rows)


def _cmd_geodesic(a):
    if a.to is not None:
        res = geodesics.solve_distance(a.space, a.from_, a.to, seed=a.seed)
        if res.method != "shooting":
            raise UsageError(f"minimiser found by method {res.method!r} has no covector")
        u, v = res.covector
        s0 = geodesics.GeodesicState(res.p[0], res.p[1], u, v)
        T = 1.0
    else:
        if a.covector is None:
            raise UsageError("geodesic needs --to or --covector")
        (x, y), (u, v) = a.from_, a.covector
        s0 = geodesics.GeodesicState(x, y, u, v)
        T = a.T
    traj = geodesics.flow(a.space, s0, T, a.tol)
    rows = [[float(t)] + [float(z) for z in s] for t, s in zip(traj.t, traj.states)]
    return _csv(["t", "x", "y", "u", "v"], rows)


def _cmd_distance(a):
    if a.method == "graph":
        d = geodesics.distance_graph_oracle(a.space, a.from_, a.to, a.grid)
        out = {"d": d, "method": "graph", "converged_shots": 0, "seed": a.seed}
    else:
        out = geodesics.solve_distance(a.space, a.from_, a.to, seed=a.seed).to_dict()
    return _dumps(out) + "\n"


def _cmd_cd_check(a):
    try:
        mu0 = transport.SliceMeasure.bump(a.space, *a.bump0)
        mu1 = transport.SliceMeasure.bump(a.space, *a.bump1)
    except (TypeError, SupportError) as exc:
        raise UsageError(f"bad bump: {exc}") from None
    tgrid = [k / (a.grid - 1) for k in range(a.grid)]
    res = transport.cd_slice_check(a.space, a.K, a.N, mu0, mu1, tgrid)
    out = res.to_dict()
    out["t"] = res.tgrid
    return _dumps(out) + "\n"


def _cmd_dim_exponent(a):
    rows = []
    for delta in a.delta:
        d = geodesics.vertical_distance(a.space, delta, a.seed)
        rows.append([delta, d, math.log(delta) / math.log(d)])
    return _csv(["delta", "distance", "exponent"], rows)


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="grushin", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def space(sp, required=True):
        sp.add_argument("--space", type=_space, required=required,
                        help="family:alpha=<a>,beta=<b>[,gamma=<g>]")

    def fmt(sp):
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    s = sub.add_parser("ricci", help="weighted Ricci tensor at a point")
    space(s)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--N", type=_dim, required=True)
    s.add_argument("--method", choices=("lemma", "closed", "fd"), default="lemma")
    fmt(s)
    s.set_defaults(run=_cmd_ricci)

    s = sub.add_parser("kmax", help="largest lower Ricci bound")
    space(s)
    s.add_argument("--N", type=_dim, required=True)
    s.add_argument("--K", type=float)
    fmt(s)
    s.set_defaults(run=_cmd_kmax)

    s = sub.add_parser("region-scan", help="kmax over a parameter grid (CSV)")
    s.add_argument("--family", type=Family, choices=list(Family), required=True)
    s.add_argument("--alpha", type=_range, default=[0.0])
    s.add_argument("--beta", type=_range, required=True)
    s.add_argument("--gamma", type=_range)
    s.add_argument("--N", type=_dim, required=True)
    s.add_argument("--K", type=float)
    s.set_defaults(run=_cmd_region_scan)

    s = sub.add_parser("geodesic", help="sampled normal extremal (CSV)")
    space(s)
    s.add_argument("--from", dest="from_", type=_point, required=True)
    s.add_argument("--to", type=_point)
    s.add_argument("--covector", type=_point, help="initial u,v")
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--seed", type=int, default=geodesics.DEFAULT_SEED)
    s.set_defaults(run=_cmd_geodesic)

    s = sub.add_parser("distance", help="distance between two points")
    space(s)
    s.add_argument("--from", dest="from_", type=_point, required=True)
    s.add_argument("--to", type=_point, required=True)
    s.add_argument("--method", choices=("bvp", "graph"), default="bvp")
    s.add_argument("--grid", type=int, default=200)
    s.add_argument("--seed", type=int, default=geodesics.DEFAULT_SEED)
    s.set_defaults(run=_cmd_distance)

    s = sub.add_parser("cd-check", help="slice curvature-dimension inequality")
    space(s)
    s.add_argument("--K", type=float, required=True)
    s.add_argument("--N", type=_dim, required=True)
    s.add_argument("--bump0", type=_floats, required=True, help="center,radius")
    s.add_argument("--bump1", type=_floats, required=True, help="center,radius")
    s.add_argument("--grid", type=int, default=11, help="number of t values")
    s.set_defaults(run=_cmd_cd_check)

    s = sub.add_parser("dim-exponent", help="distance-scaling exponent (CSV)")
    space(s)
    s.add_argument("--delta", type=_floats, default=[1e-1, 1e-2, 1e-3])
    s.add_argument("--seed", type=int, default=geodesics.DEFAULT_SEED)
    s.set_defaults(run=_cmd_dim_exponent)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "grid", 2) < 2:
            raise UsageError("--grid is too small")
        payload = args.run(args)
    except UsageError as exc:
        stderr.write(f"{parser.prog}: error: {exc}\n")
        return USAGE
    except (DomainError, DimError, ConstructionError, ValueError) as exc:
        # bad inputs that only show up once combined (e.g. x outside the chart)
        stderr.write(f"{parser.prog}: error: {exc}\n")
        return USAGE
    except GrushinError as exc:
        stderr.write(_dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return NUMERIC
    stdout.write(payload)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
