"""Command-line front end.

    koornwalk chain    --N 1 --lambda auto --rows 10
    koornwalk tv       --N 1 --lambda 0.25 --times 0,1,10,100
    koornwalk mix      --N 1 --lambda 0.25 --eps 0.5,0.25,0.1
    koornwalk pt       --N 1 --lambda 0.25 --times 5
    koornwalk simulate --N 1 --lambda 0.25 --times 50 --walkers 100000 --seed 1
    koornwalk verify

Exit codes: 0 success, 1 verification failure, 2 invalid parameters,
3 quadrature cap exceeded without ``--allow-capped``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, kernels
from .analysis import calibrate_tv_bound, tv_bound, log_times, mixing_time
from .chain import ChainSpec, chain_stationary, coefficients, lambda_min, shift
from .errors import DegreeTooLarge, KoornwalkError, NegativeEntry, NotPositiveRecurrent
from .koornwinder import KoornwinderParams
from .oracle import monte_carlo, power_sweep, tv_between
from .quadrature import nodes_for_degree
from .spectral import distribution_at, k_limit, tv_distance, tv_distance_capped

EXIT_FAIL, EXIT_PARAMS, EXIT_QUAD = 1, 2, 3


class ParamError(Exception):
    pass


# -- output ----------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % (float(v) + 0.0)  # + 0.0 folds -0.0
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, float):
        return v + 0.0 if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render(meta: dict, columns: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        doc = {"meta": _jsonable(meta), "columns": columns, "rows": _jsonable(rows)}
        return json.dumps(doc, indent=1, sort_keys=False, allow_nan=False) + "\n"
    buf = io.StringIO()
    for key, val in meta.items():
        buf.write(f"# {key}: {json.dumps(_jsonable(val), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str):
    """Inverse of :func:`render` for CSV: ``(meta, columns, rows)`` with floats."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[float(v) if v != "" else None for v in row] for row in reader]
    return meta, columns, rows


def _emit(args, meta, columns, rows):
    text = render(meta, columns, rows, args.format)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- config ----------------------------------------------------------------


def _float_list(s):
    return [float(v) for v in s.split(",") if v.strip()]


def _times(s: str) -> list[int]:
    """``"0,1,10"`` or a log range ``"log:100:100000:25"``."""
    if s.startswith("log:"):
        _, a, b, n = s.split(":")
        return log_times(int(a), int(b), int(n))
    out = sorted({int(v) for v in s.split(",") if v.strip()})
    if any(t < 0 for t in out):
        raise ParamError("times must be >= 0")
    return out


def resolve(args) -> ChainSpec:
    try:
        params = KoornwinderParams.of(args.alpha, args.beta, args.N)
        lam = lambda_min(params) if args.lam == "auto" else float(args.lam)
        return ChainSpec(params, lam, args.origin)
    except (ValueError, KoornwalkError) as exc:
        raise ParamError(str(exc)) from exc


def base_meta(args, spec: ChainSpec, command: str) -> dict:
    return {
        "tool": "koornwalk",
        "version": __version__,
        "command": command,
        "alpha": spec.params.alpha,
        "beta": spec.params.beta,
        "N": spec.params.big_n,
        "lambda": spec.lam,
        "lambda_requested": args.lam,
        "origin": spec.origin,
        "backend": kernels.BACKEND,
        "quadrature_degrees": [],
    }


# -- commands --------------------------------------------------------------


def cmd_chain(args) -> int:
    spec = resolve(args)
    m = args.rows - 1
    raw = coefficients(spec.params, m + 1)
    try:
        sh = shift(raw, spec.lam)
    except NegativeEntry as exc:
        raise ParamError(str(exc)) from exc
    meta = base_meta(args, spec, "chain")
    nu = None
    try:
        measure, nu_snap = chain_stationary(spec, m + 1)
        meta["rho"] = measure.rho
        nu = nu_snap.probabilities
    except NotPositiveRecurrent:
        meta["rho"] = math.inf
        meta["stationary"] = "not positive recurrent (N = 0): nu columns left empty"
        from .chain import reversibility

        measure = reversibility(raw, up_to=m + 1)
    rows = []
    for n in range(m + 1):
        rows.append(
            [n, raw.p[n], raw.r[n], raw.q[n], sh.p[n], sh.r[n], sh.q[n], measure.values[n],
             None if nu is None else nu[n]]
        )
    cols = ["n", "p", "r", "q", "p_lam", "r_lam", "q_lam", "pi", "nu"]
    _emit(args, meta, cols, rows)
    return 0


def _check_quad(args, spec: ChainSpec, t: int) -> int | None:
    need = nodes_for_degree(t + 2 * spec.origin + t)
    cap = min(args.quad_cap, k_limit(spec.params)) if args.quad_cap else k_limit(spec.params)
    return cap if need > cap else None


def cmd_tv(args) -> int:
    spec = resolve(args)
    if spec.params.big_n <= 0:
        raise ParamError("TV to stationarity needs N > 0")
    times = _times(args.times)
    meta = base_meta(args, spec, "tv")
    oracle_times = [t for t in times if t <= args.oracle_cap]
    oracle = {s.time: s for s in power_sweep(spec, oracle_times)} if oracle_times else {}
    nu = None
    if oracle:
        _, nu = chain_stationary(spec, spec.origin + max(oracle_times) + 1)
    constant = None
    if args.bound:
        constant = args.bound_constant or calibrate_tv_bound(spec, args.bound_anchor)
        meta["bound_constant"] = constant
        meta["bound_anchor"] = None if args.bound_constant else args.bound_anchor
    caps = {t: _check_quad(args, spec, t) for t in times}
    over = [t for t, c in caps.items() if c is not None]
    if over and not args.allow_capped:
        print(f"koornwalk: t={over[0]} needs more than {caps[over[0]]} quadrature nodes; "
              "pass --allow-capped for an estimate", file=sys.stderr)
        return EXIT_QUAD

    def point(t):
        if caps[t] is not None:
            tv, err = tv_distance_capped(spec, t, caps[t])
            return tv, err, caps[t]
        return tv_distance(spec, t), 0.0, nodes_for_degree(2 * t + 2 * spec.origin)

    # points are independent; map() keeps them in input order
    with ThreadPoolExecutor(max_workers=kernels.threads()) as pool:
        results = list(pool.map(point, times))
    rows, nodes = [], []
    for t, (tv, err, k) in zip(times, results):
        tv_o = tv_between(oracle[t], nu) if t in oracle else None
        bound = tv_bound(spec, t, constant) if constant and t >= 1 else None
        rows.append([t, tv, tv_o, bound, tv * math.sqrt(t), err])
        nodes.append(k)
    meta["quadrature_nodes"] = nodes
    meta["quadrature_degrees"] = [2 * k - 1 for k in nodes]
    meta["oracle_cap"] = args.oracle_cap
    cols = ["t", "tv_spectral", "tv_oracle", "tv_bound", "tv_sqrt_t", "quad_error_estimate"]
    _emit(args, meta, cols, rows)
    return 0


def cmd_mix(args) -> int:
    spec = resolve(args)
    if spec.params.big_n <= 0:
        raise ParamError("mixing times need N > 0")
    eps = _float_list(args.eps)
    if any(not 0 < e < 1 for e in eps):
        raise ParamError("epsilon values must lie in (0, 1)")
    cache: dict[int, float] = {}

    def tv(t):
        if t not in cache:
            cache[t] = tv_distance(spec, t)
        return cache[t]

    rows = [[e, mixing_time(spec, e, args.t_cap, tv=tv)] for e in eps]
    meta = base_meta(args, spec, "mix")
    meta["t_cap"] = args.t_cap
    _emit(args, meta, ["epsilon", "t_mix"], rows)
    return 0


def cmd_pt(args) -> int:
    spec = resolve(args)
    times = _times(args.times)
    meta = base_meta(args, spec, "pt")
    size = spec.origin + max(times) + 1
    if args.truncation != "auto":
        size = int(args.truncation)
        if size < 1:
            raise ParamError("truncation must be >= 1")
    meta["truncation"] = size
    rows, nodes = [], []
    nu = None
    if spec.params.big_n > 0:
        _, nu = chain_stationary(spec, max(size, 1))
    for t in times:
        cap = _check_quad(args, spec, t)
        if cap is not None:
            print(f"koornwalk: t={t} needs more than {cap} quadrature nodes", file=sys.stderr)
            return EXIT_QUAD
        snap = distribution_at(spec, t, size=size)
        nodes.append(snap.meta["nodes"])
        for n, v in enumerate(snap.probabilities):
            rows.append([t, n, v, None if nu is None else nu.probabilities[n]])
    meta["quadrature_nodes"] = nodes
    meta["quadrature_degrees"] = [2 * k - 1 for k in nodes]
    _emit(args, meta, ["t", "n", "mu_t", "nu"], rows)
    return 0


def cmd_simulate(args) -> int:
    spec = resolve(args)
    times = _times(args.times)
    meta = base_meta(args, spec, "simulate")
    meta.update(seed=args.seed, walkers=args.walkers)
    exact = {s.time: s for s in power_sweep(spec, times)}
    rows, tvs = [], []
    for t in times:
        mc = monte_carlo(spec, t, args.walkers, args.seed)
        ex = exact[t].probabilities
        tvs.append(tv_between(mc, exact[t]))
        for n in range(spec.origin + t + 1):
            rows.append([t, n, mc.probabilities[n], ex[n]])
    meta["tv_to_exact"] = tvs
    _emit(args, meta, ["t", "n", "mu_monte_carlo", "mu_exact"], rows)
    return 0


def cmd_verify(args) -> int:
    from .verify import pi_typo_report, run_suite

    spec = resolve(args)
    if args.check == "pi-typo":
        sys.stdout.write(pi_typo_report())
        return 0
    results = run_suite(spec)
    ok = True
    for r in results:
        ok &= r.passed
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<40s} residual={r.residual:.3e}  tol={r.tol:.1e}  {r.detail}")
    print("all checks passed" if ok else "verification FAILED")
    return 0 if ok else EXIT_FAIL


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=-0.5)
    common.add_argument("--beta", type=float, default=-0.5)
    common.add_argument("--N", type=float, default=1.0, help="point-mass weight at x = 1")
    common.add_argument("--lambda", dest="lam", default="auto", help='shift, or "auto" for lambda_min')
    common.add_argument("--origin", "-j", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", default=None)
    common.add_argument("--quad-cap", type=int, default=None, help="maximum quadrature nodes")

    parser = argparse.ArgumentParser(prog="koornwalk", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chain", parents=[common], help="recurrence coefficients, pi and nu")
    p.add_argument("--rows", "--truncation", dest="rows", type=int, default=10)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("tv", parents=[common], help="TV distance to stationarity")
    p.add_argument("--times", default="0,1,2,5,10,20,50,100")
    p.add_argument("--oracle-cap", type=int, default=2000)
    p.add_argument("--bound", action="store_true", help="add the calibrated upper bound column")
    p.add_argument("--bound-constant", type=float, default=None)
    p.add_argument("--bound-anchor", type=int, default=100)
    p.add_argument("--allow-capped", action="store_true")
    p.set_defaults(func=cmd_tv)

    p = sub.add_parser("mix", parents=[common], help="mixing times")
    p.add_argument("--eps", default="0.5,0.25,0.1,0.05")
    p.add_argument("--t-cap", type=int, default=10**6)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("pt", parents=[common], help="t-step distribution from the origin")
    p.add_argument("--times", default="1")
    p.add_argument("--truncation", default="auto", help='sites kept, or "auto" for j + t_max + 1')
    p.set_defaults(func=cmd_pt)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo against the exact distribution")
    p.add_argument("--times", default="10")
    p.add_argument("--walkers", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    p.add_argument("--check", choices=("all", "pi-typo"), default="all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParamError as exc:
        print(f"koornwalk: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except DegreeTooLarge as exc:
        print(f"koornwalk: {exc}", file=sys.stderr)
        return EXIT_QUAD


if __name__ == "__main__":
    sys.exit(main())
