"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Prints one CSV row per
(kernel, size, backend) with the best wall time over ``--repeat`` runs, the
speedup over the fallback, and the largest backend difference relative to the largest entry.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from koornwalk import _kernels_py, kernels
from koornwalk.chain import ChainSpec, coefficients
from koornwalk.spectral import build_rule

try:
    from koornwalk import _kernels as compiled
except ImportError:  # pragma: no cover
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def _rel(got, ref):
    # difference scaled by the largest reference entry
    return float(np.max(np.abs(got - ref)) / max(np.max(np.abs(ref)), 1e-300))


def bench_moments(spec, nmax, repeat, threads):
    c = coefficients(spec.params, nmax + 1)
    rule = build_rule(spec.params, 2 * nmax + 1)
    args = (rule.nodes, rule.weights, c.p, c.r, c.q, nmax, kernels.NBLOCKS)
    t_py, ref = best_of(lambda: _kernels_py.km_moments(*args), repeat)
    yield "km_moments", nmax, "python", t_py, 1.0, 0.0
    if compiled is not None:
        t_c, got = best_of(lambda: compiled.km_moments(*args, threads), repeat)
        yield "km_moments", nmax, "compiled", t_c, t_py / t_c, _rel(got, ref)


def bench_evolve(spec, steps, repeat):
    size = spec.origin + steps + 1
    c = spec.coeffs(size + 1)
    qext = np.concatenate((c.q, [0.0]))

    def run(impl):
        mu = np.zeros(size)
        mu[spec.origin] = 1.0
        impl.tridiag_evolve(mu, c.p, c.r, qext, steps, spec.origin, spec.origin)
        return mu

    t_py, ref = best_of(lambda: run(_kernels_py), repeat)
    yield "tridiag_evolve", steps, "python", t_py, 1.0, 0.0
    if compiled is not None:
        t_c, got = best_of(lambda: run(compiled), repeat)
        yield "tridiag_evolve", steps, "compiled", t_c, t_py / t_c, _rel(got, ref)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="100,1000,5000", help="moment degrees and step counts")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=kernels.threads())
    args = ap.parse_args(argv)
    spec = ChainSpec.of(0.5, -0.25, 2.0, "auto", 0)
    print("kernel,size,backend,seconds,speedup,max_rel_diff")
    for n in (int(s) for s in args.sizes.split(",")):
        for row in (*bench_moments(spec, n, args.repeat, args.threads), *bench_evolve(spec, n, args.repeat)):
            print("%s,%d,%s,%.6f,%.2f,%.3g" % row)


if __name__ == "__main__":
    main()
