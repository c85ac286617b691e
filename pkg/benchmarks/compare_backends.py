#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the hot paths in isolation (chain sweep + Jacobian, manipulability
gradient, ADMM iterations) and a short closed-loop tracking slice through
each backend. Usage:

    python benchmarks/compare_backends.py [--steps 300]
"""

import argparse
import time

import numpy as np

from ik_bench import _backend
from ik_bench.chain import load_chain_file
from ik_bench.qp import QpProblem, QpSolver
from ik_bench.scenario import load_scenario
from ik_bench.tracking import run_tracking

from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "src" / "ik_bench" / "data"


def time_call(fn, repeats, *args):
    fn(*args)  # warm once
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def kernel_timings(backend, chain, q, repeats=2000):
    _backend.use(backend)
    kin = _backend.kin()
    base = chain.kernel_args() + (q,) + chain.frame_args("ee")
    rows = np.arange(6)
    out = {
        "jacobian": time_call(kin.jacobian, repeats, *base),
        "manip gradient": time_call(
            kin.manip_gradient, max(repeats // 10, 1), *base, 1e-6, rows
        ),
    }
    return out


def qp_timing(backend, rng, repeats=200):
    _backend.use(backend)
    n, m = 12, 24
    L = rng.normal(size=(n, n))
    Q = L @ L.T + 0.01 * np.eye(n)
    p = rng.normal(size=n)
    C = rng.normal(size=(m, n))
    d = C @ rng.normal(size=n) + 0.3
    problem = QpProblem(Q, p, C, d)
    solver = QpSolver()
    return time_call(lambda: solver.solve(problem), repeats)


def tracking_timing(backend, steps):
    _backend.use(backend)
    config = load_scenario(
        str(DATA / "kc1_helix_constrained.json"),
        [f"steps={steps}", f"t_end={(steps - 1) / 1000.0}"],
    )
    start = time.perf_counter()
    run_tracking(config)
    return (time.perf_counter() - start) / steps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=300,
                        help="tracking slice length (default 300)")
    args = parser.parse_args()

    backends = ["python"]
    if _backend.HAVE_COMPILED:
        backends.append("compiled")
    else:
        print("compiled kernels not built; timing the fallback only\n")

    chain = load_chain_file(str(DATA / "kc1.json"))
    rng = np.random.default_rng(0)
    q = 0.5 * (chain.lower_limits + chain.upper_limits) + 0.1

    results = {}
    for backend in backends:
        rows = kernel_timings(backend, chain, q)
        rows["qp solve (n=12, m=24)"] = qp_timing(backend, rng)
        rows["tracking cycle"] = tracking_timing(backend, args.steps)
        results[backend] = rows

    names = list(results[backends[0]])
    width = max(len(n) for n in names)
    header = f"{'operation':<{width}}  " + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name in names:
        cells = "".join(
            f"{results[b][name] * 1e6:>12.1f} us" for b in backends
        )
        lineout = f"{name:<{width}}  {cells}"
        if len(backends) == 2:
            ratio = results["python"][name] / results["compiled"][name]
            lineout += f"{ratio:>9.1f}x"
        print(lineout)


if __name__ == "__main__":
    main()
