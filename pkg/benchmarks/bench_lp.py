"""Timing comparison of the compiled and pure-python inner-LP kernels.

Runs the exact LP workload the rotation search generates (maximize sigma
over (sigma, t) at fixed rotations) for a few representative body pairs,
checks both backends agree, and prints per-call timings.

    python3 benchmarks/bench_lp.py [--rotations 200]
"""
import argparse
import time

import numpy as np

from polynest._kernel import LpError, load_backend
from polynest.geometry import make_platonic, make_polygon
from polynest.solver import _Arena
from polynest._rotation import quat_rotation


def workload(P, Q, rotations, seed=0):
    ar = _Arena(P, Q)
    rng = np.random.default_rng(seed)
    mats = [quat_rotation(rng.normal(size=4)) for _ in range(rotations)]
    if ar.dim == 2:
        angs = rng.uniform(0, 2 * np.pi, size=rotations)
        mats = [np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
                for a in angs]
    problems = []
    for R in mats:
        G = ar.G.copy()
        G[:, 0] = (ar.A @ (ar.VP @ R.T).T).reshape(-1)
        problems.append((G, ar.b_rep.copy(), ar.c.copy()))
    return problems


def run(fn, problems):
    best = []
    t0 = time.perf_counter()
    for G, b, c in problems:
        try:
            x, _ = fn(G, b, c)
            best.append(x[0])
        except LpError:
            best.append(np.nan)
    dt = time.perf_counter() - t0
    return dt, np.array(best)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rotations", type=int, default=200)
    args = ap.parse_args()

    try:
        compiled = load_backend("compiled")
    except ImportError:
        compiled = None
        print("compiled backend not built; showing python only")
    python = load_backend("python")

    pairs = [
        ("D in I", make_platonic("D", "1"), make_platonic("I", "1")),
        ("C in O", make_platonic("C", "1"), make_platonic("O", "1")),
        ("7-gon in 9-gon", make_polygon(7, "1"), make_polygon(9, "1")),
    ]
    print(f"{args.rotations} LP calls per pair")
    header = f"{'pair':<16}{'python':>12}"
    if compiled:
        header += f"{'compiled':>12}{'speedup':>10}{'max diff':>12}"
    print(header)
    for name, P, Q in pairs:
        problems = workload(P, Q, args.rotations)
        tp, xp = run(python, problems)
        line = f"{name:<16}{1e3 * tp / len(problems):>10.3f}ms"
        if compiled:
            tc, xc = run(compiled, problems)
            both = ~(np.isnan(xp) | np.isnan(xc))
            diff = np.abs(xp[both] - xc[both]).max() if both.any() else 0.0
            line += (f"{1e3 * tc / len(problems):>10.3f}ms"
                     f"{tp / tc:>10.1f}x{diff:>12.2e}")
        print(line)


if __name__ == "__main__":
    main()
