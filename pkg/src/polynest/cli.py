"""Command line driver: generate bodies, solve inclusions, recover exact values.

Subcommands
    gen           write a builtin or derived body as polytope JSON
    solve         largest dilated copy of P inside Q, report to JSON
    exact         solve, refine to many digits, recover the minimal polynomial
    table         all 20 ordered pairs of the five regular solids
    polygon-scan  regular n-gon in m-gon over a range of pairs
    export        polytope or solve report as OFF or JSON geometry

Body specs are builtin names (T, C, O, D, I, ngon:<n>, all edge 1) or paths
to polytope JSON. Outputs are deterministic for a fixed command line and
seed; nothing time-dependent is written.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal, Context, ROUND_HALF_EVEN

import mpmath as mp

from polynest.geometry import (GeometryError, Polytope, SOLIDS, make_platonic,
                               make_polygon, to_off, facet_vertices)
from polynest.solver import SolveError, SolverConfig, solve_global
from polynest.refine import (RefineError, detect_incidences,
                             build_square_system, newton_refine)
from polynest.algrec import AlgrecError, VerificationFailed, min_poly_guess, \
    verify_algebraic
from polynest import exactfield

SOLID_ORDER = ("T", "C", "O", "D", "I")

EXIT_USAGE = 2
EXIT_SOLVE = 3
EXIT_RECOVER = 4
EXIT_VERIFY = 5


class UsageError(ValueError):
    pass


def body_from_spec(spec: str, digits: int = 50) -> Polytope:
    if spec in SOLIDS:
        return make_platonic(spec, "1", digits)
    if spec.startswith("ngon:"):
        try:
            n = int(spec[5:])
        except ValueError:
            raise UsageError(f"bad polygon spec {spec!r}")
        if n < 3:
            raise UsageError("polygons need at least 3 vertices")
        return make_polygon(n, "1", digits)
    if os.path.exists(spec):
        with open(spec) as f:
            return Polytope.from_json(f.read())
    raise UsageError(f"unknown body spec {spec!r} (builtin name or JSON path)")


def sig8(x) -> str:
    """8 significant digits, round half to even, trailing zeros kept."""
    d = Decimal(str(x))
    quantum = Decimal(1).scaleb(d.adjusted() - 7)
    d = d.quantize(quantum, rounding=ROUND_HALF_EVEN)
    if d.adjusted() > Decimal(str(x)).adjusted():  # rounding crossed a power of 10
        d = d.quantize(Decimal(1).scaleb(d.adjusted() - 7),
                       rounding=ROUND_HALF_EVEN)
    return format(d, "f")


def _write_or_print(text: str, out: str | None):
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(tolerance=float(args.tol), starts=args.starts,
                        seed=args.seed)


# ------------------------------------------------------------------ commands

def cmd_gen(args) -> int:
    digits = args.digits or 50
    body = body_from_spec(args.spec, digits)
    text = body.to_json() + "\n"
    _write_or_print(text, args.out)
    print(f"{body.name}: {body.n_vertices} vertices, {body.n_facets} facets, "
          f"{digits} digits")
    return 0


def cmd_solve(args) -> int:
    P = body_from_spec(args.P)
    Q = body_from_spec(args.Q)
    report = solve_global(P, Q, _solver_config(args))
    print(f"sigma={report.best.sigma} s={report.best.s} "
          f"starts={report.starts_used}")
    if args.out:
        d = report.to_json_dict()
        d["P"] = P.to_json_dict()
        d["Q"] = Q.to_json_dict()
        with open(args.out, "w") as f:
            f.write(json.dumps(d, indent=2) + "\n")
    return 0


def cmd_exact(args) -> int:
    digits = args.digits or 160
    P = body_from_spec(args.P)
    Q = body_from_spec(args.Q)
    try:
        report = solve_global(P, Q, _solver_config(args))
    except SolveError as e:
        raise SolveError(f"stage solve: {e}") from e
    try:
        inc = detect_incidences(report.best, Q, P=P)
        system = build_square_system(inc)
        solution = newton_refine(system, report.best, digits)
    except RefineError as e:
        raise RefineError(f"stage refine: {e}") from e
    alg = min_poly_guess(solution.values["sigma"], args.max_degree)
    if alg is None:
        raise AlgrecError(
            f"stage recover: no integer polynomial of degree "
            f"<= {args.max_degree} found at {digits} digits")
    closed = None
    if args.P in SOLIDS and args.Q in SOLIDS:
        closed = exactfield.exact_sigma(args.Q, args.P)
    verification = verify_algebraic(alg, digits + 100, closed_form=closed)
    print(f"degree={alg.degree} digits={alg.digits_used} "
          f"minimality={alg.minimality}")
    print("coeffs (low to high):", " ".join(str(c) for c in alg.poly))
    if args.out:
        doc = {"algebraic_number": alg.to_json_dict(),
               "verification": verification,
               "P": args.P, "Q": args.Q}
        with open(args.out, "w") as f:
            f.write(json.dumps(doc, indent=2) + "\n")
    return 0


def _table_entry(task):
    pname, qname, tol, starts, seed = task
    P = make_platonic(pname, "1")
    Q = make_platonic(qname, "1")
    try:
        rep = solve_global(P, Q, SolverConfig(tolerance=tol, starts=starts,
                                              seed=seed))
    except SolveError as e:
        raise SolveError(f"pair P={pname} Q={qname}: {e}") from e
    return pname, qname, sig8(rep.best.sigma)


def _run_tasks(worker, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


def cmd_table(args) -> int:
    tasks = [(p, q, float(args.tol), args.starts, args.seed)
             for q in SOLID_ORDER for p in SOLID_ORDER if p != q]
    results = _run_tasks(_table_entry, tasks, args.jobs)
    cell = {(p, q): s for p, q, s in results}

    csv_lines = ["Q\\P," + ",".join(SOLID_ORDER)]
    for q in SOLID_ORDER:
        row = [cell.get((p, q), "") for p in SOLID_ORDER]
        csv_lines.append(q + "," + ",".join(row))
    csv_text = "\n".join(csv_lines) + "\n"

    w = 12
    txt_lines = ["Q\\P".ljust(4) + "".join(p.rjust(w) for p in SOLID_ORDER)]
    for q in SOLID_ORDER:
        row = "".join(cell.get((p, q), "").rjust(w) for p in SOLID_ORDER)
        txt_lines.append(q.ljust(4) + row)
    txt_text = "\n".join(txt_lines) + "\n"

    if args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(txt_text)
    if args.out:
        with open(args.out, "w") as f:
            f.write(csv_text)
    return 0


def _scan_entry(task):
    n, m, tol, starts, seed = task
    P = make_polygon(n, "1")
    Q = make_polygon(m, "1")
    try:
        rep = solve_global(P, Q, SolverConfig(tolerance=tol, starts=starts,
                                              seed=seed))
    except SolveError as e:
        raise SolveError(f"pair n={n} m={m}: {e}") from e
    return n, m, rep.best.sigma


def _load_formula(path: str):
    if not os.path.exists(path):
        raise UsageError(f"formula file {path!r} not found")
    with open(path) as f:
        doc = json.load(f)
    expr = doc.get("expression")
    if not isinstance(expr, str):
        raise UsageError("formula file needs an \"expression\" string")
    return expr


def _eval_formula(expr: str, n: int, m: int):
    names = {"n": n, "m": m, "pi": mp.pi, "cos": mp.cos, "sin": mp.sin,
             "tan": mp.tan, "sec": mp.sec, "sqrt": mp.sqrt, "mpf": mp.mpf,
             "floor": mp.floor, "gcd": math.gcd}
    return mp.mpf(eval(expr, {"__builtins__": {}}, names))


def cmd_polygon_scan(args) -> int:
    if args.m_max > 40 and not args.allow_large:
        raise UsageError("m_max > 40 is slow; pass --allow-large to confirm")
    if args.m_max < 4:
        raise UsageError("m_max must be at least 4")
    expr = _load_formula(args.formula) if args.formula else None
    tasks = [(n, m, float(args.tol), args.starts, args.seed)
             for m in range(4, args.m_max + 1) for n in range(3, m)]
    results = _run_tasks(_scan_entry, tasks, args.jobs)

    lines = ["n,m,sigma" + (",formula,deviation" if expr else "")]
    worst = mp.mpf(0)
    worst_pair = None
    compared = 0
    for n, m, sigma in results:
        row = f"{n},{m},{sig8(sigma)}"
        if expr and math.gcd(n, m) == 1:
            with mp.workdps(40):
                ref = _eval_formula(expr, n, m)
                dev = abs(mp.mpf(sigma) - ref)
            row += f",{sig8(ref)},{mp.nstr(dev, 3)}"
            compared += 1
            if dev > worst:
                worst, worst_pair = dev, (n, m)
        lines.append(row)
    text = "\n".join(lines) + "\n"
    _write_or_print(text, args.out)
    if args.out:
        print(f"{len(results)} pairs written to {args.out}")
    if expr:
        print(f"max deviation {mp.nstr(worst, 3)} at {worst_pair} "
              f"over {compared} coprime pairs")
    return 0


def _off_from_report(doc: dict) -> str:
    if "Q" not in doc or "P" not in doc:
        raise UsageError("report lacks body geometry; re-run solve with --out")
    Q = Polytope.from_json_dict(doc["Q"])
    P = Polytope.from_json_dict(doc["P"])
    if Q.dim != 3:
        raise UsageError("OFF export is for 3D bodies")
    parts = [to_off(Q)]
    verts = doc["vertices"]
    nv, nf = len(verts), P.n_facets
    lines = ["OFF", f"{nv} {nf} {nv + nf - 2}"]
    for v in verts:
        lines.append(" ".join(f"{float(mp.mpf(c)):.17g}" for c in v))
    for k in range(nf):
        inc = facet_vertices(P, k)
        lines.append(" ".join(str(x) for x in [len(inc)] + inc))
    parts.append("\n".join(lines) + "\n")
    return "\n".join(parts)


def cmd_export(args) -> int:
    fmt = (args.format or "off").lower()
    if fmt not in ("off", "json"):
        raise UsageError(f"unknown format {args.format!r} (off or json)")
    doc = None
    if os.path.exists(args.spec):
        with open(args.spec) as f:
            raw = json.load(f)
        if "sigma" in raw:
            doc = raw
    if doc is not None:
        if fmt == "json":
            text = json.dumps(doc, indent=2) + "\n"
        else:
            text = _off_from_report(doc)
    else:
        body = body_from_spec(args.spec)
        text = to_off(body) if fmt == "off" else body.to_json() + "\n"
    _write_or_print(text, args.out)
    return 0


# -------------------------------------------------------------------- driver

def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--tol", default="1e-10")
    sub.add_argument("--digits", type=int, default=None)
    sub.add_argument("--max-degree", type=int, default=8)
    sub.add_argument("--starts", type=int, default=150)
    sub.add_argument("--out", default=None)
    sub.add_argument("--format", default=None)
    sub.add_argument("--jobs", type=int,
                     default=min(4, os.cpu_count() or 1))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polynest",
        description="largest dilated copies of polytopes inside polytopes")
    sp = ap.add_subparsers(dest="command", required=True)

    g = sp.add_parser("gen", help="write a body as polytope JSON")
    g.add_argument("spec")
    _add_common(g)
    g.set_defaults(func=cmd_gen)

    s = sp.add_parser("solve", help="maximize the copy of P inside Q")
    s.add_argument("P")
    s.add_argument("Q")
    _add_common(s)
    s.set_defaults(func=cmd_solve)

    e = sp.add_parser("exact", help="recover the exact algebraic dilation")
    e.add_argument("P")
    e.add_argument("Q")
    _add_common(e)
    e.set_defaults(func=cmd_exact)

    t = sp.add_parser("table", help="all ordered pairs of the five solids")
    _add_common(t)
    t.set_defaults(func=cmd_table)

    n = sp.add_parser("polygon-scan", help="n-gon in m-gon over a range")
    n.add_argument("m_max", type=int, nargs="?", default=12)
    n.add_argument("--formula", default=None,
                   help="JSON file with an \"expression\" in n and m to "
                        "compare against on coprime pairs")
    n.add_argument("--allow-large", action="store_true")
    _add_common(n)
    n.set_defaults(func=cmd_polygon_scan)

    x = sp.add_parser("export", help="write OFF or JSON geometry")
    x.add_argument("spec", help="body spec or solve-report JSON path")
    _add_common(x)
    x.set_defaults(func=cmd_export)
    return ap


def _validate(args):
    tol = float(args.tol)
    if not (0 < tol <= 1e-2):
        raise UsageError("tolerance must be in (0, 1e-2]")
    if args.digits is not None and args.digits < 30:
        raise UsageError("digits must be at least 30")
    if args.max_degree < 1:
        raise UsageError("max-degree must be positive")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _validate(args)
        return args.func(args)
    except (UsageError, GeometryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationFailed as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except (SolveError, RefineError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SOLVE
    except AlgrecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RECOVER


if __name__ == "__main__":
    sys.exit(main())
