"""End-to-end acceptance gate.

Each test prints one CRITERION line so the run log reads as a checklist.
Tolerances and budgets are fixed here on purpose; loosening them is a
behavior change, not a test fix.
"""
import json
import math
import time

import mpmath as mp

from polynest.algrec import min_poly_guess
from polynest.cli import main
from polynest.exactfield import (QuadExt, dual_edge_product, eval_poly,
                                 exact_sigma)
from polynest.geometry import make_platonic, make_polygon
from polynest.refine import placement_from_solution
from polynest.solver import _Arena, solve_global
from polynest._rotation import rot2d

SOLID_ORDER = ("T", "C", "O", "D", "I")

# optimal dilation of unit-edge P inside unit-edge Q, 8 significant digits
SIGMA_8 = {
    ("T", "C"): "0.29590654", ("T", "O"): "0.50000000",
    ("T", "D"): "0.16263158", ("T", "I"): "0.27009076",
    ("C", "T"): "1.4142136", ("C", "O"): "1.0606602",
    ("C", "D"): "0.39428348", ("C", "I"): "0.61803399",
    ("O", "T"): "1.0000000", ("O", "C"): "0.58578644",
    ("O", "D"): "0.31340182", ("O", "I"): "0.54018151",
    ("D", "T"): "2.2882456", ("D", "C"): "1.6180340",
    ("D", "O"): "1.8512296", ("D", "I"): "1.3090170",
    ("I", "T"): "1.3474429", ("I", "C"): "0.93874890",
    ("I", "O"): "1.1810180", ("I", "D"): "0.58017873",
}

# minimal polynomial of sigma(T in I), low degree first
POLY_T_IN_I = (
    160801, 0, -1536272, 0, 21904868, 0, -217962112, 0, 1256858478, 0,
    -4717349124, 0, 12495147544, 0, -24298372458, 0, 35173457839, 0,
    -37805732980, 0, 29448527368, 0, -15736320636, 0, 5246771058, 0,
    -924552262, 0, 60348584, 0, -1318386, 0, 5041)

# minimal polynomial of sigma(D in T), low degree first
POLY_D_IN_T = (
    65610000, 0, -3236760000, 0, 31024053000, 0, -94166084250, 0,
    79233311025, 0, -17054118000, 0, 809622720, 0, -3701760, 0, 4096)

CONTACT_CLASSES = {
    ("D", "I"): {"face": 10, "edge": 10, "vertex": 0},
    ("I", "D"): {"face": 12, "edge": 0, "vertex": 0},
    ("C", "I"): {"face": 4, "edge": 4, "vertex": 0},
    ("D", "O"): {"face": 12, "edge": 0, "vertex": 0},
    ("T", "I"): {"face": 2, "edge": 1, "vertex": 1},
    ("D", "T"): {"face": 9, "edge": 0, "vertex": 0},
}


def _verdict(k: int, ok: bool, detail: str):
    print(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {k}: {detail}"


def test_criterion_1_full_table(tmp_path):
    """All 20 platonic pairs from the command line, 1e-7 absolute."""
    out = tmp_path / "table.csv"
    t0 = time.monotonic()
    code = main(["table", "--out", str(out), "--jobs", "4"])
    elapsed = time.monotonic() - t0
    if code != 0:
        _verdict(1, False, f"table command exited with {code}")
    rows = out.read_text().strip().splitlines()
    header = rows[0].split(",")
    assert header == ["Q\\P", "T", "C", "O", "D", "I"]
    got = {}
    for line in rows[1:]:
        cells = line.split(",")
        q = cells[0]
        for p, cell in zip(header[1:], cells[1:]):
            if cell:
                got[(q, p)] = cell
    bad = []
    for key, want in SIGMA_8.items():
        cell = got.get(key)
        if cell is None or abs(float(cell) - float(want)) > 1e-7:
            bad.append(f"{key}: {cell} vs {want}")
    ok = not bad and len(got) == 20 and elapsed < 1800
    _verdict(1, ok, f"20 dilations at 1e-7 in {elapsed:.1f}s"
             + (f"; mismatches {bad}" if bad else ""))


def test_criterion_2_closed_form_substitution(cache):
    """Recovered polynomials annihilate the known closed forms exactly."""
    checked = 0
    failures = []
    for q in SOLID_ORDER:
        for p in SOLID_ORDER:
            closed = exact_sigma(q, p)
            if p == q or closed is None:
                continue
            try:
                _, sol = cache.refined(p, q, 120)
                alg = min_poly_guess(sol.values["sigma"], 4)
                if alg is None:
                    failures.append(f"{p} in {q}: no polynomial found")
                elif eval_poly(alg.poly, closed) != QuadExt(0):
                    failures.append(f"{p} in {q}: {alg.poly} not zero at sigma")
                else:
                    checked += 1
            except Exception as e:  # report every pair, not just the first
                failures.append(f"{p} in {q}: {e}")
    ok = checked == 18 and not failures
    _verdict(2, ok, f"{checked}/18 exact substitutions are zero"
             + (f"; {failures}" if failures else ""))


def test_criterion_3_degree_32_recovery(tmp_path):
    out = tmp_path / "ti.json"
    t0 = time.monotonic()
    code = main(["exact", "T", "I", "--digits", "800",
                 "--max-degree", "32", "--out", str(out)])
    elapsed = time.monotonic() - t0
    if code != 0:
        _verdict(3, False, f"exact command exited with {code}")
    doc = json.loads(out.read_text())
    coeffs = tuple(int(c) for c in doc["algebraic_number"]["coeffs"])
    ok = coeffs == POLY_T_IN_I and elapsed < 600
    _verdict(3, ok, f"degree-32 polynomial of sigma(T in I) recovered and "
             f"verified in {elapsed:.1f}s (budget 600s)")


def test_criterion_4_degree_16_recovery(tmp_path):
    out = tmp_path / "dt.json"
    t0 = time.monotonic()
    code = main(["exact", "D", "T", "--digits", "350",
                 "--max-degree", "16", "--out", str(out)])
    elapsed = time.monotonic() - t0
    if code != 0:
        _verdict(4, False, f"exact command exited with {code}")
    doc = json.loads(out.read_text())
    coeffs = tuple(int(c) for c in doc["algebraic_number"]["coeffs"])
    ok = coeffs == POLY_D_IN_T and elapsed < 300
    _verdict(4, ok, f"degree-16 polynomial of sigma(D in T) recovered and "
             f"verified in {elapsed:.1f}s (budget 300s)")


def test_criterion_5_reciprocity():
    phi = QuadExt.phi()
    r2 = QuadExt.sqrt(2)
    recip = exact_sigma("O", "D") * phi ** 3 / r2 == exact_sigma("I", "C")
    cube_pair = dual_edge_product("C") == 2 * r2
    dodec_pair = dual_edge_product("D") == 4 / phi ** 3
    ok = recip and cube_pair and dodec_pair
    _verdict(5, ok, "sigma(D in O) * phi^3/sqrt2 = sigma(C in I); polar "
             "edge products 2*sqrt2 and 4/phi^3, all exact")


def test_criterion_6_icosahedron_in_dodecahedron(cache):
    system, sol = cache.refined("I", "D", 60)
    with mp.workdps(90):
        sigma = mp.mpf(sol.values["sigma"])
        want_sigma = (QuadExt(3) + QuadExt.sqrt(5)).to_mp(90) / 4
        sigma_ok = abs(sigma - want_sigma) < mp.mpf("1e-55")

        pl = placement_from_solution(system, sol)
        placed = [[mp.mpf(c) for c in v] for v in pl.vertices]
        D = make_platonic("D", "1", digits=80)
        marks = [v for v in D.vertices_mp(80)
                 if any(abs(c) < mp.mpf("1e-40") for c in v)]
        assert len(marks) == 12  # D vertices with one zero coordinate
        want = mp.root(5, 4) / (4 * mp.sqrt((1 + mp.sqrt(5)) / 2))
        worst = mp.mpf(0)
        for v in placed:
            d = min(mp.sqrt(mp.fsum((a - b) ** 2 for a, b in zip(v, w)))
                    for w in marks)
            worst = max(worst, abs(d - want))
        dist_ok = worst < mp.mpf("1e-20")
    ok = sigma_ok and dist_ok
    _verdict(6, ok, "sigma(I in D) = (3+sqrt5)/4 and every placed vertex "
             f"sits 5^(1/4)/(4 sqrt phi) from its nearest marked D vertex "
             f"(worst deviation {mp.nstr(worst, 3)})")


def test_criterion_7_contact_structures(cache):
    bad = []
    for (p, q), want in sorted(CONTACT_CLASSES.items()):
        system, _ = cache.refined(p, q, 60)
        got = system.classify()
        if got != want:
            bad.append(f"{p} in {q}: {got} vs {want}")
    _verdict(7, not bad, "six optimal contact structures match"
             + (f"; {bad}" if bad else ""))


def test_criterion_8_randomized_batteries(battery):
    total = sum(r["trials"] for r in battery.values())
    fails = {k: r["failures"] for k, r in battery.items() if r["failures"]}
    ok = (total >= 1000 and not fails
          and battery["algrec_roundtrip"]["trials"] == 100)
    _verdict(8, ok, f"{total} randomized trials across {len(battery)} "
             f"batteries, zero failures"
             + (f"; failing: {fails}" if fails else ""))


def test_criterion_9_polygon_brute_force():
    t0 = time.monotonic()
    worst = 0.0
    worst_pair = None
    for m in range(4, 13):
        for n in range(3, m):
            P, Q = make_polygon(n, "1"), make_polygon(m, "1")
            sig = solve_global(P, Q).best.sigma_f
            ar = _Arena(P, Q)
            period = 2 * math.pi / math.lcm(n, m)
            steps = int(period / 1e-5) + 1
            best = -1.0
            for i in range(steps):
                f, _ = ar.sigma_at(rot2d(i * 1e-5))
                if f > best:
                    best = f
            diff = abs(sig - best)
            if diff > worst:
                worst, worst_pair = diff, (n, m)
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-6 and elapsed < 600
    _verdict(9, ok, f"45 polygon pairs vs 1e-5 rotation grid, worst "
             f"difference {worst:.2e} at {worst_pair}, {elapsed:.1f}s "
             f"(budget 600s)")
