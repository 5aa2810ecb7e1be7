"""Session fixtures: solved and refined pipeline results are cached so the
expensive global searches run once per session regardless of which test
modules ask for them."""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polynest.geometry import make_platonic
from polynest.solver import SolverConfig, solve_global
from polynest.refine import (build_square_system, detect_incidences,
                             newton_refine)


class SolveCache:
    def __init__(self):
        self._reports = {}
        self._refined = {}

    def report(self, p: str, q: str, seed: int = 0):
        key = (p, q, seed)
        if key not in self._reports:
            P = make_platonic(p, "1")
            Q = make_platonic(q, "1")
            self._reports[key] = solve_global(P, Q, SolverConfig(seed=seed))
        return self._reports[key]

    def refined(self, p: str, q: str, digits: int):
        key = (p, q, digits)
        if key not in self._refined:
            rep = self.report(p, q)
            Q = make_platonic(q, "1")
            P = make_platonic(p, "1")
            inc = detect_incidences(rep.best, Q, P=P)
            system = build_square_system(inc)
            sol = newton_refine(system, rep.best, digits)
            self._refined[key] = (system, sol)
        return self._refined[key]


@pytest.fixture(scope="session")
def cache():
    return SolveCache()


@pytest.fixture(scope="session")
def battery(cache):
    """All randomized property batteries, run once."""
    import properties
    logs = []
    for p, q, digits in [("D", "I", 60), ("I", "D", 60), ("C", "I", 60),
                         ("D", "O", 60), ("T", "I", 60), ("D", "T", 60)]:
        _, sol = cache.refined(p, q, digits)
        logs.append((f"{p} in {q}", sol.convergence_log))
    return properties.run_all(logs)
