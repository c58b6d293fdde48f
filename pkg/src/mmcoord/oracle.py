"""Brute-force cross-checks of the solvers on small random instances."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .coordinator import DegradedProblem, solve_degraded, solve_greedy
from .harness import _min_sinr_all, make_drop, make_tensor
from .lbap import FeasibilityCoefficients, check_feasibility, solve_lbap


@dataclass
class OracleCheck:
    name: str
    trials: int
    failures: int

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name}: {self.trials - self.failures}/{self.trials}"


def brute_force_bottleneck(cost: np.ndarray) -> float:
    k = cost.shape[0]
    cols = np.arange(k)
    return min(cost[list(p), cols].max() for p in itertools.permutations(range(k)))


def brute_force_feasible(a_hat: np.ndarray, b_hat: np.ndarray) -> bool:
    """Does any permutation satisfy ``a[n, perm[l], l] <= b[n, l]`` for all ``n, l``?"""
    k = a_hat.shape[1]
    cols = np.arange(k)
    return any(np.all(a_hat[:, list(p), cols] <= b_hat) for p in itertools.permutations(range(k)))


def check_lbap(rng: np.random.Generator, trials: int) -> OracleCheck:
    failures = 0
    for _ in range(trials):
        k = int(rng.integers(2, 7))
        cost = rng.integers(0, 20, size=(k, k)).astype(float) if rng.random() < 0.5 else rng.random((k, k))
        if solve_lbap(cost).bottleneck != brute_force_bottleneck(cost):
            failures += 1
    return OracleCheck("LBAP bottleneck == permutation brute force", trials, failures)


def check_feasibility_equivalence(rng: np.random.Generator, trials: int) -> OracleCheck:
    failures = 0
    for _ in range(trials):
        k = int(rng.integers(2, 6))
        c = int(rng.integers(1, 5))
        a = rng.normal(size=(c, k, k))
        b = rng.normal(size=(c, k)) + 0.5
        feasible, witness = check_feasibility(FeasibilityCoefficients(a, b))
        if feasible != brute_force_feasible(a, b):
            failures += 1
        elif feasible and not np.all(a[:, witness, np.arange(k)] <= b + 1e-12):
            failures += 1
    return OracleCheck("feasibility verdict == constraint enumeration", trials, failures)


def check_degraded(rng: np.random.Generator, trials: int, cfg: SystemConfig) -> OracleCheck:
    failures = 0
    for trial in range(trials):
        k = int(rng.integers(2, 5))
        n = int(rng.integers(1, 4))
        local = cfg.replace(num_fdcs=n, users_per_fdc=k)
        _, csi = make_drop(local, int(rng.integers(2**32)), trial)
        g = make_tensor(local, csi, 0, trial, 0)
        perm = np.stack([rng.permutation(k) for _ in range(n)])
        target = int(rng.integers(n))
        res = solve_degraded(g, perm, range(n), target, local)
        problem = DegradedProblem(g, perm, range(n), target, local.noise_term)
        best = max(problem.min_sinr(np.asarray(p)) for p in itertools.permutations(range(k)))
        if res.achieved < best / (1.0 + local.bisection_tol) * (1.0 - 1e-12):
            failures += 1
    return OracleCheck("degraded bisection within tolerance of K! enumeration", trials, failures)


def check_greedy_dominated(rng: np.random.Generator, trials: int, cfg: SystemConfig) -> OracleCheck:
    failures = 0
    local = cfg.replace(num_fdcs=3, users_per_fdc=3)
    for trial in range(trials):
        _, csi = make_drop(local, int(rng.integers(2**32)), trial)
        g = make_tensor(local, csi, 0, trial, 0)
        _, optimum = _min_sinr_all(g, local.noise_term, 10**6)
        if solve_greedy(g, local).min_sinr > optimum * (1.0 + 1e-9):
            failures += 1
    return OracleCheck("greedy never exceeds exhaustive optimum", trials, failures)


def run_oracle_suite(cfg: SystemConfig, seed: int = 0, trials: int = 100) -> list[OracleCheck]:
    rng = np.random.default_rng(seed)
    return [
        check_lbap(rng, trials),
        check_feasibility_equivalence(rng, trials),
        check_degraded(rng, max(1, trials // 2), cfg),
        check_greedy_dominated(rng, max(1, trials // 4), cfg),
    ]
