"""Max-min coordinated FRB allocation.

``solve_degraded`` optimizes one FDC with the allocations of the other FDCs in
its subsystem held fixed, by bisection on the SINR target where each
feasibility check is a bottleneck assignment. ``solve_greedy`` sweeps that
subproblem over all FDCs until the minimum SINR stops improving.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import GainTensor
from .config import SystemConfig
from .lbap import FeasibilityCoefficients, build_feasibility_lbap, check_feasibility, solve_lbap
from .metrics import Allocation, fdc_interference_power, sinr_matrix

ABS_FLOOR = 1e-30
MAX_BISECTION_ITERS = 200
ENUMERATION_FALLBACK_MAX_K = 6


class DegradedProblem:
    """One FDC (``target``) to allocate against fixed FDCs ``others``.

    ``perm`` holds the current allocation of every FDC; only the rows listed
    in ``others`` are read. FDCs outside ``others + [target]`` do not exist
    for this subproblem.
    """

    def __init__(self, g: GainTensor, perm: np.ndarray, others: Sequence[int], target: int,
                 noise_term: float):
        self.g = g
        self.perm = np.asarray(perm, dtype=int)
        self.others = np.asarray([int(n) for n in others if n != target], dtype=int)
        self.target = int(target)
        self.noise = float(noise_term)
        k = g.users_per_fdc
        frb = np.arange(k)
        o = self.others
        u = self.perm[o]                                            # (C, K) scheduled users
        gi = g.interference
        # Gain from the target's user k onto the scheduled user of fixed FDC n, FRB l.
        self.fixed_from_target = gi[o[:, None, None], u[:, None, :], self.target,
                                    frb[None, :, None], frb[None, None, :]]       # (C, K, K)
        self.fixed_signal = g.tx[o[:, None], u, frb[None, :]]                        # (C, K)
        among = gi[o[:, None, None], u[:, None, :], o[None, :, None], u[None, :, :],
                   frb[None, None, :]]                                               # (C, C, K)
        self.fixed_interference = among.sum(axis=1)                                  # (C, K)
        self.target_signal = g.tx[self.target]                                       # (K, K)
        onto_target = gi[self.target, frb[:, None, None], o[None, :, None],
                         u[None, :, :], frb[None, None, :]]                          # (K, C, K)
        self.target_interference = onto_target.sum(axis=1)                           # (K, K)

    @property
    def fdcs(self) -> np.ndarray:
        return np.append(self.others, self.target)

    def coefficients(self, t: float) -> FeasibilityCoefficients:
        a_fixed = t * self.fixed_from_target
        b_fixed = self.fixed_signal - t * (self.fixed_interference + self.noise)
        a_target = t * self.target_interference - self.target_signal
        b_target = np.full(self.target_signal.shape[1], -t * self.noise)
        return FeasibilityCoefficients(
            a_hat=np.concatenate([a_fixed, a_target[None]], axis=0),
            b_hat=np.concatenate([b_fixed, b_target[None]], axis=0),
        )

    def bounds(self) -> tuple[float, float]:
        fdcs = self.fdcs
        gi = self.g.interference[np.ix_(fdcs, np.arange(self.g.users_per_fdc), fdcs)]  # (S, K, S, K, L)
        worst = gi.max(axis=3).sum(axis=2)
        best = gi.min(axis=3)
        # Self blocks are zero, exclude them from the min as well.
        best[np.arange(len(fdcs)), :, np.arange(len(fdcs)), :] = 0.0
        best = best.sum(axis=2)
        signal = self.g.tx[fdcs]
        v_min = float(np.min(signal / (worst + self.noise)))
        v_max = float(np.max(signal / (best + self.noise)))
        return v_min, v_max

    def min_sinr(self, target_perm) -> float:
        perm = self.perm.copy()
        perm[self.target] = target_perm
        sinr = sinr_matrix(self.g, perm, self.noise, fdcs=self.fdcs)
        return float(np.nanmin(sinr))


def degraded_coefficients(g: GainTensor, perm, others: Sequence[int], target: int, t: float,
                          cfg: SystemConfig) -> FeasibilityCoefficients:
    return DegradedProblem(g, perm, others, target, cfg.noise_term).coefficients(t)


def bisection_bounds(g: GainTensor, perm, others: Sequence[int], target: int,
                     cfg: SystemConfig) -> tuple[float, float]:
    return DegradedProblem(g, perm, others, target, cfg.noise_term).bounds()


@dataclass
class DegradedResult:
    perm: np.ndarray
    achieved: float
    lower: float
    upper: float
    v_min: float
    v_max: float
    iterations: int
    fallback: bool = False


def _enumerate_best(problem: DegradedProblem) -> np.ndarray:
    k = problem.g.users_per_fdc
    best, best_val = None, -math.inf
    for cand in itertools.permutations(range(k)):
        val = problem.min_sinr(np.asarray(cand))
        if val > best_val:
            best, best_val = np.asarray(cand), val
    return best


def solve_degraded(g: GainTensor, perm, others: Sequence[int], target: int,
                   cfg: SystemConfig) -> DegradedResult:
    """Bisection over the SINR target; each midpoint is an LBAP feasibility check."""
    problem = DegradedProblem(g, perm, others, target, cfg.noise_term)
    v_min, v_max = problem.bounds()
    lower, upper = v_min, v_max
    witness = None
    iterations = 0
    while iterations < MAX_BISECTION_ITERS:
        iterations += 1
        t = 0.5 * (upper + lower)
        feasible, cand = check_feasibility(problem.coefficients(t))
        if feasible:
            lower, witness = t, cand
        else:
            upper = t
        gap = upper - lower
        if (gap < cfg.bisection_tol * lower) if lower >= ABS_FLOOR else (gap < ABS_FLOOR * v_max):
            break

    fallback = False
    if witness is None:
        feasible, cand = check_feasibility(problem.coefficients(v_min))
        if feasible:
            witness = cand
        else:
            fallback = True
            if g.users_per_fdc <= ENUMERATION_FALLBACK_MAX_K:
                witness = _enumerate_best(problem)
            else:
                witness = solve_lbap(build_feasibility_lbap(problem.coefficients(v_min))).perm
    return DegradedResult(perm=np.asarray(witness), achieved=problem.min_sinr(witness),
                          lower=lower, upper=upper, v_min=v_min, v_max=v_max,
                          iterations=iterations, fallback=fallback)


def predicted_bisection_iterations(v_min: float, v_max: float, lower: float, tol: float) -> int:
    """Halvings needed to shrink ``[v_min, v_max]`` below ``tol * lower``."""
    if v_max - v_min <= 0:
        return 1
    return max(1, math.ceil(math.log2((v_max - v_min) / (tol * lower))))


def order_fdcs(g: GainTensor, cfg: SystemConfig) -> np.ndarray:
    """Optimization order: most interfered FDC first, ties by index."""
    n = g.num_fdcs
    if cfg.fdc_ordering == "identity":
        return np.arange(n)
    if cfg.fdc_ordering == "random":
        return np.random.default_rng(cfg.rng_seed).permutation(n)
    poi = fdc_interference_power(g, cfg)
    return np.asarray(sorted(range(n), key=lambda i: (-poi[i], i)))


@dataclass
class SolveReport:
    allocation: Allocation
    min_sinr_trace: list[float]
    outer_iterations: int
    fdc_order: list[int]
    converged: bool
    bisection_iterations: list[int] = field(default_factory=list)
    fallbacks: int = 0
    wall_time: float = 0.0

    @property
    def min_sinr(self) -> float:
        return self.min_sinr_trace[-1]

    def to_dict(self) -> dict:
        return {
            "allocation": self.allocation.to_list(),
            "min_sinr_trace": list(self.min_sinr_trace),
            "outer_iterations": self.outer_iterations,
            "fdc_order": list(self.fdc_order),
            "converged": self.converged,
            "bisection_iterations": list(self.bisection_iterations),
            "fallbacks": self.fallbacks,
            "wall_time": self.wall_time,
        }


def solve_greedy(g: GainTensor, cfg: SystemConfig) -> SolveReport:
    start = time.perf_counter()
    n, k = g.num_fdcs, g.users_per_fdc
    order = [int(i) for i in order_fdcs(g, cfg)]
    perm = np.tile(np.arange(k), (n, 1))
    bisections, fallbacks = [], 0

    # Step 1: grow the subsystem one FDC at a time; the first keeps the identity allocation.
    placed = [order[0]]
    for target in order[1:]:
        res = solve_degraded(g, perm, placed, target, cfg)
        perm[target] = res.perm
        placed.append(target)
        bisections.append(res.iterations)
        fallbacks += res.fallback

    def global_min(p):
        return float(np.min(sinr_matrix(g, p, cfg.noise_term)))

    # Steps 2-3: re-solve every FDC against all others until the minimum SINR settles.
    trace = [global_min(perm)]
    converged = False
    rounds = 0
    while rounds < cfg.max_greedy_rounds:
        rounds += 1
        current = trace[-1]
        for target in order:
            res = solve_degraded(g, perm, order, target, cfg)
            bisections.append(res.iterations)
            fallbacks += res.fallback
            candidate = perm.copy()
            candidate[target] = res.perm
            value = global_min(candidate)
            # Bisection is only tolerance-exact; never trade down.
            if value >= current:
                perm, current = candidate, value
        trace.append(current)
        prev = trace[-2]
        if abs(trace[-1] - prev) < cfg.greedy_tol * prev if prev > 0 else trace[-1] == prev:
            converged = True
            break

    return SolveReport(allocation=Allocation(perm), min_sinr_trace=trace, outer_iterations=rounds,
                       fdc_order=order, converged=converged, bisection_iterations=bisections,
                       fallbacks=fallbacks, wall_time=time.perf_counter() - start)
