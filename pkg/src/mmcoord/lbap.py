"""Linear bottleneck assignment and the feasibility -> LBAP reduction.

Assignments are expressed column-wise: ``perm[l]`` is the row matched to
column ``l``. Rows are users, columns are FRBs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEASIBILITY_SLACK = 1e-12
SHIFT_PAD = 1e-6


class LbapError(ValueError):
    pass


@dataclass(frozen=True)
class AssignmentResult:
    perm: np.ndarray
    bottleneck: float


@dataclass(frozen=True)
class FeasibilityCoefficients:
    """Linear constraint family ``sum_k a[n, k, l] z[k, l] <= b[n, l]`` for every ``n, l``.

    ``shift`` is the positive constant that makes every shifted coefficient
    strictly positive; it is picked automatically when omitted.
    """

    a_hat: np.ndarray  # (C, K, K)
    b_hat: np.ndarray  # (C, K)
    shift: float | None = None

    def __post_init__(self):
        a = np.asarray(self.a_hat, dtype=float)
        b = np.asarray(self.b_hat, dtype=float)
        if a.ndim != 3 or a.shape[1] != a.shape[2] or b.shape != (a.shape[0], a.shape[2]):
            raise LbapError(f"inconsistent coefficient shapes a={a.shape} b={b.shape}")
        object.__setattr__(self, "a_hat", a)
        object.__setattr__(self, "b_hat", b)
        lowest = min(a.min(), b.min())
        if self.shift is None:
            object.__setattr__(self, "shift", 1.0 + max(0.0, -lowest) + SHIFT_PAD)
        elif not self.shift + lowest > 0:
            raise LbapError(f"shift {self.shift} does not make all coefficients positive "
                            f"(min coefficient {lowest})")


def _max_matching(allowed: np.ndarray) -> np.ndarray:
    """Kuhn's augmenting-path maximum matching on a boolean row x column mask.

    Returns ``match_col`` with the matched row per column, or -1.
    """
    k_rows, k_cols = allowed.shape
    adj = [np.flatnonzero(allowed[r]).tolist() for r in range(k_rows)]
    match_col = [-1] * k_cols
    match_row = [-1] * k_rows

    for root in range(k_rows):
        # Iterative DFS over alternating paths from the free row ``root``.
        seen = [False] * k_cols
        reached_from = [-1] * k_cols
        stack = [(root, iter(adj[root]))]
        free_col = -1
        while stack and free_col < 0:
            row, it = stack[-1]
            for col in it:
                if seen[col]:
                    continue
                seen[col] = True
                reached_from[col] = row
                if match_col[col] < 0:
                    free_col = col
                else:
                    stack.append((match_col[col], iter(adj[match_col[col]])))
                break
            else:
                stack.pop()
        col = free_col
        while col >= 0:
            row = reached_from[col]
            prev = match_row[row]
            match_col[col], match_row[row] = row, col
            col = prev
    return np.asarray(match_col)


def perfect_matching(allowed: np.ndarray) -> np.ndarray | None:
    match = _max_matching(allowed)
    return match if np.all(match >= 0) else None


def solve_lbap(cost) -> AssignmentResult:
    """Exact bottleneck assignment by threshold search over the sorted cost values."""
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise LbapError(f"cost matrix must be square, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise LbapError("cost matrix must be finite")
    values = np.unique(c)
    # Every row and column must be covered, so the optimum is at least this.
    floor = max(c.min(axis=1).max(), c.min(axis=0).max())
    lo = int(np.searchsorted(values, floor))
    hi = len(values) - 1
    best = None
    while lo < hi:
        mid = (lo + hi) // 2
        match = perfect_matching(c <= values[mid])
        if match is None:
            lo = mid + 1
        else:
            hi, best = mid, match
    if best is None or c[best, np.arange(len(best))].max() > values[lo]:
        best = perfect_matching(c <= values[lo])
    return AssignmentResult(perm=best, bottleneck=float(values[lo]))


def build_feasibility_lbap(coeffs: FeasibilityCoefficients) -> np.ndarray:
    m = coeffs.shift
    ratios = (m + coeffs.a_hat) / (m + coeffs.b_hat)[:, None, :]
    return ratios.max(axis=0)


def check_feasibility(coeffs: FeasibilityCoefficients) -> tuple[bool, np.ndarray | None]:
    result = solve_lbap(build_feasibility_lbap(coeffs))
    if result.bottleneck <= 1.0 + FEASIBILITY_SLACK:
        return True, result.perm
    return False, None
