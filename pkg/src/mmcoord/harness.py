"""Baselines, the exhaustive oracle and the Monte Carlo experiment driver."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .channel import GainTensor, build_gain_tensor, draw_small_scale
from .config import SystemConfig
from .coordinator import solve_greedy
from .lbap import solve_lbap
from .metrics import Allocation, min_rate, sinr_table, sum_rate
from .topology import LargeScaleCSI, Topology, draw_large_scale, generate_topology

log = logging.getLogger(__name__)

SCHEMES = ("greedy", "exhaustive", "single_fdc", "orthogonal")
DEFAULT_EXHAUSTIVE_CAP = 10**6
_CHUNK = 1 << 16


class OracleCapError(RuntimeError):
    pass


def exhaustive_size(num_fdcs: int, users: int) -> int:
    return math.factorial(users) ** num_fdcs


def _min_sinr_all(g: GainTensor, noise_term: float, cap: int):
    n, k = g.num_fdcs, g.users_per_fdc
    size = exhaustive_size(n, k)
    if size > cap:
        raise OracleCapError(f"exhaustive search over (K!)^N = {size} allocations exceeds cap {cap}")
    perms = np.asarray(list(itertools.permutations(range(k))))    # lexicographic
    f = len(perms)
    frb = np.arange(k)
    signal = g.tx[:, perms, frb]                                    # (N, F, K)
    pair = g.interference[np.arange(n)[:, None, None, None, None], perms[None, None, :, None, :],
                          np.arange(n)[None, :, None, None, None], perms[None, None, None, :, :],
                          frb]                                      # (N, N, F, F, K)
    radix = f ** np.arange(n - 1, -1, -1)
    best_val, best_idx = -math.inf, 0
    for lo in range(0, size, _CHUNK):
        idx = np.arange(lo, min(size, lo + _CHUNK))
        digits = (idx[:, None] // radix) % f                        # (C, N)
        worst = np.full(len(idx), np.inf)
        for a in range(n):
            interf = sum(pair[a, b][digits[:, a], digits[:, b]] for b in range(n))
            sinr = signal[a][digits[:, a]] / (interf + noise_term)
            worst = np.minimum(worst, sinr.min(axis=1))
        j = int(np.argmax(worst))
        if worst[j] > best_val:
            best_val, best_idx = float(worst[j]), int(idx[j])
    digits = (best_idx // radix) % f
    return Allocation(perms[digits]), best_val


def solve_exhaustive(g: GainTensor, cfg: SystemConfig, cap: int = DEFAULT_EXHAUSTIVE_CAP) -> Allocation:
    """Global max-min allocation by enumerating every FDC's permutations.

    Ties go to the lexicographically smallest allocation.
    """
    return _min_sinr_all(g, cfg.noise_term, cap)[0]


def solve_single_fdc(g: GainTensor, cfg: SystemConfig) -> Allocation:
    """Each FDC maximizes its own weakest transmission gain, blind to interference."""
    return Allocation(np.stack([solve_lbap(-g.tx[n]).perm for n in range(g.num_fdcs)]))


def orthogonal_rates(g: GainTensor, cfg: SystemConfig) -> np.ndarray:
    """Interference-free rates on globally orthogonal FRBs, normalized by 1/N for bandwidth."""
    perm = solve_single_fdc(g, cfg).perm
    snr = g.tx[np.arange(g.num_fdcs)[:, None], perm, np.arange(g.users_per_fdc)] / cfg.noise_term
    return np.log2(1.0 + snr) / g.num_fdcs


def eval_orthogonal(g: GainTensor, cfg: SystemConfig) -> tuple[float, float]:
    rates = orthogonal_rates(g, cfg)
    return float(rates.min()), float(rates.sum())


# ---------------------------------------------------------------- experiments

def drop_seed(root: int, drop: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([root, drop])


def realization_seed(root: int, drop: int, realization: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([root, drop, realization])


def make_drop(cfg: SystemConfig, root: int, drop: int) -> tuple[Topology, LargeScaleCSI]:
    rng = np.random.default_rng(drop_seed(root, drop))
    topo = generate_topology(cfg, rng)
    return topo, draw_large_scale(cfg, topo, rng)


def make_tensor(cfg: SystemConfig, csi: LargeScaleCSI, root: int, drop: int, realization: int) -> GainTensor:
    rng = np.random.default_rng(realization_seed(root, drop, realization))
    return build_gain_tensor(cfg, csi, draw_small_scale(cfg, rng), rng=rng)


@dataclass
class ExperimentSpec:
    base: SystemConfig
    power_sweep_dbm: list[float] = field(default_factory=lambda: [0.0, 10.0, 20.0, 30.0])
    num_large_scale_drops: int = 10
    num_small_scale_per_drop: int = 100
    schemes: tuple[str, ...] = ("greedy", "single_fdc", "orthogonal")
    output_path: str | None = None
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP
    workers: int = 1

    def __post_init__(self):
        if self.num_large_scale_drops < 1 or self.num_small_scale_per_drop < 1:
            raise ValueError("drop and realization counts must be >= 1")
        if not self.power_sweep_dbm:
            raise ValueError("power sweep is empty")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
        self.power_sweep_dbm = sorted(float(p) for p in self.power_sweep_dbm)
        self.schemes = tuple(s for s in SCHEMES if s in self.schemes)


@dataclass
class ResultRow:
    scheme: str
    power_dbm: float
    drop: int
    realization: int
    min_rate: float
    sum_rate: float
    min_sinr: float
    iterations: int
    wall_time: float
    status: str = "ok"


CSV_COLUMNS = ("scheme", "power_dbm", "drop", "realization", "min_rate", "sum_rate", "min_sinr",
               "iterations", "status")


def _row(scheme, power, drop, real, alloc_or_rates, g, cfg, iterations, elapsed) -> ResultRow:
    if isinstance(alloc_or_rates, Allocation):
        table = sinr_table(g, alloc_or_rates, cfg)
        return ResultRow(scheme, power, drop, real, min_rate(table), sum_rate(table),
                         float(table.sinr.min()), iterations, elapsed)
    rates = alloc_or_rates
    return ResultRow(scheme, power, drop, real, float(rates.min()), float(rates.sum()),
                     float(2.0 ** (rates.min() * g.num_fdcs) - 1.0), iterations, elapsed)


def run_cell(spec: ExperimentSpec, drop: int, realization: int, csi: LargeScaleCSI | None = None) -> list[ResultRow]:
    """All powers and schemes for one (drop, realization) on one gain tensor."""
    base = spec.base
    if csi is None:
        _, csi = make_drop(base, base.rng_seed, drop)
    g = make_tensor(base, csi, base.rng_seed, drop, realization)
    rows = []
    for power in spec.power_sweep_dbm:
        cfg = base.with_power_dbm(power)
        for scheme in spec.schemes:
            t0 = time.perf_counter()
            iterations = 0
            if scheme == "greedy":
                report = solve_greedy(g, cfg)
                result, iterations = report.allocation, report.outer_iterations
            elif scheme == "exhaustive":
                try:
                    result = solve_exhaustive(g, cfg, spec.exhaustive_cap)
                except OracleCapError as exc:
                    log.warning("skipping exhaustive: %s", exc)
                    rows.append(ResultRow(scheme, power, drop, realization, math.nan, math.nan,
                                          math.nan, 0, 0.0, status=f"skipped: {exc}"))
                    continue
            elif scheme == "single_fdc":
                result = solve_single_fdc(g, cfg)
            else:
                result = orthogonal_rates(g, cfg)
            rows.append(_row(scheme, power, drop, realization, result, g, cfg, iterations,
                             time.perf_counter() - t0))
    return rows


def _drop_rows(args) -> list[ResultRow]:
    spec, drop = args
    _, csi = make_drop(spec.base, spec.base.rng_seed, drop)
    rows = []
    for real in range(spec.num_small_scale_per_drop):
        rows.extend(run_cell(spec, drop, real, csi))
    return rows


def run_experiment(spec: ExperimentSpec) -> Iterator[ResultRow]:
    """Rows in (drop, realization, power, scheme) order; identical for any worker count."""
    jobs = [(spec, d) for d in range(spec.num_large_scale_drops)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for rows in pool.map(_drop_rows, jobs):
                yield from rows
    else:
        for job in jobs:
            yield from _drop_rows(job)


def summarize(rows: Iterable[ResultRow]) -> list[dict]:
    groups: dict[tuple[str, float], list[ResultRow]] = {}
    for r in rows:
        if r.status == "ok":
            groups.setdefault((r.scheme, r.power_dbm), []).append(r)
    out = []
    for (scheme, power) in sorted(groups, key=lambda key: (SCHEMES.index(key[0]), key[1])):
        rs = groups[(scheme, power)]
        out.append({
            "scheme": scheme,
            "power_dbm": power,
            "cells": len(rs),
            "mean_min_rate": float(np.mean([r.min_rate for r in rs])),
            "mean_sum_rate": float(np.mean([r.sum_rate for r in rs])),
            "mean_iterations": float(np.mean([r.iterations for r in rs])),
            "mean_wall_time": float(np.mean([r.wall_time for r in rs])),
        })
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: Iterable[ResultRow], fh, timing: bool = False) -> None:
    columns = CSV_COLUMNS + (("wall_time",) if timing else ())
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        d = asdict(r)
        writer.writerow([_fmt(d[c]) for c in columns])


def rows_to_csv(rows: Iterable[ResultRow], timing: bool = False) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, timing=timing)
    return buf.getvalue()


def save_results(spec: ExperimentSpec, rows: list[ResultRow], timing: bool = False) -> tuple[Path, Path]:
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out if out.suffix == ".csv" else out.with_suffix(".csv")
    summary_path = csv_path.with_suffix(".summary.json")
    try:
        with open(csv_path, "w", newline="") as fh:
            write_csv(rows, fh, timing=timing)
        summary_path.write_text(json.dumps(summarize(rows), indent=2))
    except OSError as exc:
        raise OSError(f"cannot write results to {csv_path}: {exc}") from exc
    return csv_path, summary_path
