"""Command-line entry point: ``mmcoord {generate,solve,sweep,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .channel import ContractError, GainTensor
from .config import ConfigError, SystemConfig, load_config
from .coordinator import solve_greedy
from .harness import (SCHEMES, ExperimentSpec, OracleCapError, eval_orthogonal, make_drop, make_tensor,
                      run_experiment, save_results, solve_exhaustive, solve_single_fdc, summarize,
                      write_csv)
from .lbap import LbapError
from .metrics import AllocationError, min_rate, sinr_table, sum_rate
from .topology import save_scenario

log = logging.getLogger("mmcoord")


def _csv_list(text: str, cast=str) -> list:
    return [cast(item) for item in text.split(",") if item.strip()]


def _load(args) -> tuple[SystemConfig, dict]:
    cfg, extra = load_config(args.config) if args.config else (SystemConfig(), {})
    if args.seed is not None:
        cfg = cfg.replace(rng_seed=args.seed)
    return cfg, extra


def cmd_generate(args) -> int:
    cfg, _ = _load(args)
    topo, csi = make_drop(cfg, cfg.rng_seed, args.drop)
    if args.out:
        save_scenario(args.out, cfg, topo, csi)
        log.info("scenario written to %s", args.out)
    else:
        json.dump({"config": cfg.to_dict(), "topology": topo.to_dict(), "large_scale": csi.to_dict()},
                  sys.stdout)
        sys.stdout.write("\n")
    if args.gains_out:
        make_tensor(cfg, csi, cfg.rng_seed, args.drop, args.realization).save(args.gains_out)
        log.info("gain tensor written to %s", args.gains_out)
    return 0


def cmd_solve(args) -> int:
    cfg, _ = _load(args)
    if args.power_dbm:
        cfg = cfg.with_power_dbm(_csv_list(args.power_dbm, float)[0])
    if args.gains:
        g = GainTensor.load(args.gains)
        cfg = cfg.replace(num_fdcs=g.num_fdcs, users_per_fdc=g.users_per_fdc)
    else:
        _, csi = make_drop(cfg, cfg.rng_seed, args.drop)
        g = make_tensor(cfg, csi, cfg.rng_seed, args.drop, args.realization)

    out = {}
    for scheme in _csv_list(args.scheme):
        if scheme == "greedy":
            report = solve_greedy(g, cfg)
            table = sinr_table(g, report.allocation, cfg)
            out[scheme] = report.to_dict() | {"min_rate": min_rate(table), "sum_rate": sum_rate(table)}
        elif scheme in ("exhaustive", "single_fdc"):
            alloc = solve_exhaustive(g, cfg, args.cap) if scheme == "exhaustive" else solve_single_fdc(g, cfg)
            table = sinr_table(g, alloc, cfg)
            out[scheme] = {"allocation": alloc.to_list(), "min_rate": min_rate(table),
                           "sum_rate": sum_rate(table)}
        elif scheme == "orthogonal":
            lo, total = eval_orthogonal(g, cfg)
            out[scheme] = {"min_rate": lo, "sum_rate": total}
        else:
            raise ConfigError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    text = json.dumps(out, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_sweep(args) -> int:
    cfg, extra = _load(args)
    exp = dict(extra.get("experiment", {}) or {})
    if args.power_dbm:
        exp["power_sweep_dbm"] = _csv_list(args.power_dbm, float)
    if args.scheme:
        exp["schemes"] = tuple(_csv_list(args.scheme))
    if args.drops is not None:
        exp["num_large_scale_drops"] = args.drops
    if args.realizations is not None:
        exp["num_small_scale_per_drop"] = args.realizations
    if args.cap is not None:
        exp["exhaustive_cap"] = args.cap
    if args.workers is not None:
        exp["workers"] = args.workers
    if args.out:
        exp["output_path"] = args.out
    if "schemes" in exp:
        exp["schemes"] = tuple(exp["schemes"])
    try:
        spec = ExperimentSpec(base=cfg, **exp)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad experiment settings: {exc}") from exc

    rows = list(run_experiment(spec))
    if spec.output_path:
        csv_path, summary_path = save_results(spec, rows, timing=args.timing)
        log.info("wrote %s and %s", csv_path, summary_path)
    else:
        write_csv(rows, sys.stdout, timing=args.timing)
    for entry in summarize(rows):
        log.info("%-11s P=%5.1f dBm  min-rate %.4f  sum-rate %.3f  (%d cells)", entry["scheme"],
                 entry["power_dbm"], entry["mean_min_rate"], entry["mean_sum_rate"], entry["cells"])
    return 0


def cmd_oracle(args) -> int:
    from .oracle import run_oracle_suite

    cfg, _ = _load(args)
    checks = run_oracle_suite(cfg, seed=cfg.rng_seed, trials=args.trials)
    for check in checks:
        print(check.line())
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmcoord", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML scenario file")
        p.add_argument("--seed", type=int, help="root RNG seed (overrides config)")
        p.add_argument("--out", help="output path")

    p = sub.add_parser("generate", help="emit topology and large-scale CSI as JSON")
    common(p)
    p.add_argument("--drop", type=int, default=0)
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--gains-out", help="also write the gain tensor (.npz or .json)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve one instance and print the report")
    common(p)
    p.add_argument("--scheme", default="greedy", help=f"comma list from {','.join(SCHEMES)}")
    p.add_argument("--power-dbm", help="transmit power in dBm")
    p.add_argument("--gains", help="replay a saved gain tensor instead of drawing one")
    p.add_argument("--drop", type=int, default=0)
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--cap", type=int, default=10**6, help="exhaustive search size limit")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a Monte Carlo power sweep")
    common(p)
    p.add_argument("--scheme", help=f"comma list from {','.join(SCHEMES)}")
    p.add_argument("--power-dbm", help="comma list of transmit powers in dBm")
    p.add_argument("--drops", type=int)
    p.add_argument("--realizations", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--timing", action="store_true", help="add a wall_time column to the CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="brute-force validation suite")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, ContractError, AllocationError, LbapError, OracleCapError, OSError) as exc:
        print(f"mmcoord: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
