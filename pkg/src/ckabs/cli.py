"""Command-line front end: ``ckabs <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .ck import ck_approx, kantorovich_lp_oracle
from .dynamics import sample_label_paths, simulate_trace
from .errors import AbstractionError
from .estimation import EstimationConfig, estimate_abstraction
from .experiments import complexity_rows, safety_experiment, safety_rows
from .markov import validate
from .refine import ck_metric, refine
from .safety import estimate_PH_curve, grid_abstraction, ground_truth_curve


def _config_line(args) -> str:
    items = {k: v for k, v in vars(args).items() if k != "func"}
    return "config " + json.dumps(items, sort_keys=True, default=str)


def cmd_simulate(args):
    system = io.load_system(args.system)
    if args.count == 1:
        trace = simulate_trace(system, args.seed, args.past, args.future)
        print(" ".join(map(str, trace.labels)))
        return 0
    paths = sample_label_paths(system, args.count, args.past, args.future, (args.seed,), args.threads)
    header = [f"t{t}" for t in range(-args.past, args.future + 1)]
    if args.out:
        io.write_csv(args.out, header, paths.tolist(), _config_line(args))
    else:
        for row in paths:
            print(" ".join(map(str, row)))
    return 0


def cmd_abstract(args):
    system = io.load_system(args.system)
    partition, _ = io.partition_from_dict(io.read_json(args.partition))
    cfg = EstimationConfig(args.samples, args.seed, args.zero_threshold, args.threads)
    chain = estimate_abstraction(system, partition, cfg)
    data = io.chain_to_dict(chain)
    data["config"] = _config_line(args)
    io.write_json(args.out, data)
    print(f"wrote {chain.n_states}-state chain to {args.out}")
    return 0


def cmd_ck(args):
    c1 = io.chain_from_dict(io.read_json(args.chain1))
    c2 = io.chain_from_dict(io.read_json(args.chain2))
    if args.oracle_k is not None:
        value, _ = kantorovich_lp_oracle(c1, c2, args.oracle_k)
        print(f"value {value!r}")
        print(f"k_used {args.oracle_k}")
        print("method oracle")
        return 0
    res = ck_approx(c1, c2, args.epsilon)
    print(f"value {res.value!r}")
    print(f"lower {res.lower!r}")
    print(f"upper {res.upper!r}")
    print(f"k_used {res.k_used}")
    print(f"nodes_visited {res.nodes_visited}")
    return 0


def cmd_refine(args):
    if args.metric != "ck":
        raise ValueError(f"unknown metric {args.metric!r}")
    system = io.load_system(args.system)
    cfg = EstimationConfig(args.samples, args.seed, args.zero_threshold)
    report = refine(system, ck_metric(args.epsilon), args.iters, cfg, workers=args.threads)
    io.write_json(args.out, {**io.partition_to_dict(report.partition, report.dropped),
                             "config": _config_line(args)})
    if args.report:
        io.write_json(args.report, {**io.report_to_dict(report), "config": _config_line(args)})
    if args.chain_out:
        io.write_json(args.chain_out, {**io.chain_to_dict(report.chain), "config": _config_line(args)})
    print(f"{report.chain.n_states} states after {args.iters} iterations")
    for line in report.drop_explanations():
        print(f"dropped: {line}")
    return 0


def cmd_verify(args):
    if args.ground_truth:
        if not args.system:
            raise ValueError("--ground-truth requires --system")
        curve = ground_truth_curve(io.load_system(args.system), args.hmax, args.samples,
                                   args.seed, args.unsafe)
        header = ["H", "P_H_ground_truth"]
    else:
        if not args.chain:
            raise ValueError("verify needs --chain or --ground-truth")
        chain = io.chain_from_dict(io.read_json(args.chain))
        problems = validate(chain)
        if problems:
            raise ValueError("chain is not a valid Markov chain: " + "; ".join(problems))
        curve = estimate_PH_curve(chain, args.beta, args.hmax, args.unsafe)
        header = ["H", "P_H_estimate"]
    rows = [[h, float(v)] for h, v in enumerate(curve)]
    if args.out:
        io.write_csv(args.out, header, rows, _config_line(args))
    for h, v in rows:
        print(f"{h},{v!r}")
    return 0


def cmd_grid(args):
    system = io.load_system(args.system)
    chain = grid_abstraction(system, args.parts, EstimationConfig(args.samples, args.seed),
                             args.unsafe)
    io.write_json(args.out, {**io.chain_to_dict(chain), "config": _config_line(args)})
    print(f"wrote {chain.n_states}-state grid chain to {args.out}")
    return 0


def cmd_figures(args):
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    comment = _config_line(args)
    rows = complexity_rows(k_max=args.kmax, seed=args.seed)
    io.write_csv(out / "complexity.csv",
                 ["alphabet_size", "k", "nodes_visited", "A_pow_k_plus_1", "A_pow_2k"], rows, comment)
    if not args.skip_safety:
        exp = safety_experiment(samples=args.samples, grid_samples=args.grid_samples,
                                truth_samples=args.truth_samples, hmax=args.hmax,
                                seed=args.seed, workers=args.threads)
        header, rows = safety_rows(exp)
        io.write_csv(out / "safety.csv", header, rows, comment)
        for n, rep in exp.refined.items():
            io.write_json(out / f"refine_N{n}.json", io.report_to_dict(rep))
    print(f"figure data written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (nonnegative)")
    common.add_argument("--threads", type=int, default=1, help="worker cap; 1 = sequential")

    parser = argparse.ArgumentParser(prog="ckabs", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="sample output traces")
    p.add_argument("--system", required=True)
    p.add_argument("--past", type=int, default=0)
    p.add_argument("--future", type=int, default=5)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("abstract", parents=[common], help="estimate a chain on a given partition")
    p.add_argument("--system", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--zero-threshold", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_abstract)

    p = sub.add_parser("ck", parents=[common], help="Cantor-Kantorovich distance of two chains")
    p.add_argument("--chain1", required=True)
    p.add_argument("--chain2", required=True)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--oracle-k", type=int, help="solve the exact transport problem at this length")
    p.set_defaults(func=cmd_ck)

    p = sub.add_parser("refine", parents=[common], help="greedy partition refinement")
    p.add_argument("--system", required=True)
    p.add_argument("--metric", default="ck")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--samples", type=int, default=50_000)
    p.add_argument("--zero-threshold", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--chain-out")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("verify", parents=[common], help="safe initial measure per horizon")
    p.add_argument("--chain")
    p.add_argument("--ground-truth", action="store_true")
    p.add_argument("--system")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--hmax", type=int, default=8)
    p.add_argument("--unsafe", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("grid", parents=[common], help="uniform grid abstraction")
    p.add_argument("--system", required=True)
    p.add_argument("--parts", type=int, required=True)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--unsafe", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("figures", parents=[common], help="CSV data for the complexity and safety plots")
    p.add_argument("--outdir", default="figures")
    p.add_argument("--kmax", type=int, default=15)
    p.add_argument("--samples", type=int, default=50_000)
    p.add_argument("--grid-samples", type=int, default=200_000)
    p.add_argument("--truth-samples", type=int, default=200_000)
    p.add_argument("--hmax", type=int, default=8)
    p.add_argument("--skip-safety", action="store_true")
    p.set_defaults(func=cmd_figures)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (AbstractionError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
