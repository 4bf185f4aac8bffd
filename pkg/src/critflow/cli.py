"""Command-line entry points for the experiment recipes.

Subcommands: train, eval, sweep-k, sweep-hyper, generate-tm,
inspect-topology. Every flag has a config-file twin (flat key=value,
dashes as underscores); command-line values win. The effective
configuration is echoed into the output directory so any run can be
reproduced from its artifacts plus the seed.

Exit codes: 0 success, 1 usage error, 2 runtime/solver error.
"""

from __future__ import annotations

import argparse
import os
import sys
from math import comb, floor

import numpy as np

from . import evaluation, selectors, topology, traffic, training
from .policy import load_checkpoint, save_checkpoint
from .rerouting import build_rerouting_lp, default_epsilon
from .simplex import dump_lp
from .ecmp import compute_ecmp_fractions, ecmp_link_loads

DEFAULT_FRACTIONS = "0,0.05,0.1,0.15,0.2"
DEFAULT_METHODS = "ecmp,top_k,top_k_critical"
SWEEP_ALPHAS = "0.01,0.001,0.0001"
SWEEP_WIDTHS = "64,128,256"
SWEEP_BETAS = "0.1,0.01"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors must exit 1, not argparse's 2
        raise UsageError(message)


def _global_flags(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--actors", type=int, default=None)
    p.add_argument("--sync", action="store_const", const=True, default=None)
    p.add_argument("--checkpoint-every", type=int, default=None)
    p.add_argument("--dump-lp", default=None)


def _experiment_flags(p):
    p.add_argument("--topology", default=None)
    p.add_argument("--tms", default=None, help="traffic matrix file")
    p.add_argument("--tm-model", choices=["exponential", "uniform"], default=None)
    p.add_argument("--tm-count", type=int, default=None)
    p.add_argument("--tm-target-util", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-fraction", type=float, default=None)
    p.add_argument("--train-fraction", type=float, default=None)


def _trainer_flags(p):
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--alpha0", type=float, default=None)
    p.add_argument("--alpha-min", type=float, default=None)
    p.add_argument("--decay-every", type=int, default=None)
    p.add_argument("--decay-base", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--width", type=int, default=None)


def build_parser():
    parser = _Parser(prog="critflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, flags=()):
        p = sub.add_parser(name)
        _global_flags(p)
        for f in flags:
            f(p)
        return p

    add("inspect-topology", [_experiment_flags])

    p = add("generate-tm", [_experiment_flags])
    p.add_argument("--out-file", default=None)

    add("train", [_experiment_flags, _trainer_flags])

    p = add("eval", [_experiment_flags])
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--methods", default=None)
    p.add_argument("--skip-delay", action="store_const", const=True, default=None)

    p = add("sweep-k", [_experiment_flags])
    p.add_argument("--fractions", default=None)
    p.add_argument("--selector", default=None,
                   choices=["auto", "brute_force", "policy", "top_k", "top_k_critical"])
    p.add_argument("--checkpoint", default=None)

    p = add("sweep-hyper", [_experiment_flags, _trainer_flags])
    p.add_argument("--alphas", default=None)
    p.add_argument("--widths", default=None)
    p.add_argument("--betas", default=None)
    return parser


DEFAULTS = {
    "seed": 0, "out": "critflow-out", "actors": 1, "sync": False,
    "checkpoint_every": 500, "k_fraction": 0.1, "train_fraction": 0.7,
    "tm_model": "uniform", "tm_count": 20, "tm_target_util": 0.9,
    "iterations": 1000, "batch_size": 20, "alpha0": 0.001,
    "alpha_min": 0.0001, "decay_every": 500, "decay_base": 0.96,
    "beta": 0.1, "width": 128, "methods": DEFAULT_METHODS,
    "fractions": DEFAULT_FRACTIONS, "selector": "auto",
    "alphas": SWEEP_ALPHAS, "widths": SWEEP_WIDTHS, "betas": SWEEP_BETAS,
    "out_file": None, "skip_delay": False,
}

_TYPED = {"seed": int, "actors": int, "checkpoint_every": int, "tm_count": int,
          "iterations": int, "batch_size": int, "decay_every": int, "width": int,
          "k": int, "k_fraction": float, "train_fraction": float,
          "tm_target_util": float, "alpha0": float, "alpha_min": float,
          "decay_base": float, "beta": float,
          "sync": lambda s: s.lower() in ("1", "true", "yes"),
          "skip_delay": lambda s: s.lower() in ("1", "true", "yes")}


def _read_config(path):
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path} line {line_no}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            out[key] = _TYPED.get(key, str)(val) if val != "" else None
    return out


def resolve_options(args):
    """Merge CLI > config file > defaults into one flat namespace."""
    opts = dict(DEFAULTS)
    if args.config:
        opts.update(_read_config(args.config))
    for key, val in vars(args).items():
        if key in ("command", "config"):
            continue
        if val is not None:
            opts[key] = val
        else:
            opts.setdefault(key, None)
    return opts


def _echo_config(opts, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.txt"), "w", encoding="utf-8") as fh:
        for key in sorted(opts):
            if key == "command":
                continue
            val = opts[key]
            fh.write(f"{key}={'' if val is None else val}\n")


def resolve_k(opts, n):
    """Explicit --k wins; otherwise round-half-up of k_fraction * N(N-1)."""
    if opts.get("k") is not None:
        k = int(opts["k"])
        if not (0 < k <= n * (n - 1)):
            raise UsageError(f"k={k} out of range for {n * (n - 1)} flows")
        return k
    frac = float(opts["k_fraction"])
    if not (0 < frac <= 1):
        raise UsageError(f"k_fraction must be in (0,1], got {frac}")
    return max(1, int(floor(frac * n * (n - 1) + 0.5)))


def _load_topology(opts):
    if not opts.get("topology"):
        raise UsageError("--topology is required")
    return topology.load_topology(opts["topology"])


def _load_matrices(opts, topo):
    if opts.get("tms"):
        return traffic.load_tms(opts["tms"], topo.node_count)
    return traffic.generate_tms(topo, opts["tm_model"], opts["tm_count"],
                                target_ecmp_util=opts["tm_target_util"],
                                seed=opts["seed"])


def _dataset(opts, topo):
    matrices = _load_matrices(opts, topo)
    return traffic.split_dataset(matrices, opts["train_fraction"], opts["seed"])


def _trainer_config(opts, k, iterations=None):
    return training.TrainerConfig(
        batch_size=opts["batch_size"], k=k,
        total_iterations=iterations or opts["iterations"],
        alpha0=opts["alpha0"], decay_every=opts["decay_every"],
        decay_base=opts["decay_base"], alpha_min=opts["alpha_min"],
        beta=opts["beta"], actor_count=opts["actors"], width=opts["width"],
        seed=opts["seed"], sync=opts["sync"])


def _maybe_dump_first_lp(opts, topo, tm, flows):
    if not opts.get("dump_lp"):
        return
    fractions = compute_ecmp_fractions(topo)
    background = ecmp_link_loads(topo, tm, fractions, exclude=flows)
    problem = build_rerouting_lp(topo, tm, sorted(flows), background.load,
                                 default_epsilon(topo, max(len(flows), 1)))
    dump_lp(problem, opts["dump_lp"], name="rerouting")
    print(f"wrote LP dump to {opts['dump_lp']}")


def cmd_inspect_topology(opts):
    topo = _load_topology(opts)
    print(f"name: {topo.name}")
    print(f"nodes: {topo.node_count}")
    print(f"directed links: {topo.link_count}")
    print(f"flows: {topo.flow_count}")
    print(f"capacity: min {topo.capacity.min():g} max {topo.capacity.max():g}")
    print(f"cost: min {topo.cost.min():g} max {topo.cost.max():g}")
    print("strongly connected: yes")
    return 0


def cmd_generate_tm(opts):
    topo = _load_topology(opts)
    out_dir = opts["out"]
    _echo_config(opts, out_dir)
    tms = traffic.generate_tms(topo, opts["tm_model"], opts["tm_count"],
                               target_ecmp_util=opts["tm_target_util"],
                               seed=opts["seed"])
    path = opts.get("out_file") or os.path.join(out_dir, "tms.txt")
    traffic.save_tms(tms, path)
    print(f"wrote {len(tms)} matrices to {path}")
    return 0


def cmd_train(opts):
    topo = _load_topology(opts)
    dataset = _dataset(opts, topo)
    k = resolve_k(opts, topo.node_count)
    out_dir = opts["out"]
    _echo_config(opts, out_dir)
    config = _trainer_config(opts, k)
    ckpt = os.path.join(out_dir, "checkpoint.npz")
    first_train = dataset.train[0]
    _maybe_dump_first_lp(opts, topo, first_train,
                         [topology.flow_of_index(a, topo.node_count)
                          for a in range(k)])
    if config.actor_count <= 1:
        params, log = training.train(topo, dataset, config,
                                     checkpoint_path=ckpt,
                                     checkpoint_every=opts["checkpoint_every"])
    else:
        params, log = training.train_parallel(topo, dataset, config)
        save_checkpoint(ckpt, params, iteration=config.total_iterations)
    log.write_csv(os.path.join(out_dir, "training_log.csv"))
    last = log.records[-1]
    print(f"trained {config.total_iterations} iterations "
          f"(final mean reward {last.mean_reward:.4f}); checkpoint at {ckpt}")
    return 0


def cmd_eval(opts):
    topo = _load_topology(opts)
    dataset = _dataset(opts, topo)
    k = resolve_k(opts, topo.node_count)
    out_dir = opts["out"]
    _echo_config(opts, out_dir)
    methods = [m.strip() for m in opts["methods"].split(",") if m.strip()]
    params = None
    if "policy" in methods:
        if not opts.get("checkpoint"):
            raise UsageError("eval with the policy method requires --checkpoint")
        params, _, _, _ = load_checkpoint(opts["checkpoint"])
    test = dataset.test
    _maybe_dump_first_lp(opts, topo, test[0], [])
    records, aggregates = evaluation.eval_suite(
        topo, test, methods, k, params=params,
        include_delay=not opts["skip_delay"], seed=opts["seed"])
    evaluation.write_results_csv(records, os.path.join(out_dir, "results.csv"))
    evaluation.write_cdf_csv(records, os.path.join(out_dir, "cdf.csv"))
    for (method, metric), (mean, std) in sorted(aggregates.items()):
        print(f"{method:16s} {metric:9s} mean {mean:.4f} std {std:.4f}")
    return 0


def cmd_sweep_k(opts):
    topo = _load_topology(opts)
    dataset = _dataset(opts, topo)
    out_dir = opts["out"]
    _echo_config(opts, out_dir)
    fractions = [float(f) for f in opts["fractions"].split(",") if f.strip() != ""]
    for f in fractions:
        if not (0 <= f <= 1):
            raise UsageError(f"k fraction {f} outside [0,1]")
    n = topo.node_count
    n_flows = n * (n - 1)
    selector = opts["selector"]
    params = None
    if opts.get("checkpoint"):
        params, _, _, _ = load_checkpoint(opts["checkpoint"])
    test = dataset.test
    fr = compute_ecmp_fractions(topo)
    rows = []
    for f in sorted(set(fractions)):
        k = 0 if f == 0 else max(1, int(floor(f * n_flows + 0.5)))
        sel_name = selector
        if selector == "auto":
            if k == 0:
                sel_name = "ecmp"
            elif comb(n_flows, k) <= selectors.DEFAULT_COMBINATION_CAP:
                sel_name = "brute_force"
            elif params is not None:
                sel_name = "policy"
            else:
                sel_name = "top_k_critical"
        prs = []
        for tm in test:
            u_opt, _ = evaluation.solve_optimal_all_flows(topo, tm)
            if k == 0:
                selection = selectors.SelectionResult(flows=(), method="ecmp")
            elif sel_name == "brute_force":
                selection, _ = selectors.brute_force_best(topo, tm, k, fractions=fr)
            else:
                selection = evaluation.select(sel_name, topo, tm, k,
                                              params=params, fractions=fr,
                                              seed=opts["seed"])
            rec = evaluation.eval_one(topo, tm, selection, fractions=fr,
                                      include_delay=False, u_optimal=u_opt)
            prs.append(rec.pr_u)
        rows.append((f, k, sel_name, float(np.mean(prs))))
    path = os.path.join(out_dir, "sweep_k.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("fraction,k,selector,mean_pr_u\n")
        for f, k, sel_name, pr in rows:
            fh.write(f"{f},{k},{sel_name},{pr!r}\n")
            print(f"K={k:4d} ({f:.0%}, {sel_name}): mean pr_u {pr:.4f}")
    print(f"wrote {path}")
    return 0


def cmd_sweep_hyper(opts):
    topo = _load_topology(opts)
    dataset = _dataset(opts, topo)
    k = resolve_k(opts, topo.node_count)
    out_dir = opts["out"]
    _echo_config(opts, out_dir)
    alphas = [float(x) for x in opts["alphas"].split(",") if x.strip()]
    widths = [int(x) for x in opts["widths"].split(",") if x.strip()]
    betas = [float(x) for x in opts["betas"].split(",") if x.strip()]
    rows = []
    for alpha in alphas:
        for width in widths:
            for beta in betas:
                cell = dict(opts, alpha0=alpha, width=width, beta=beta,
                            alpha_min=min(opts["alpha_min"], alpha))
                config = _trainer_config(cell, k)
                if config.actor_count <= 1:
                    params, _ = training.train(topo, dataset, config)
                else:
                    params, _ = training.train_parallel(topo, dataset, config)
                records, agg = evaluation.eval_suite(
                    topo, dataset.test, ["policy"], k, params=params,
                    include_delay=False, seed=opts["seed"])
                pr = agg[("policy", "pr_u")][0]
                rows.append((alpha, width, beta, pr))
                print(f"alpha={alpha} width={width} beta={beta}: mean pr_u {pr:.4f}")
    path = os.path.join(out_dir, "sweep_hyper.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("alpha0,width,beta,mean_pr_u\n")
        for alpha, width, beta, pr in rows:
            fh.write(f"{alpha},{width},{beta},{pr!r}\n")
    print(f"wrote {path}")
    return 0


COMMANDS = {
    "inspect-topology": cmd_inspect_topology,
    "generate-tm": cmd_generate_tm,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep-k": cmd_sweep_k,
    "sweep-hyper": cmd_sweep_hyper,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        opts = resolve_options(args)
        opts["command"] = args.command
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
