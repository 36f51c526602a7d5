"""Command-line front end.

Subcommands: gen-tree (synthetic tree bundle), gen-graph (random graph
edge lists), delta (Gromov hyperbolicity of an edge list), train (node
classification on a bundle), gradcheck (finite-difference sweep of the
registry in gradchecks.py).

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import gradchecks as gc
from . import graphs as gr
from . import hyperbolicity as hy
from . import models as md
from . import training as tr
from . import treedepth as td
from .autodiff import NumericalError


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _cmd_gen_tree(args) -> int:
    ds = td.generate(max_d=args.max_depth, b=args.branching, dim=args.dim,
                     sigma0=args.sigma0, seed=args.seed)
    ds.features = td.center_normalize(ds.features)
    td.split(ds, seed=args.seed)
    td.save_bundle(ds, args.out)
    print("wrote %d nodes, %d edges, %d classes to %s (train/val/test %d/%d/%d)" % (
        ds.num_nodes, ds.graph.edges.shape[0], ds.num_classes, args.out,
        int(ds.train_mask.sum()), int(ds.val_mask.sum()), int(ds.test_mask.sum())))
    return 0


def _cmd_gen_graph(args) -> int:
    params = {}
    if args.kind == "ba":
        params["m"] = args.m
    elif args.kind == "nws":
        params["k"] = args.k
        params["p"] = args.p
    elif args.kind == "sbm":
        params["p_in"] = args.p_in
        if args.p_out is not None:
            params["p_out"] = args.p_out
        params["size_hi"] = args.size_hi
    g = gr.generate(args.kind, args.n, seed=args.seed, **params)
    gr.write_edge_list(g, args.out)
    print("wrote %s graph: %d nodes, %d edges to %s" % (
        args.kind, g.n, g.edges.shape[0], args.out))
    return 0


def _cmd_delta(args) -> int:
    g = gr.read_edge_list(args.edges)
    report = hy.hyperbolicity_report(g, mode=args.mode)
    if args.json:
        payload = {
            "n": report.n,
            "mode": report.mode,
            "delta": report.max_delta,
            "weighted_delta": report.weighted_delta,
        }
        if args.per_component:
            payload["components"] = [
                {"nodes": c.nodes, "delta": c.delta} for c in report.components
            ]
        print(json.dumps(payload, sort_keys=True))
        return 0
    print("delta = %g (mode=%s, n=%d, components=%d, weighted=%g)" % (
        report.max_delta, report.mode, report.n, len(report.components),
        report.weighted_delta))
    if args.per_component:
        for i, c in enumerate(report.components):
            print("  component %d: nodes=%d delta=%g" % (i, c.nodes, c.delta))
    return 0


# Per-model defaults for flags the user leaves unset: gcn trains with the
# higher rate and no decay, the hyperbolic model with a lower rate and a
# light decay.
_MODEL_DEFAULTS = {
    "gcn": {"lr": 0.1, "weight_decay": 0.0, "dropout": 0.0},
    "hypgcn": {"lr": 0.01, "weight_decay": 0.0001, "dropout": 0.0},
}


def _cmd_train(args) -> int:
    ds = td.load_bundle(args.data)
    defaults = _MODEL_DEFAULTS[args.model]
    lr = defaults["lr"] if args.lr is None else args.lr
    wd = defaults["weight_decay"] if args.weight_decay is None else args.weight_decay
    dropout = defaults["dropout"] if args.dropout is None else args.dropout
    spec = md.ModelSpec(
        kind=args.model,
        in_dim=ds.features.shape[1],
        hidden_dim=args.dim,
        num_classes=ds.num_classes,
        head="hyp_mlr" if args.model == "hypgcn" else "euclid_mlr",
        nonlinearity="identity" if args.model == "hypgcn" else "relu",
        c=args.curvature,
        dropout=dropout,
    )
    cfg = tr.TrainConfig(lr=lr, weight_decay=wd, dropout=dropout,
                         epochs=args.epochs, patience=args.patience,
                         seed=args.seed, dim=args.dim)
    data = tr.prepare(ds, spec)
    model = md.build_model(spec, seed=args.seed)
    metrics = tr.train(model, data, cfg)
    if args.metrics_out:
        metrics.write(args.metrics_out)
    last = metrics.records[-1]
    print("trained %s for %d epochs (best %d): val acc %.4f, test acc %.4f, %.1fs" % (
        args.model, len(metrics.records), metrics.best_epoch, last.val_acc,
        metrics.test_accuracy, metrics.wall_clock_seconds))
    return 0


def _cmd_gradcheck(args) -> int:
    if args.layer is not None and args.layer not in gc.CHECKS:
        raise ValueError(
            f"unknown check {args.layer!r}; choose from {', '.join(sorted(gc.CHECKS))}")
    names = [args.layer] if args.layer else None
    seeds = range(args.seeds)
    failures = 0
    total = 0
    for name, seed, res in gc.run_suite(names, seeds=seeds, tol=args.tol):
        total += 1
        if not res.passed:
            failures += 1
            print("%-16s seed=%-3d FAIL max_rel_err=%.3e" % (name, seed, res.max_rel_err))
        elif args.verbose:
            print("%-16s seed=%-3d pass max_rel_err=%.3e" % (name, seed, res.max_rel_err))
    print("%d/%d gradient checks passed (tol %g)" % (total - failures, total, args.tol))
    if failures:
        raise NumericalError("%d gradient checks failed" % failures)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="gyronet")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tree", help="generate a labeled tree bundle")
    p.add_argument("--max-depth", type=int, default=16)
    p.add_argument("--branching", type=int, default=2)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--sigma0", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=_cmd_gen_tree)

    p = sub.add_parser("gen-graph", help="generate a random graph edge list")
    p.add_argument("--kind", choices=("ba", "nws", "sbm", "tree"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=5, help="ba: attachments per new node")
    p.add_argument("--k", type=int, default=4, help="nws: ring neighbors (even)")
    p.add_argument("--p", type=float, default=0.15, help="nws: shortcut probability")
    p.add_argument("--p-in", type=float, default=0.3, help="sbm: intra-community edge probability")
    p.add_argument("--p-out", type=float, default=None, help="sbm: inter-community edge probability (default 2/n)")
    p.add_argument("--size-hi", type=int, default=15, help="sbm: max community size")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_gen_graph)

    p = sub.add_parser("delta", help="Gromov delta of an edge-list graph")
    p.add_argument("--edges", required=True, metavar="FILE")
    p.add_argument("--mode", choices=("exact", "pruned"), default="pruned")
    p.add_argument("--per-component", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_delta)

    p = sub.add_parser("train", help="train a node classifier on a bundle")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--model", choices=("gcn", "hypgcn"), required=True)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--weight-decay", type=float, default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--curvature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--metrics-out", default=None, metavar="FILE")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("gradcheck", help="finite-difference check of every op and layer")
    p.add_argument("--layer", default=None, metavar="NAME")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
