"""Command-line surface: generate, run, sweep, depth, rank.

Outputs are CSVs whose first comment line carries a hash of the full run
configuration, so identical configs produce byte-identical files.  Exit
codes: 0 success, 1 usage problem, 2 data problem, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__, backend_name
from .active import STRATEGY_NAMES, make_strategy
from .arf import AdaptiveRandomForest, ArfConfig
from .cascade import CascadeConfig, CascadeForest
from .errors import ConfigurationError, DataError
from .harness import (budget_sweep, config_hash, depth_experiment,
                      friedman_nemenyi, read_accuracy_csv, run_prequential)
from .hoeffding import HNBTConfig, HoeffdingTree
from .streams import STREAM_NAMES, load_dataset, make_stream, write_csv

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures on exit code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(1)


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers")


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers")


def _str_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="streamforest",
        description="Streaming deep-forest classification with budgeted "
                    "active learning.",
    )
    parser.add_argument(
        "--version", action="version",
        version="streamforest %s (%s backend)" % (__version__, backend_name()),
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_common(p):
        p.add_argument("--seed", type=int, default=1, help="random seed")
        p.add_argument("--config", metavar="PATH",
                       help="key=value file supplying flag defaults")

    g = sub.add_parser("generate", help="emit a synthetic stream as CSV",
                       parents=[], add_help=True)
    g.add_argument("--stream", required=True, choices=STREAM_NAMES)
    g.add_argument("--n", type=int, required=True, help="instance count")
    g.add_argument("--out", required=True, help="output CSV path")
    add_common(g)
    g.set_defaults(func=_cmd_generate)

    r = sub.add_parser("run", help="prequential run of one model")
    # exactly one of the two sources; enforced in _cmd_run so that a
    # --config file can supply either one as a default
    r.add_argument("--stream", choices=STREAM_NAMES)
    r.add_argument("--data", help="CSV/ARFF dataset path")
    r.add_argument("--format", choices=("csv", "arff"), default=None,
                   help="dataset format (default: by extension)")
    r.add_argument("--class-column", default=None,
                   help="class column/attribute name")
    r.add_argument("--n", type=int, default=None, help="instance cap")
    r.add_argument("--model", choices=("cascade", "forest", "tree"),
                   default="cascade")
    r.add_argument("--layers", type=int, default=2, help="cascade depth")
    r.add_argument("--trees", type=int, default=10, help="trees per forest")
    r.add_argument("--strategy", choices=STRATEGY_NAMES, default=None,
                   help="active-learning strategy (default: use all labels)")
    r.add_argument("--budget", type=float, default=0.5,
                   help="labeling budget B for --strategy")
    r.add_argument("--step", type=float, default=0.01,
                   help="threshold adjusting step s")
    r.add_argument("--window", type=int, default=1000,
                   help="tumbling accuracy window")
    r.add_argument("--out", default=None, help="window-records CSV path")
    add_common(r)
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="strategy x budget grid on one stream")
    s.add_argument("--stream", required=True, choices=STREAM_NAMES)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--budgets", type=_float_list,
                   default=[0.1, 0.3, 0.5, 0.7, 0.9])
    s.add_argument("--strategies", type=_str_list, default=["vu", "avu"])
    s.add_argument("--layers", type=int, default=2)
    s.add_argument("--trees", type=int, default=10)
    s.add_argument("--step", type=float, default=0.01)
    s.add_argument("--window", type=int, default=1000)
    s.add_argument("--out", default=None, help="grid CSV path")
    add_common(s)
    s.set_defaults(func=_cmd_sweep)

    d = sub.add_parser("depth", help="layer-count ablation")
    d.add_argument("--streams", type=_str_list, default=["sea_a", "agr_a"])
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--layers", type=_int_list, default=[1, 2, 3])
    d.add_argument("--trees", type=int, default=10)
    d.add_argument("--seeds", type=_int_list, default=[1, 2, 3])
    d.add_argument("--window", type=int, default=1000)
    d.add_argument("--out", default=None, help="ablation CSV path")
    add_common(d)
    d.set_defaults(func=_cmd_depth)

    k = sub.add_parser("rank", help="mean ranks and Friedman/Nemenyi stats")
    k.add_argument("--data", required=True, help="accuracy CSV path")
    k.add_argument("--alpha", type=float, default=0.05)
    k.add_argument("--out", default=None, help="mean-ranks CSV path")
    add_common(k)
    k.set_defaults(func=_cmd_rank)

    return parser


def _apply_config_file(parser, argv):
    """Pre-scan for --config and install its values as subcommand defaults."""
    if not argv or argv[0].startswith("-"):
        return
    probe = _Parser(add_help=False)
    probe.add_argument("--config")
    found, _ = probe.parse_known_args(argv[1:])
    if not found.config:
        return
    sub_actions = [a for a in parser._actions
                   if isinstance(a, argparse._SubParsersAction)]
    subparser = sub_actions[0].choices.get(argv[0]) if sub_actions else None
    if subparser is None:
        return
    actions = {a.dest: a for a in subparser._actions}
    values = {}
    with open(found.config, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise DataError("expected key=value", line=line_no)
            key, _, value = text.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            action = actions.get(key)
            if action is None:
                subparser.error("unknown config key %r" % key)
            values[key] = action.type(value) if action.type else value
    subparser.set_defaults(**values)


def _write_table(path, fieldnames, rows, comment):
    def cell(v):
        if isinstance(v, float):
            return repr(v)
        return str(v)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# %s\n" % comment)
        fh.write(",".join(fieldnames) + "\n")
        for row in rows:
            fh.write(",".join(cell(row[f]) for f in fieldnames) + "\n")


def _hash_args(args, keys) -> str:
    return config_hash({k: getattr(args, k) for k in keys})


def _cmd_generate(args) -> int:
    stream = make_stream(args.stream, seed=args.seed, length=args.n)
    digest = _hash_args(args, ("command", "stream", "n", "seed"))
    comment = "config-hash: %s\nstream=%s n=%d seed=%d" % (
        digest, args.stream, args.n, args.seed
    )
    write_csv(args.out, stream.schema, stream, comment=comment)
    print("wrote %d instances of %s to %s" % (args.n, args.stream, args.out))
    return 0


def _make_model(schema, args):
    if args.model == "cascade":
        return CascadeForest(
            schema,
            CascadeConfig.make(n_layers=args.layers, n_trees=args.trees,
                               seed=args.seed),
        )
    if args.model == "forest":
        return AdaptiveRandomForest(
            schema, ArfConfig(n_trees=args.trees, seed=args.seed)
        )
    return HoeffdingTree(schema, HNBTConfig(seed=args.seed))


def _cmd_run(args) -> int:
    if bool(args.stream) == bool(args.data):
        raise ConfigurationError("exactly one of --stream or --data is required")
    if args.stream:
        stream = make_stream(args.stream, seed=args.seed, length=args.n)
        source = args.stream
    else:
        stream = load_dataset(args.data, fmt=args.format,
                              class_column=args.class_column)
        source = args.data
    model = _make_model(stream.schema, args)
    strategy = None
    if args.strategy:
        strategy = make_strategy(args.strategy, args.budget,
                                 step=args.step, seed=args.seed)
    result = run_prequential(model, stream, strategy=strategy,
                             n=args.n, window=args.window)
    digest = _hash_args(
        args, ("command", "stream", "data", "n", "model", "layers", "trees",
               "strategy", "budget", "step", "seed", "window")
    )
    if args.out:
        _write_table(
            args.out,
            ("index", "window_accuracy", "accuracy", "label_fraction"),
            result.window_rows(),
            "config-hash: %s" % digest,
        )
    print("source            %s" % source)
    print("model             %s" % args.model)
    print("instances         %d" % result.n)
    print("accuracy          %.4f" % result.accuracy)
    print("label fraction    %.4f" % result.label_fraction)
    print("warnings/drifts   %d/%d" % (result.warnings, result.drifts))
    print("wall time         %.2fs" % result.wall_time)
    if args.out:
        print("records           %s" % args.out)
    return 0


def _cmd_sweep(args) -> int:
    for name in args.strategies:
        if name not in STRATEGY_NAMES:
            raise ConfigurationError(
                "unknown strategy %r (choose from %s)"
                % (name, ", ".join(STRATEGY_NAMES))
            )
    rows = budget_sweep(
        args.stream, args.n, args.budgets, strategies=args.strategies,
        seed=args.seed, n_layers=args.layers, n_trees=args.trees,
        step=args.step, window=args.window,
    )
    digest = _hash_args(
        args, ("command", "stream", "n", "budgets", "strategies", "layers",
               "trees", "step", "seed", "window")
    )
    fields = ("strategy", "budget", "accuracy", "label_fraction",
              "warnings", "drifts")
    if args.out:
        _write_table(args.out, fields, rows, "config-hash: %s" % digest)
        print("wrote %d rows to %s" % (len(rows), args.out))
    else:
        print(",".join(fields))
        for row in rows:
            print("%s,%g,%.4f,%.4f,%d,%d" % tuple(row[f] for f in fields))
    return 0


def _cmd_depth(args) -> int:
    for name in args.streams:
        if name not in STREAM_NAMES:
            raise ConfigurationError(
                "unknown stream %r (choose from %s)"
                % (name, ", ".join(STREAM_NAMES))
            )
    rows = depth_experiment(
        args.streams, args.n, layers=args.layers, n_trees=args.trees,
        seeds=args.seeds, window=args.window,
    )
    digest = _hash_args(
        args, ("command", "streams", "n", "layers", "trees", "seeds", "window")
    )
    fields = ("stream", "seed", "layers", "accuracy")
    if args.out:
        _write_table(args.out, fields, rows, "config-hash: %s" % digest)
        print("wrote %d rows to %s" % (len(rows), args.out))
    else:
        print(",".join(fields))
        for row in rows:
            print("%s,%d,%d,%.4f" % tuple(row[f] for f in fields))
    return 0


def _cmd_rank(args) -> int:
    matrix, methods, datasets = read_accuracy_csv(args.data)
    result = friedman_nemenyi(matrix, alpha=args.alpha,
                              methods=methods, datasets=datasets)
    width = max(len(m) for m in methods)
    print("%-*s  mean rank" % (width, "method"))
    for name, rank in zip(methods, result.mean_ranks):
        print("%-*s  %.4f" % (width, name, rank))
    verdict = "differ" if result.reject else "are indistinguishable"
    print("Friedman chi2 = %.4f, p = %.3g -> methods %s at alpha = %g"
          % (result.statistic, result.p_value, verdict, args.alpha))
    print("Nemenyi critical distance = %.4f" % result.critical_distance)
    if args.out:
        digest = _hash_args(args, ("command", "data", "alpha"))
        rows = [{"method": m, "mean_rank": float(r)}
                for m, r in zip(methods, result.mean_ranks)]
        _write_table(args.out, ("method", "mean_rank"), rows,
                     "config-hash: %s" % digest)
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 1
    except BrokenPipeError:
        return 0
    except ConfigurationError as exc:
        sys.stderr.write("streamforest: error: %s\n" % exc)
        return 1
    except (DataError, OSError) as exc:
        sys.stderr.write("streamforest: data error: %s\n" % exc)
        return 2
    except Exception as exc:  # pragma: no cover - defensive catch-all
        sys.stderr.write("streamforest: %s: %s\n" % (type(exc).__name__, exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
