"""Command line entry point: ``drw-pubsub run | summarize | gen-topology``."""

from __future__ import annotations

import argparse
import logging
import sys

from drw_pubsub import __version__, harness
from drw_pubsub.errors import ConfigError, ParameterError
from drw_pubsub.topology import dump_edge_list, dump_positions, generate_unit_disk

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

log = logging.getLogger("drw_pubsub")


def _run(args) -> int:
    try:
        cfg = harness.load_config(args.config)
    except OSError as e:
        log.error("cannot read config %s: %s", args.config, e.strerror or e)
        return EXIT_IO
    out = args.out or cfg.output
    if not out:
        raise ConfigError("no output path: pass --out or set [experiment] output")
    records = harness.run_experiment(cfg, jobs=args.jobs)
    harness.write_csv(records, out)
    log.info("%s: wrote %d records to %s", cfg.name, len(records), out)
    return EXIT_OK


def _summarize(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        rows = harness.read_csv(fh.read())
    if not rows:
        raise ConfigError(f"{args.input} holds no records")
    group_by = [c for c in (args.group_by or "").split(",") if c]
    try:
        summary = harness.summarize(rows, group_by)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    sys.stdout.write(harness.summary_to_csv(summary, group_by))
    return EXIT_OK


def _gen_topology(args) -> int:
    try:
        t = generate_unit_disk(args.n, args.radius, args.seed)
    except ParameterError as e:
        raise ConfigError(str(e)) from None
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(dump_edge_list(t))
    if args.positions:
        with open(args.positions, "w", encoding="utf-8") as fh:
            fh.write(dump_positions(t))
    log.info("wrote %d nodes / %d edges to %s", t.n, t.edge_count, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drw-pubsub", description=__doc__)
    p.add_argument("--version", action="version", version=f"drw-pubsub {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config and write CSV")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for replications")
    r.set_defaults(func=_run)

    s = sub.add_parser("summarize", help="per-group statistics of a result CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--group-by", default="kind", help="comma separated columns")
    s.set_defaults(func=_summarize)

    g = sub.add_parser("gen-topology", help="write a unit-disk graph as an edge list")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--radius", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--positions", help="also write an 'id x y' position file")
    g.set_defaults(func=_gen_topology)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    except OSError as e:
        log.error("I/O error: %s", e)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
