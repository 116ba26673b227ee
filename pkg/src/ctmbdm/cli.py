"""Command line entry point: ``ctmbdm <subcommand> ...``.

Results go to ``--out`` or standard output, progress to standard error.
Computation failures exit with status 1 and a single ``error: ...`` line;
malformed command lines exit with status 2.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .bdm import BdmConfig, Boundary, Variant, bdm, normalized_bdm
from .blocks import block_key
from .ctm import (
    TableError, build_distribution, ctm_table, load_table, lookup, max_exhaustive_shape,
    save_distribution, save_table,
)
from .entropy import best_block_entropy, block_entropy, entropy
from .harness import (
    all_strings, char_poly, correlation_sweep, default_sweep_configs, format_poly,
    graph_pair_report, is_cospectral, line_graph, measure_report, read_graph, shipped_corpus,
    shipped_strings,
)
from .turing import ConfigurationError, RuleSpace

log = logging.getLogger("ctmbdm")


def _shape(text: str):
    """``"7"`` -> 7, ``"4x4"`` -> (4, 4)."""
    try:
        parts = [int(p) for p in text.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must look like 7 or 4x4, got {text!r}") from None
    return parts[0] if len(parts) == 1 else tuple(parts)


def _injection(text: str):
    key, sep, bits = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected BLOCK=BITS, got {text!r}")
    try:
        return key, float(bits)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bits must be a number in {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctmbdm",
        description="Algorithmic complexity estimates from small Turing machines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ctm-build", help="enumerate a rule space and write a CTM table")
    p.add_argument("--t", type=int, required=True, help="number of states")
    p.add_argument("--k", type=int, required=True, help="number of symbols")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1, help="tape dimension (default: 1)")
    p.add_argument("--cutoff", type=int, help="step bound (default: Busy Beaver value where known)")
    p.add_argument("--base", type=_shape,
                   help="largest block shape kept, e.g. 7 or 4x4 (default: largest fully observed)")
    p.add_argument("--r", type=float, default=1.0,
                   help="bits added to the largest observed value of a shape for unseen blocks (default: 1.0)")
    p.add_argument("--partitions", type=int, default=1,
                   help="disjoint index ranges; the table does not depend on it (default: 1)")
    p.add_argument("--workers", type=int, help="worker processes (default: min(partitions, cpus))")
    p.add_argument("--sample", type=int, help="run only this many machines (stride sample)")
    p.add_argument("--stride", type=int, help="sample stride (default: golden-ratio stride)")
    p.add_argument("--seed", type=int, default=0, help="seed for the sample start (default: 0)")
    p.add_argument("--blanks", choices=("both", "zero"), default="both",
                   help="count each machine on the all-0 and all-(k-1) tapes, or only all-0 (default: both)")
    p.add_argument("--dist-out", type=Path, help="also write the raw output distribution")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("ctm-show", help="summarize a table or look up blocks")
    p.add_argument("--table", type=Path, required=True)
    p.add_argument("--block", action="append", default=[],
                   help="block to look up (1D: 0110, 2D: rows joined by '/', e.g. 01/10)")
    p.add_argument("--top", type=int, default=0, help="list the N simplest observed blocks")
    p.add_argument("--figure", type=Path, help="plot sorted block complexities to this file")

    p = sub.add_parser("bdm", help="BDM of strings or a matrix")
    p.add_argument("--table", type=Path, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path,
                     help="file: strings one per line (1D table) or one matrix (2D table)")
    src.add_argument("--string", help="a single string")
    p.add_argument("--block", type=int, required=True, help="block size (per dimension)")
    p.add_argument("--overlap", type=int,
                   help="step between consecutive blocks, 1..block (default: block, no overlap)")
    p.add_argument("--boundary", choices=[b.value for b in Boundary], default="trim")
    p.add_argument("--variant", choices=[v.value for v in Variant], default="plain")
    p.add_argument("--quadrants", default="UL", help="comma-separated quadrant per level (recursive)")
    p.add_argument("--fill", type=int, help="border symbol for addborder (default: best of 0 and k-1)")
    p.add_argument("--normalized", action="store_true", help="print normalized BDM in [0, 1]")
    p.add_argument("--inject", type=_injection, action="append", default=[],
                   metavar="BLOCK=BITS", help="override or add a table value before evaluating")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("entropy", help="Shannon, block and best-block entropy")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="file with one string per line")
    src.add_argument("--string")
    p.add_argument("--block", type=int, default=1, help="block size l (default: 1)")
    p.add_argument("--overlapping", action="store_true", help="sliding blocks instead of a partition")
    p.add_argument("--best", action="store_true", help="minimum over block sizes 1..n/2")
    p.add_argument("--normalized", action="store_true", help="normalize best block entropy")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("sweep", help="rank correlation of BDM configurations over all strings of a length")
    p.add_argument("--table", type=Path, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--configs", help="comma-separated bXoY list (default: every block/overlap pair)")
    p.add_argument("--reference", choices=("ctm", "entropy"), default="ctm")
    p.add_argument("--both-symbols", action="store_true", help="drop constant strings")
    p.add_argument("--out", type=Path)
    p.add_argument("--figure", type=Path, help="heat map of rho per configuration")

    p = sub.add_parser("graph-test", help="exact cospectrality test of two graph files")
    p.add_argument("first", type=Path)
    p.add_argument("second", type=Path)
    p.add_argument("--line", action="store_true", help="compare the line graphs too")

    p = sub.add_parser("report", help="measure report over a corpus, with an optional figure")
    p.add_argument("--table", type=Path, required=True)
    p.add_argument("--kind", choices=("strings", "graphs"), default="strings")
    p.add_argument("--input", type=Path,
                   help="strings file, or directory of graph files (default: bundled corpus)")
    p.add_argument("--block", type=int, required=True)
    p.add_argument("--overlap", type=int)
    p.add_argument("--boundary", choices=[b.value for b in Boundary], default="trim")
    p.add_argument("--out", type=Path)
    p.add_argument("--figure", type=Path)
    return parser


def parse(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


# -- helpers ---------------------------------------------------------------

def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
        log.info("wrote %s", out)


def _read_lines(path: Path) -> List[str]:
    return [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def _parse_block_arg(text: str):
    if "/" in text:
        return tuple(text.split("/"))
    return text


def read_matrix(text: str) -> np.ndarray:
    """Matrix format: equal-length digit lines.  Tensors start with ``dims=AxBxC``."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    if lines[0].startswith("dims="):
        dims = tuple(int(d) for d in lines[0][5:].split("x"))
        flat = "".join(lines[1:])
        if len(flat) != int(np.prod(dims)) or not flat.isdigit():
            raise ValueError(f"tensor body does not hold {int(np.prod(dims))} symbols")
        return np.array([int(c) for c in flat], dtype=np.int8).reshape(dims)
    if len({len(line) for line in lines}) != 1 or not all(line.isdigit() for line in lines):
        raise ValueError("matrix lines must be digit strings of equal length")
    return np.array([[int(c) for c in line] for line in lines], dtype=np.int8)


def _bdm_config(args) -> BdmConfig:
    quadrants = tuple(q.strip().upper() for q in getattr(args, "quadrants", "UL").split(","))
    return BdmConfig(args.block, args.overlap, args.boundary,
                     getattr(args, "variant", "plain"), quadrants, getattr(args, "fill", None))


# -- subcommands -----------------------------------------------------------

def _cmd_ctm_build(args) -> int:
    space = RuleSpace(args.t, args.k, args.dim)
    dist = build_distribution(space, args.cutoff, args.partitions, args.workers,
                              args.sample, args.stride, args.seed, args.blanks)
    if args.dist_out:
        save_distribution(dist, args.dist_out)
    base = args.base if args.base is not None else max_exhaustive_shape(dist)
    table = ctm_table(dist, base, args.r)
    save_table(table, args.out)
    log.info("%s: %d machines run, %d halting runs counted, base %s, %d rows", space,
             dist.sampling.size if dist.sampling else space.total, dist.total_halting, base,
             len(table.values))
    return 0


def _cmd_ctm_show(args) -> int:
    table = load_table(args.table)
    lines = [
        f"space: {table.space}",
        f"cutoff: {table.cutoff}",
        f"total_halting: {table.total_halting}",
        f"base_shape: {table.base_shape}",
        f"rows: {len(table.values)} ({len(table.counts)} observed)",
    ]
    if table.sampling:
        s = table.sampling
        lines.append(f"sample: size={s.size} stride={s.stride} seed={s.seed}")
    for text in args.block:
        key = block_key(_parse_block_arg(text))
        lines.append(f"{key},{lookup(table, key):.6f}")
    if args.top:
        simplest = sorted(table.counts, key=lambda b: (table.values[b], b))[:args.top]
        lines += [f"{b},{table.values[b]:.6f}" for b in simplest]
    if args.figure:
        from .plotting import distribution_plot
        distribution_plot(list(table.values.values()), args.figure, title=str(table.space))
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_bdm(args) -> int:
    table = load_table(args.table)
    if args.inject:
        table = table.with_values(dict(args.inject))
    cfg = _bdm_config(args)
    if args.string is not None:
        objects = [args.string]
    elif table.ndim == 1:
        objects = _read_lines(args.input)
    else:
        objects = [read_matrix(args.input.read_text(encoding="utf-8"))]
    out = []
    for obj in objects:
        if args.normalized:
            value = normalized_bdm(obj, table, args.block)
        else:
            value = bdm(obj, table, cfg).value
        out.append(f"{value:.6f}")
    _emit("\n".join(out) + "\n", args.out)
    return 0


def _cmd_entropy(args) -> int:
    strings = [args.string] if args.string is not None else _read_lines(args.input)
    out = []
    for s in strings:
        if args.best:
            l_best, h = best_block_entropy(s, args.normalized)
            out.append(f"{h:.6f} l={l_best}")
        elif args.block == 1 and not args.overlapping:
            out.append(f"{entropy(s):.6f}")
        else:
            out.append(f"{block_entropy(s, args.block, args.overlapping):.6f}")
    _emit("\n".join(out) + "\n", args.out)
    return 0


def _cmd_sweep(args) -> int:
    table = load_table(args.table)
    configs = (default_sweep_configs(args.length) if not args.configs
               else [c.strip() for c in args.configs.split(",") if c.strip()])
    report = correlation_sweep(all_strings(args.length, table.k), table, configs,
                               args.reference, args.both_symbols)
    _emit(report.to_text(), args.out)
    if args.figure:
        from .plotting import sweep_heatmap
        sweep_heatmap(report, args.figure)
    return 0


def _cmd_graph_test(args) -> int:
    g1, g2 = read_graph(args.first), read_graph(args.second)
    same = is_cospectral(g1, g2)
    lines = [f"cospectral: {'true' if same else 'false'}",
             f"first: {format_poly(char_poly(g1))}",
             f"second: {format_poly(char_poly(g2))}"]
    if args.line:
        l1, l2 = line_graph(g1), line_graph(g2)
        lines.append(f"line cospectral: {'true' if is_cospectral(l1, l2) else 'false'}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_report(args) -> int:
    table = load_table(args.table)
    cfg = BdmConfig(args.block, args.overlap, args.boundary)
    if args.kind == "strings":
        strings = _read_lines(args.input) if args.input else shipped_strings()
        text = measure_report(strings, table, [cfg], ids=strings)
        _emit(text, args.out)
        if args.figure:
            from .plotting import measure_scatter
            rows = [line.split(",") for line in text.splitlines()[1:]]
            pts = [(float(r[1]), float(r[4])) for r in rows if r[4]]
            measure_scatter([p[0] for p in pts], [p[1] for p in pts], args.figure,
                            "Shannon entropy H1 (bits)", f"BDM {cfg.label()} (bits)")
        return 0
    if args.input:
        graphs = [read_graph(p) for p in sorted(Path(args.input).glob("*.graph"))]
    else:
        graphs = shipped_corpus()
    report = graph_pair_report(graphs, table, cfg)
    _emit(report.to_text(), args.out)
    if args.figure:
        from .plotting import graph_pair_scatter
        graph_pair_scatter(report, args.figure)
    return 0


_COMMANDS = {
    "ctm-build": _cmd_ctm_build,
    "ctm-show": _cmd_ctm_show,
    "bdm": _cmd_bdm,
    "entropy": _cmd_entropy,
    "sweep": _cmd_sweep,
    "graph-test": _cmd_graph_test,
    "report": _cmd_report,
}


def execute(args: argparse.Namespace) -> int:
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, TableError, ConfigurationError, RuntimeError, KeyError) as exc:
        reason = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        sys.stderr.write(f"error: {reason}\n")
        return 1


def main(argv: Optional[List[str]] = None) -> int:
    args = parse(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
