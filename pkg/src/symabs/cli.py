"""Batch command-line entry point.

Subcommands: generate (partition family + hierarchy exports), relate
(compare two partition files), label (chord concept labels), learn (the
teacher/student rule loop).  All outputs are deterministic; identical
reruns produce byte-identical files.  Exit codes: 0 ok, 1 usage, 2 data
error, 3 compute error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .core import (GeneratorSet, SymabsError, Window, load_generator_set,
                   standard_generators)
from .engine import AbstractionFamily, ExpansionPolicy, induction_family
from .infolattice import entropy, learn_loop
from .lattice import complete_hierarchy
from .music import label_table, load_chords
from .partition import load_partition, relate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_COMPUTE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _vector(text, n=None):
    parts = [int(p) for p in text.split(",")]
    if n is not None:
        if len(parts) == 1:
            parts = parts * n
        if len(parts) != n:
            raise ValueError(f"expected {n} components in {text!r}")
    return tuple(parts)


def _build_parser():
    parser = _Parser(prog="symabs",
                     description="symmetry-driven abstraction hierarchies")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="compute a partition family and its DAG")
    gen.add_argument("--n", type=int, default=2, help="lattice dimension")
    gen.add_argument("--lo", default=None, help="window lower corner, e.g. -1,-1")
    gen.add_argument("--hi", default=None, help="window upper corner, e.g. 1,1")
    gen.add_argument("--tau", type=int, default=1, help="period bound for the standard set")
    gen.add_argument("--generators", default=None, help="generator set JSON (overrides --tau)")
    gen.add_argument("--delta-k", type=int, default=1)
    gen.add_argument("--max-k", type=int, default=8)
    prune = gen.add_mutually_exclusive_group()
    prune.add_argument("--prune", dest="prune", action="store_true", default=False)
    prune.add_argument("--no-prune", dest="prune", action="store_false")
    gen.add_argument("--strict", action="store_true",
                     help="fail when any entry is only approximate")
    gen.add_argument("--full-run", action="store_true",
                     help="lift the subset-count safety bound for long runs")
    gen.add_argument("--jobs", type=int, default=1)
    gen.add_argument("--format", choices=("dot", "json", "both"), default="both")
    figures = gen.add_mutually_exclusive_group()
    figures.add_argument("--figures", dest="figures", action="store_true", default=True)
    figures.add_argument("--no-figures", dest="figures", action="store_false")
    gen.add_argument("--out", required=True, help="output directory")

    rel = sub.add_parser("relate", help="compare two partition JSON files")
    rel.add_argument("partition_p")
    rel.add_argument("partition_q")

    lab = sub.add_parser("label", help="concept labels for a chord CSV")
    lab.add_argument("--chords", required=True)
    lab.add_argument("--n", type=int, required=True)
    lab.add_argument("--range", default=None,
                     help="instrument range a,b for validation")
    lab.add_argument("--out", default=None, help="write the TSV here instead of stdout")

    lrn = sub.add_parser("learn", help="run the rule-learning loop")
    lrn.add_argument("--chords", required=True)
    lrn.add_argument("--n", type=int, required=True)
    lrn.add_argument("--family", required=True, help="family directory from generate")
    lrn.add_argument("--max-rules", type=int, default=8)
    lrn.add_argument("--eps", type=float, default=1e-9)
    figures = lrn.add_mutually_exclusive_group()
    figures.add_argument("--figures", dest="figures", action="store_true", default=True)
    figures.add_argument("--no-figures", dest="figures", action="store_false")
    lrn.add_argument("--out", required=True, help="output directory")
    return parser


def _cmd_generate(args):
    if args.generators:
        genset = load_generator_set(args.generators)
    else:
        genset = standard_generators(args.n, args.tau)
    n = genset.dimension or args.n
    lo = _vector(args.lo, n) if args.lo else (-1,) * n
    hi = _vector(args.hi, n) if args.hi else (1,) * n
    window = Window(lo, hi)
    policy = ExpansionPolicy(delta_k=args.delta_k, max_k=args.max_k)
    if args.prune:
        from .engine import pruned_subset_masks
        masks = pruned_subset_masks(genset)
    else:
        masks = list(range(1 << len(genset)))
    print(f"subsets scheduled: {len(masks)}")
    if len(masks) > 100000 and not args.full_run:
        raise SymabsError(
            f"{len(masks)} subsets exceed the desk-scale bound; "
            "pass --full-run to proceed")
    fam = induction_family(genset, window, policy=policy, masks=masks,
                           jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    fam.save(args.out)
    dag = complete_hierarchy(fam)
    dag.save(
        dot_path=os.path.join(args.out, "dag.dot")
        if args.format in ("dot", "both") else None,
        json_path=os.path.join(args.out, "dag.json")
        if args.format in ("json", "both") else None,
    )
    with open(os.path.join(args.out, "entries.tsv"), "w") as fh:
        fh.write("mask\tsubset\tcells\texpansion_k\tapproximate\n")
        for mask in fam.masks():
            fh.write("\t".join([
                str(mask), fam.subset_name(mask),
                str(fam.entries[mask].cell_count),
                str(fam.expansion.get(mask, 0)),
                "yes" if mask in fam.approximate else "no",
            ]) + "\n")
    dup = fam.duplicate_classes()
    collapsed = sum(len(c) - 1 for c in dup)
    print(f"subsets computed: {len(fam.entries)}")
    print(f"duplicates collapsed: {collapsed}")
    print(f"max expansion k: {fam.max_expansion()}")
    print(f"approximate entries: {len(fam.approximate)}")
    if args.figures:
        from .report import render_dag
        render_dag(dag, os.path.join(args.out, "dag.png"))
    if args.strict and fam.approximate:
        print("strict mode: approximate entries present", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def _cmd_relate(args):
    p = load_partition(args.partition_p)
    q = load_partition(args.partition_q)
    if p.space != q.space:
        raise ValueError("partitions are over different windows")
    print(relate(p, q).value)
    return EXIT_OK


def _cmd_label(args):
    rng = _vector(args.range) if args.range else None
    if rng is not None and len(rng) != 2:
        raise ValueError("--range needs exactly two values a,b")
    chords, _, _ = load_chords(args.chords, args.n)
    table = label_table(chords, valid_range=rng)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    return EXIT_OK


def _cmd_learn(args):
    fam = AbstractionFamily.load(args.family)
    chords, measure, _ = load_chords(args.chords, args.n)
    if measure.space != fam.window:
        # learn on the family's window when the corpus fits inside it
        if not (isinstance(fam.window, Window)
                and fam.window.contains_window(measure.space)):
            raise ValueError("chord range does not fit the family window")
        counts = [0] * len(fam.window)
        for chord in chords:
            counts[fam.window.index(chord)] += 1
        from .infolattice import Measure
        measure = Measure.from_counts(fam.window, counts)
    masks = fam.masks()
    family = [fam.entries[m] for m in masks]
    rules, trace = learn_loop(measure, family, args.max_rules, args.eps)
    for rec in trace:
        rec["subset"] = fam.subset_name(masks[rec["subset"]])
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "trace.jsonl"), "w") as fh:
        for rec in trace:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(os.path.join(args.out, "trace.tsv"), "w") as fh:
        fh.write("k\tsubset\tdivergence\tstudentEntropy\n")
        for rec in trace:
            fh.write(f"{rec['k']}\t{rec['subset']}\t{rec['divergence']!r}\t"
                     f"{rec['studentEntropy']!r}\n")
    npts = len(measure.space)
    final_entropy = trace[-1]["studentEntropy"] if trace \
        else entropy([1.0 / npts] * npts)
    print(f"rules learned: {len(rules)}")
    for rec in trace:
        print(f"rule {rec['k']}: {rec['subset']} divergence={rec['divergence']:g}")
    print(f"final student entropy: {final_entropy:.12g}")
    if args.figures and trace:
        from .report import render_learning
        render_learning(trace, os.path.join(args.out, "learning.png"))
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    handlers = {
        "generate": _cmd_generate,
        "relate": _cmd_relate,
        "label": _cmd_label,
        "learn": _cmd_learn,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SymabsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
