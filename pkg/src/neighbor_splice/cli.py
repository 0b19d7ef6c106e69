"""Command line entry point: retrieve, derive, pmi, stats, verify, replay and synth."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import corpus
from .bruteforce import generate_instances, min_actions_bruteforce, min_spans_l2rs_dp
from .errors import InternalInconsistency, SpliceError
from .oracles import POLICIES, expand_neighbors, oracle_l2rs
from .parser import parse_min_cost
from .preprocessing import (
    DEFAULT_MIN_COUNT,
    DEFAULT_TAU,
    PMITable,
    build_pmi_table,
    load_stopwords,
)

EXIT_OK, EXIT_DATA, EXIT_VERIFY = 0, 1, 2


class VerificationFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are data errors, keeping exit code 2 for failed verification
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DATA, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` comments and ``[section]`` headers are ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line or (line.startswith("[") and line.endswith("]")):
                continue
            if "=" not in line:
                raise SpliceError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
                value = value[1:-1]
            out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, config: dict) -> None:
    known = {}
    for action in parser._actions:
        if action.dest not in config:
            continue
        value = config[action.dest]
        if action.nargs == 0 or isinstance(action, argparse.BooleanOptionalAction):
            value = value.lower() in ("1", "true", "yes", "on")
        known[action.dest] = value
    parser.set_defaults(**known)


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        _write_text(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- subcommands

def cmd_synth(args):
    from .synth import synthetic_corpus

    corpus.write_jsonl(args.output, synthetic_corpus(args.count, args.seed))
    return EXIT_OK


def cmd_retrieve(args):
    records = corpus.load_corpus(args.input)
    embeddings = corpus.load_embeddings(args.embeddings) if args.embeddings else None
    out = corpus.retrieve(records, args.k, args.metric, embeddings, args.prototypes,
                          args.kmeans_iters, args.seed, args.lowercase, not args.keep_duplicates)
    corpus.write_jsonl(args.output, out)
    return EXIT_OK


def _load_pmi(path, records, lowercase):
    enc = corpus.encode_corpus(records, lowercase)
    vocab = enc.vocab
    with open(path, encoding="utf-8") as fh:
        return PMITable.from_jsonl(fh, encode=lambda w: vocab[w] if w in vocab else None,
                                   examples=len(records))


def cmd_derive(args):
    records = corpus.load_corpus(args.input)
    policies = POLICIES if args.policy == "all" else (args.policy,)
    stop = frozenset(load_stopwords(args.stopwords)) if args.mask in ("overlap", "both") else frozenset()
    pmi = None
    if args.mask in ("pmi", "both") and args.pmi_table:
        pmi = _load_pmi(args.pmi_table, records, args.lowercase)
    opts = corpus.DeriveOptions(policies, args.pad, args.mask, stop, frozenset(), pmi,
                                args.tau, args.min_count)
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    out, timings = corpus.derive_corpus(records, opts, args.lowercase, jobs)
    corpus.write_jsonl(args.output, out)
    meta = {
        "policies": list(policies), "pad": args.pad, "mask": args.mask, "lowercase": args.lowercase,
        "tau": args.tau, "min_count": args.min_count,
        "pmi_events": "source/target token co-occurrence, counted once per example",
        "pmi_table": "file" if pmi is not None else ("corpus" if args.mask in ("pmi", "both") else None),
        "stopwords": args.stopwords or "bundled", "examples": len(out),
    }
    _write_text(args.output + ".meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if args.timings:
        with open(args.timings, "w", encoding="utf-8") as fh:
            for row in timings:
                fh.write(corpus.dump_line(row))
    return EXIT_OK


def cmd_pmi(args):
    records = corpus.load_corpus(args.input)
    enc = corpus.encode_corpus(records, args.lowercase)
    table = build_pmi_table(list(zip(enc.tables, enc.targets)), args.min_count)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        table.to_jsonl(fh, decode=lambda i: enc.vocab.decode([i])[0])
    return EXIT_OK


def cmd_stats(args):
    records = corpus.read_jsonl(args.input)
    report = corpus.corpus_stats(records)
    if args.timings:
        report["parse_time"] = corpus.timing_summary(corpus.read_jsonl(args.timings))
    if args.bench:
        report["doubling"] = corpus.doubling_benchmark(args.bench_t, args.bench_n,
                                                       args.bench_instances, args.seed)
    _emit(report, args.output)
    if report["ordering"]["violations"]:
        print(f"ordering violated on {len(report['ordering']['violations'])} example(s)", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(args):
    if args.max_len < 1:
        raise SpliceError("--max-len must be at least 1")
    if args.instances < 1:
        raise SpliceError("--instances must be at least 1")
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    disagreements = 0
    start = time.perf_counter()
    try:
        for inst in generate_instances(args.instances, args.seed, args.max_len):
            y = tuple(inst["y"])
            neighbors = expand_neighbors(y, inst["neighbors"])
            parse_cost, _ = parse_min_cost(y, neighbors)
            bound = args.bound or len(y)
            brute = min_actions_bruteforce(y, neighbors, bound, pruned=not args.unpruned)
            greedy = oracle_l2rs(y, neighbors).cost
            dp = min_spans_l2rs_dp(y, neighbors)
            agree = parse_cost == brute and greedy == dp
            disagreements += not agree
            row = {"instance": inst["id"], "y": list(y), "neighbors": [list(n) for n in neighbors],
                   "parse_cost": parse_cost, "bruteforce_cost": brute,
                   "l2rs_cost": greedy, "l2rs_dp": dp, "agree": agree}
            out.write(json.dumps(row) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    elapsed = time.perf_counter() - start
    print(f"{args.instances} instance(s), {disagreements} disagreement(s), {elapsed:.2f}s", file=sys.stderr)
    return EXIT_VERIFY if disagreements else EXIT_OK


def cmd_replay(args):
    records = corpus.read_jsonl(args.input)
    rec = corpus.find_record(records, args.example)
    try:
        lines, ok = corpus.render_replay(rec, args.policy)
    except SpliceError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise VerificationFailed(f"malformed derivation record: {exc}") from exc
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="file of key = value lines mirroring the flags")

    parser = _Parser(prog="neighbor-splice", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a seeded synthetic corpus")
    p.add_argument("output")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("retrieve", parents=[common], help="attach top-k neighbor lists")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--metric", choices=("table", "cosine"), default="table")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--embeddings", help="JSONL of {id, vector}")
    p.add_argument("--prototypes", type=int, default=0, help="append K k-means prototype ids")
    p.add_argument("--kmeans-iters", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--keep-duplicates", action="store_true",
                   help="do not drop repeated (source, target) pairs")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("derive", parents=[common], help="attach oracle derivations")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--policy", choices=POLICIES + ("all",), default="all")
    p.add_argument("--pad", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--mask", choices=corpus.MASK_MODES, default="overlap")
    p.add_argument("--stopwords", help="stopword file, one token per line")
    p.add_argument("--pmi-table", help="PMI JSONL from the pmi subcommand (default: build from input)")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--min-count", type=int, default=DEFAULT_MIN_COUNT)
    p.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--jobs", type=int, default=0, help="worker processes (default: logical cores)")
    p.add_argument("--timings", help="write per-example parse times here")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("pmi", parents=[common], help="build a PMI table")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_pmi)

    p = sub.add_parser("stats", parents=[common], help="oracle derivation statistics")
    p.add_argument("input")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    p.add_argument("--timings", help="timings file written by derive")
    p.add_argument("--bench", action="store_true", help="run the length-doubling timing experiment")
    p.add_argument("--bench-t", type=int, default=20)
    p.add_argument("--bench-n", type=int, default=20)
    p.add_argument("--bench-instances", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("verify", parents=[common], help="parser vs brute force on micro-instances")
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-len", type=int, default=7)
    p.add_argument("--bound", type=int, default=0, help="search depth bound (default: |y|)")
    p.add_argument("--unpruned", action="store_true")
    p.add_argument("--output", help="write JSONL records here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("replay", parents=[common], help="print a derivation step by step")
    p.add_argument("input")
    p.add_argument("--example", required=True)
    p.add_argument("--policy", choices=POLICIES, default="full")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            config = read_config(known.config)
            for subparser in parser._subparsers._group_actions[0].choices.values():
                _apply_config(subparser, config)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return exc.code if isinstance(exc.code, int) else EXIT_DATA
        return args.func(args)
    except (VerificationFailed, InternalInconsistency) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (SpliceError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
