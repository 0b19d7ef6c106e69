"""JSONL corpora: schema checks, encoding, retrieval, derivation, statistics and replay."""

from __future__ import annotations

import json
import multiprocessing
import random
import statistics
import time
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    BOS,
    EOS,
    MASK,
    SPECIALS,
    ExpandedNeighborSet,
    SpliceAction,
    Vocabulary,
    replay,
    tokens_of,
)
from .errors import (
    InternalInconsistency,
    MissingPolicy,
    SchemaError,
    SpliceError,
    UnknownExample,
    Unparseable,
)
from .extract import Derivation, checksum, verify_derivation
from .oracles import POLICIES, expand_neighbors, oracle_full, oracle_l2rs, oracle_l2rt
from .parser import Chart
from .preprocessing import (
    DEFAULT_MIN_COUNT,
    DEFAULT_TAU,
    PMITable,
    build_pmi_table,
    dedupe_pairs,
    extract_source_spans,
    mask_pmi,
    mask_source_overlap,
    pad,
    tokenize,
)
from .retrieval import TableSource, cosine_distance, kmeans_prototypes, top_k_neighbors

MASK_MODES = ("none", "overlap", "pmi", "both")


# ---------------------------------------------------------------- reading and writing

def read_jsonl(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(obj, dict):
                raise SchemaError("expected a JSON object", lineno)
            obj["_line"] = lineno
            records.append(obj)
    return records


def dump_line(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dump_line({k: v for k, v in rec.items() if k != "_line"}))


def source_fields(source, line=None) -> list[tuple[str, str]]:
    """Normalize the three accepted source shapes to ``(field, value)`` pairs."""
    if isinstance(source, str):
        return [("text", source)]
    if isinstance(source, dict) and "fields" in source:
        pairs = source["fields"]
        if not isinstance(pairs, list):
            raise SchemaError("source.fields must be a list of [name, value] pairs", line)
        out = []
        for pair in pairs:
            if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(p, str) for p in pair)):
                raise SchemaError("source.fields entries must be [name, value] string pairs", line)
            out.append((pair[0], pair[1]))
    elif isinstance(source, dict):
        out = []
        for name, value in source.items():
            if not isinstance(value, str):
                raise SchemaError(f"source field {name!r} must be a string", line)
            out.append((name, value))
    else:
        raise SchemaError("source must be a string or an object", line)
    for name, _ in out:
        if not name:
            raise SchemaError("field names must be non-empty", line)
    return out


def validate(records: list[dict]) -> None:
    seen = set()
    for rec in records:
        line = rec.get("_line")
        for key in ("id", "source", "target"):
            if key not in rec:
                raise SchemaError(f"missing required key {key!r}", line)
        if not isinstance(rec["id"], (str, int)) or isinstance(rec["id"], bool):
            raise SchemaError("id must be a string or an integer", line)
        if not isinstance(rec["target"], str):
            raise SchemaError("target must be a string", line)
        source_fields(rec["source"], line)
        key = json.dumps(rec["id"])
        if key in seen:
            raise SchemaError(f"duplicate id {rec['id']!r}", line)
        seen.add(key)


def load_corpus(path) -> list[dict]:
    records = read_jsonl(path)
    validate(records)
    return records


@dataclass
class Encoded:
    vocab: Vocabulary
    tables: list[TableSource]
    targets: list[tuple[int, ...]]
    target_tokens: list[list[str]]


def encode_corpus(records: list[dict], lowercase: bool = True) -> Encoded:
    """Shared vocabulary in file order: each record's field values, then its target."""
    vocab = Vocabulary()
    tables, targets, words = [], [], []
    for rec in records:
        pairs = source_fields(rec["source"], rec.get("_line"))
        tables.append(TableSource(tuple((name, vocab.encode(tokenize(value, lowercase)))
                                        for name, value in pairs)))
        toks = tokenize(rec["target"], lowercase)
        words.append(toks)
        targets.append(vocab.encode(toks))
    return Encoded(vocab, tables, targets, words)


# ---------------------------------------------------------------- retrieval

def load_embeddings(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                out[json.dumps(row["id"])] = [float(v) for v in row["vector"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise SchemaError("embedding rows need an id and a numeric vector", lineno) from None
    return out


def retrieve(records: list[dict], k: int, metric: str = "table", embeddings: dict | None = None,
             prototypes: int = 0, kmeans_iters: int = 20, seed: int = 0,
             lowercase: bool = True, dedupe: bool = True) -> list[dict]:
    """Attach ``neighbors: [[id, distance], ...]`` to every record.

    With ``prototypes > 0`` the ids of the examples nearest each k-means
    centroid are appended after the retrieved ones (the record itself
    excluded), carrying their cosine distance.
    """
    if dedupe:
        records = dedupe_pairs(records)
    vectors = None
    if metric == "cosine" or prototypes:
        if embeddings is None:
            raise SchemaError("cosine retrieval and prototypes need --embeddings")
        try:
            vectors = np.array([embeddings[json.dumps(r["id"])] for r in records], dtype=np.float64)
        except KeyError as exc:
            raise SchemaError(f"no embedding for id {exc.args[0]}") from None
    if metric == "table":
        items = encode_corpus(records, lowercase).tables
    elif metric == "cosine":
        items = vectors
    else:
        raise ValueError(f"unknown metric {metric!r}")
    ranked = top_k_neighbors(items, k, metric)
    protos = kmeans_prototypes(vectors, prototypes, kmeans_iters, seed) if prototypes else []
    out = []
    for q, rec in enumerate(records):
        nbs = [[records[idx]["id"], dist] for idx, dist in ranked[q]]
        for p in protos:
            if p != q:
                nbs.append([records[p]["id"], cosine_distance(vectors[q], vectors[p])])
        new = dict(rec)
        new["neighbors"] = nbs
        out.append(new)
    return out


# ---------------------------------------------------------------- derivation

@dataclass
class DeriveOptions:
    policies: tuple[str, ...] = POLICIES
    pad: bool = True
    mask: str = "overlap"
    stopwords: frozenset = frozenset()  # words; mapped to ids per corpus
    stop_ids: frozenset = frozenset()
    pmi: PMITable | None = None
    tau: float = DEFAULT_TAU
    min_count: int = DEFAULT_MIN_COUNT


@dataclass
class WorkItem:
    y: tuple[int, ...]
    table: TableSource
    own_id: object
    neighbors: list = field(default_factory=list)  # (id, target ids, TableSource)


def _mask(seq, table, opts: DeriveOptions):
    if opts.mask in ("overlap", "both"):
        seq = mask_source_overlap(seq, table, opts.stop_ids)
    if opts.mask in ("pmi", "both"):
        seq = mask_pmi(seq, table, opts.pmi, opts.tau, opts.min_count)
    return seq


def serialize_derivation(d: Derivation) -> dict:
    return {
        "cost": d.cost,
        "actions": [list(a.args) for a in d.actions],
        "alternatives": [[list(alt) for alt in a.alternatives] for a in d.actions],
        "checksum": d.target_checksum,
    }


def deserialize_derivation(obj: dict) -> Derivation:
    actions = tuple(SpliceAction(*map(int, a), tuple(tuple(x) for x in alts))
                    for a, alts in zip(obj["actions"], obj.get("alternatives", [[]] * len(obj["actions"]))))
    return Derivation(actions, obj["checksum"])


def manifest_set(manifest: list[dict]) -> ExpandedNeighborSet:
    return ExpandedNeighborSet(tuple(tuple(m["ids"]) for m in manifest),
                               tuple(m["origin"] for m in manifest),
                               tuple(m.get("link") for m in manifest))


def derive_item(item: WorkItem, opts: DeriveOptions) -> tuple[dict, float]:
    """Derivations for one example; returns the JSON payload and parse seconds."""
    y = tokens_of(pad(item.y)) if opts.pad else item.y
    retrieved, links = [], []
    for link, ids, table in item.neighbors:
        seq = _mask(ids, table, opts)
        retrieved.append(tokens_of(pad(seq)) if opts.pad else seq)
        links.append(link)
    spans = [tokens_of(s) for s in extract_source_spans(item.table, padded=opts.pad)]
    neighbors = expand_neighbors(y, retrieved, spans, links, item.own_id)
    out = {}
    seconds = 0.0
    try:
        for policy in opts.policies:
            if policy == "full":
                start = time.perf_counter()
                chart = Chart(y, neighbors)
                chart.cost
                seconds = time.perf_counter() - start
                d = oracle_full(y, neighbors, chart)
            elif policy == "l2rs":
                d = oracle_l2rs(y, neighbors)
            else:
                d = oracle_l2rt(y, neighbors)
            out[policy] = serialize_derivation(d)
    except Unparseable as exc:
        # the expanded set covers every target token, so this is a bug
        raise InternalInconsistency(f"example {item.own_id!r}: {exc}") from exc
    manifest = [{"origin": o, "link": lk, "ids": list(s)}
                for s, o, lk in zip(neighbors.sequences, neighbors.origins, neighbors.source_links)]
    return {"target_ids": list(y), "manifest": manifest, "derivations": out}, seconds


_WORKER_OPTS: DeriveOptions | None = None


def _init_worker(opts):
    global _WORKER_OPTS
    _WORKER_OPTS = opts


def _run_item(item):
    return derive_item(item, _WORKER_OPTS)


def check_payload(payload: dict) -> None:
    """Replay every serialized derivation against its own manifest."""
    neighbors = manifest_set(payload["manifest"])
    y = tuple(payload["target_ids"])
    for policy, obj in payload["derivations"].items():
        d = deserialize_derivation(obj)
        if obj["checksum"] != checksum(y) or obj["cost"] != len(d.actions):
            raise InternalInconsistency(f"{policy}: checksum or cost does not match")
        if not verify_derivation(d, y, neighbors):
            raise InternalInconsistency(f"{policy}: derivation does not replay to the target")


def derive_corpus(records: list[dict], opts: DeriveOptions, lowercase: bool = True,
                  jobs: int = 1) -> tuple[list[dict], list[dict]]:
    """Derivation records plus per-example timings, in input order."""
    enc = encode_corpus(records, lowercase)
    opts = replace(opts, stop_ids=frozenset(enc.vocab[w] for w in opts.stopwords if w in enc.vocab))
    index = {json.dumps(r["id"]): i for i, r in enumerate(records)}
    if opts.mask in ("pmi", "both") and opts.pmi is None:
        opts.pmi = build_pmi_table(list(zip(enc.tables, enc.targets)))
    items = []
    for q, rec in enumerate(records):
        if "neighbors" not in rec:
            raise SchemaError("record has no neighbor list; run retrieve first", rec.get("_line"))
        nbs = []
        for entry in rec["neighbors"]:
            nid = entry[0] if isinstance(entry, list) else entry
            idx = index.get(json.dumps(nid))
            if idx is None:
                raise SchemaError(f"unknown neighbor id {nid!r}", rec.get("_line"))
            nbs.append((nid, enc.targets[idx], enc.tables[idx]))
        items.append(WorkItem(enc.targets[q], enc.tables[q], rec["id"], nbs))
    if jobs > 1:
        with multiprocessing.Pool(jobs, initializer=_init_worker, initargs=(opts,)) as pool:
            results = pool.map(_run_item, items, chunksize=max(1, len(items) // (4 * jobs)))
    else:
        results = [derive_item(item, opts) for item in items]
    decode = enc.vocab.decode
    out, timings = [], []
    for rec, words, item, (payload, seconds) in zip(records, enc.target_tokens, items, results):
        check_payload(payload)
        for m in payload["manifest"]:
            m["text"] = " ".join(decode(m["ids"]))
        new = {k: v for k, v in rec.items() if k != "_line"}
        new["target_tokens"] = ([SPECIALS[BOS]] + words + [SPECIALS[EOS]]) if opts.pad else words
        new.update(payload)
        out.append(new)
        timings.append({"id": rec["id"], "seconds": seconds, "target_length": len(payload["target_ids"]),
                        "neighbors": len(payload["manifest"])})
    return out, timings


# ---------------------------------------------------------------- statistics

def summarize(costs: list[int]) -> dict:
    hist = Counter(costs)
    return {
        "examples": len(costs),
        "mean": statistics.fmean(costs) if costs else 0.0,
        "median": statistics.median(costs) if costs else 0,
        "histogram": {str(c): hist[c] for c in sorted(hist)},
    }


def corpus_stats(records: list[dict]) -> dict:
    """Oracle derivation lengths per policy (not learned-policy statistics)."""
    per_policy: dict[str, list[int]] = {}
    violations = []
    for rec in records:
        ders = rec.get("derivations")
        if not ders:
            raise SchemaError("record has no derivations; run derive first", rec.get("_line"))
        for policy, obj in ders.items():
            per_policy.setdefault(policy, []).append(int(obj["cost"]))
        c = {p: ders[p]["cost"] for p in POLICIES if p in ders}
        if len(c) == 3:
            if not (c["full"] <= c["l2rs"] <= c["l2rt"] == len(rec["target_ids"])):
                violations.append(rec["id"])
    report = {
        "kind": "oracle derivation lengths",
        "policies": {p: summarize(per_policy[p]) for p in POLICIES if p in per_policy},
        "ordering": {"checked": all(p in per_policy for p in POLICIES), "violations": violations},
        "masked_tokens": sum(mask_token_count(r) for r in records),
    }
    return report


def timing_summary(rows: list[dict]) -> dict:
    secs = [float(r["seconds"]) for r in rows]
    if not secs:
        return {"examples": 0}
    return {"examples": len(secs), "mean_seconds": statistics.fmean(secs),
            "median_seconds": statistics.median(secs), "max_seconds": max(secs),
            "total_seconds": sum(secs)}


def doubling_benchmark(T: int = 20, N: int = 20, instances: int = 5, seed: int = 0) -> dict:
    """Median parse time at target length ``T`` and ``2T`` on fixed seeded instances."""
    from .synth import random_parse_instance

    rows = {}
    for length in (T, 2 * T):
        rng = random.Random(seed)
        times, stats = [], []
        for _ in range(instances):
            y, nbs = random_parse_instance(rng, length, N)
            neighbors = expand_neighbors(y, nbs)
            start = time.perf_counter()
            chart = Chart(y, neighbors)
            chart.cost
            chart.tree()
            times.append(time.perf_counter() - start)
            stats.append(chart.stats().as_dict())
        rows[length] = {"median_seconds": statistics.median(times), "max_seconds": max(times),
                        "parse_stats": stats}
    small, large = rows[T]["median_seconds"], rows[2 * T]["median_seconds"]
    return {"T": T, "N": N, "instances": instances, "seed": seed,
            "runs": {str(k): v for k, v in rows.items()},
            "doubling_factor": large / small if small > 0 else float("inf")}


# ---------------------------------------------------------------- replay

def find_record(records: list[dict], example) -> dict:
    for rec in records:
        if rec["id"] == example or str(rec["id"]) == str(example):
            return rec
    raise UnknownExample(f"no example with id {example!r}")


def render_replay(rec: dict, policy: str) -> tuple[list[str], bool]:
    """Step-by-step canvas states; the flag says whether the final canvas is the target."""
    ders = rec.get("derivations") or {}
    if policy not in ders:
        raise MissingPolicy(f"example {rec['id']!r} has no {policy!r} derivation")
    names = {i: s for i, s in enumerate(SPECIALS)}
    for m in rec["manifest"]:
        names.update(zip(m["ids"], m.get("text", "").split()))
    names.update(zip(rec["target_ids"], rec.get("target_tokens", [])))
    show = lambda toks: " ".join(names.get(t, f"#{t}") for t in toks) or "(empty)"
    neighbors = manifest_set(rec["manifest"])
    obj = ders[policy]
    actions = [tuple(int(v) for v in a) for a in obj["actions"]]
    target = tuple(rec["target_ids"])
    lines = [f"example {rec['id']} policy {policy}: {len(actions)} action(s), target: {show(target)}"]
    canvas = ()
    ok = True
    for step, act in enumerate(actions, start=1):
        try:
            after, trace = replay(actions[:step], neighbors)
        except SpliceError as exc:
            lines.append(f"step {step}: {list(act)} is invalid: {exc}")
            return lines, False
        i, j, n, k, l = act
        m = neighbors.origins[n - 1]
        lines.append(f"step {step}: ginsert{act} copies neighbor {n} ({m}) tokens {k}..{l}: "
                     f"{show(neighbors.span(n, k, l))}")
        lines.append(f"  before: {show(canvas)}")
        lines.append(f"  after:  {show(after)}")
        lines.append(f"  labels: {' '.join(map(str, trace.labels))}")
        canvas = after
    if canvas != target:
        lines.append("final canvas differs from the target")
        ok = False
    if obj.get("checksum") != checksum(target) or obj.get("cost") != len(actions):
        lines.append("stored checksum or cost does not match")
        ok = False
    if ok:
        lines.append("final canvas equals the target")
    return lines, ok


def mask_token_count(rec: dict) -> int:
    return sum(m["ids"].count(MASK) for m in rec.get("manifest", []))
