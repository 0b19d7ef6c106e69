"""Tokenization, padding, duplicate filtering, neighbor masking and source spans."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .core import BOS, EOS, MASK, TokenSequence, tokens_of
from .errors import AlreadyPadded, EmptyCorpus
from .retrieval import TableSource

DEFAULT_TAU = 3.0
DEFAULT_MIN_COUNT = 10


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    if lowercase:
        text = text.lower()
    return text.split()


def pad(seq) -> TokenSequence:
    if isinstance(seq, TokenSequence):
        if seq.padded:
            raise AlreadyPadded("sequence is already padded")
        toks = seq.tokens
    else:
        toks = tuple(seq)
        if BOS in toks or EOS in toks:
            raise AlreadyPadded("sequence already contains BOS/EOS")
    return TokenSequence((BOS,) + toks + (EOS,), padded=True)


def load_stopwords(path=None) -> list[str]:
    """One token per line; defaults to the bundled English list."""
    if path is None:
        text = resources.files(__package__).joinpath("stopwords.txt").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    words = []
    for line in text.splitlines():
        line = line.strip()
        if line and line not in words:
            words.append(line)
    return words


def _segments(source) -> list[tuple[int, ...]]:
    if isinstance(source, TableSource):
        return source.segments()
    return [tokens_of(s) for s in source]


def mask_source_overlap(nu, source, stopwords: Iterable[int] = ()) -> tuple[int, ...]:
    """Mask neighbor stretches that also occur contiguously in that neighbor's own source.

    Scanning left to right, the longest stretch starting at each position
    that appears inside one source segment is masked, unless every token in
    it is a stopword.  BOS, EOS and MASK are never matched.
    """
    toks = tokens_of(nu)
    stop = set(stopwords)
    limit = len(toks)
    grams: set[tuple[int, ...]] = set()
    for seg in _segments(source):
        for a in range(len(seg)):
            for b in range(a + 1, min(len(seg), a + limit) + 1):
                grams.add(seg[a:b])
    special = (BOS, EOS, MASK)
    out = list(toks)
    a = 0
    while a < len(toks):
        length = 0
        while (a + length < len(toks) and toks[a + length] not in special
               and toks[a:a + length + 1] in grams):
            length += 1
        if length and not all(t in stop for t in toks[a:a + length]):
            out[a:a + length] = [MASK] * length
            a += length
        else:
            a += 1
    return tuple(out)


@dataclass
class PMITable:
    """Example-level co-occurrence statistics between source and target tokens.

    ``scores[(s, t)]`` is ``ln(n * c(s, t) / (c(s) * c(t)))`` where every
    count is the number of examples containing the token (or both tokens).
    """

    examples: int
    scores: dict[tuple[int, int], float] = field(default_factory=dict)
    joint: dict[tuple[int, int], int] = field(default_factory=dict)
    target_counts: dict[int, int] = field(default_factory=dict)

    def best_against(self, t: int, source_tokens: Iterable[int]) -> float:
        best = -math.inf
        for s in source_tokens:
            score = self.scores.get((s, t))
            if score is not None and score > best:
                best = score
        return best

    def rows(self):
        for (s, t) in sorted(self.scores):
            yield s, t, self.scores[(s, t)], self.joint[(s, t)], self.target_counts[t]

    def to_jsonl(self, fh, decode=None):
        name = decode if decode is not None else (lambda i: i)
        for s, t, score, count, t_count in self.rows():
            row = {"s": name(s), "t": name(t), "pmi": round(score, 12), "count": count,
                   "t_count": t_count}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    @classmethod
    def from_jsonl(cls, fh, encode=None, examples: int = 0) -> "PMITable":
        table = cls(examples)
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            s, t = row["s"], row["t"]
            if encode is not None:
                s, t = encode(s), encode(t)
                if s is None or t is None:
                    continue
            table.scores[(s, t)] = float(row["pmi"])
            table.joint[(s, t)] = int(row["count"])
            table.target_counts[t] = int(row.get("t_count", row["count"]))
        return table


def build_pmi_table(pairs: Sequence, min_count: int = 1) -> PMITable:
    """PMI over ``(source tokens, target tokens)`` pairs.

    Target tokens seen in fewer than ``min_count`` examples are left out.
    """
    if not pairs:
        raise EmptyCorpus("cannot build a PMI table from an empty corpus")
    special = {BOS, EOS, MASK}
    src_c: Counter = Counter()
    tgt_c: Counter = Counter()
    joint: Counter = Counter()
    for source, target in pairs:
        src = set(source.unigrams() if isinstance(source, TableSource) else tokens_of(source)) - special
        tgt = set(tokens_of(target)) - special
        src_c.update(src)
        tgt_c.update(tgt)
        joint.update((s, t) for s in src for t in tgt)
    n = len(pairs)
    table = PMITable(n)
    for (s, t), c in joint.items():
        if tgt_c[t] < min_count:
            continue
        table.scores[(s, t)] = math.log(n * c / (src_c[s] * tgt_c[t]))
        table.joint[(s, t)] = c
        table.target_counts[t] = tgt_c[t]
    return table


def mask_pmi(nu, source, pmi: PMITable, tau: float = DEFAULT_TAU,
             min_count: int = DEFAULT_MIN_COUNT) -> tuple[int, ...]:
    """Mask neighbor tokens frequent enough and tied by PMI above ``tau`` to the neighbor's source."""
    toks = tokens_of(nu)
    src = source.unigrams() if isinstance(source, TableSource) else set(tokens_of(source))
    out = []
    for t in toks:
        if (t not in (BOS, EOS, MASK) and pmi.target_counts.get(t, 0) >= min_count
                and pmi.best_against(t, src) > tau):
            out.append(MASK)
        else:
            out.append(t)
    return tuple(out)


def extract_source_spans(x: TableSource, padded: bool = True) -> list[TokenSequence]:
    """One sequence per non-empty field value, in table order."""
    spans = []
    for _, toks in x.values:
        if not toks:
            continue
        spans.append(pad(toks) if padded else TokenSequence(toks))
    return spans


def dedupe_pairs(records: Iterable[dict]) -> list[dict]:
    """Keep the first of each identical ``(source, target)`` pair."""
    seen = set()
    out = []
    for rec in records:
        key = json.dumps([rec.get("source"), rec.get("target")], sort_keys=True, ensure_ascii=False)
        if key in seen:
            continue
        seen.add(key)
        out.append(rec)
    return out
