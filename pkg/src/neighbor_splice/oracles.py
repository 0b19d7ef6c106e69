"""The three oracle derivations and the expanded neighbor set they draw from."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import (
    MASK,
    RETRIEVED,
    SINGLETON,
    SOURCE_SPAN,
    ExpandedNeighborSet,
    tokens_of,
)
from .errors import EmptyTarget, Unparseable
from .extract import Derivation, extract_actions, make_derivation
from .matching import MatchTable
from .parser import Chart

POLICIES = ("full", "l2rs", "l2rt")


def expand_neighbors(
    y,
    retrieved: Sequence = (),
    source_spans: Sequence = (),
    retrieved_links: Sequence | None = None,
    source_link=None,
) -> ExpandedNeighborSet:
    """Source spans, then retrieved neighbors, then one singleton per uncovered target type.

    Empty sequences are dropped; they can contribute nothing to a derivation.
    """
    seqs, origins, links = [], [], []
    for span in source_spans:
        span = tokens_of(span)
        if span:
            seqs.append(span)
            origins.append(SOURCE_SPAN)
            links.append(source_link)
    if retrieved_links is None:
        retrieved_links = [None] * len(retrieved)
    for seq, link in zip(retrieved, retrieved_links):
        seq = tokens_of(seq)
        if seq:
            seqs.append(seq)
            origins.append(RETRIEVED)
            links.append(link)
    covered = set()
    for seq in seqs:
        covered.update(seq)
    covered.discard(MASK)
    for tok in tokens_of(y):
        if tok not in covered:
            seqs.append((tok,))
            origins.append(SINGLETON)
            links.append(None)
            covered.add(tok)
    return ExpandedNeighborSet(tuple(seqs), tuple(origins), tuple(links))


def oracle_full(y, neighbors: ExpandedNeighborSet, chart: Chart | None = None) -> Derivation:
    """Globally shortest derivation, read off the cheapest parse."""
    chart = chart if chart is not None else Chart(y, neighbors)
    return extract_actions(chart.tree(), y, neighbors)


def _table(y, neighbors):
    y = tokens_of(y)
    if not y:
        raise EmptyTarget("empty target")
    table = MatchTable(y, neighbors)
    best = table.lce.max(axis=0) if table.lce.shape[0] else np.zeros(len(y) + 1, dtype=int)
    for a in range(len(y)):
        if best[a] == 0:
            raise Unparseable(f"target token {y[a]} at position {a + 1} occurs in no neighbor")
    return y, table, best


def oracle_l2rs(y, neighbors: ExpandedNeighborSet) -> Derivation:
    """Left-to-right concatenation of greedily longest neighbor spans.

    Ties between equally long spans go to the smallest ``(n, k)``.
    """
    y, table, best = _table(y, neighbors)
    args = []
    a = 0
    while a < len(y):
        length = int(best[a])
        g = int(np.nonzero(table.lce[:, a] >= length)[0][0])
        n, k = table.position(g)
        args.append((a, a + 1, n, k, k + length - 1))
        a += length
    return make_derivation(args, y, neighbors)


def oracle_l2rt(y, neighbors: ExpandedNeighborSet) -> Derivation:
    """One appended token per action, copied from the first matching neighbor position."""
    y, table, _ = _table(y, neighbors)
    args = []
    for a in range(len(y)):
        g = int(np.nonzero(table.lce[:, a] >= 1)[0][0])
        n, k = table.position(g)
        args.append((a, a + 1, n, k, k))
    return make_derivation(args, y, neighbors)


def derive_all(y, neighbors: ExpandedNeighborSet, policies=POLICIES) -> dict[str, Derivation]:
    out = {}
    for policy in policies:
        if policy == "full":
            out[policy] = oracle_full(y, neighbors)
        elif policy == "l2rs":
            out[policy] = oracle_l2rs(y, neighbors)
        elif policy == "l2rt":
            out[policy] = oracle_l2rt(y, neighbors)
        else:
            raise ValueError(f"unknown policy {policy!r}")
    return out
