"""Exhaustive checks on tiny instances, independent of the chart parser.

:func:`min_actions_bruteforce` searches action sequences directly from the
definition of ``ginsert`` by iterative deepening.  In pruned mode it only
cuts branches that cannot belong to a derivation of exactly the current
depth, which by then is known to be minimal.  In a minimal derivation every
action leaves at least one token in the final target (an action whose
tokens are all overwritten later can be dropped), so:

* an inserted span must contain some target token;
* no earlier action may already have been overwritten completely;
* the tokens of the current canvas that survive to the end form a
  subsequence of the target, each later action lands all of its surviving
  tokens inside a single gap between consecutive survivors, and any gap in
  which canvas tokens are discarded must receive at least one new token.
  The surviving tokens of one action are a sub-multiset of one neighbor,
  so a gap needs at least as many actions as the fewest neighbor multisets
  covering its new material (and two if that material is not one neighbor
  span).  Summing per-gap needs bounds the remaining actions.
* two consecutive actions where the second works strictly left of what the
  first wrote commute; among minimal derivations the one with the
  lexicographically smallest sequence of ``i`` never contains such a pair
  with a smaller ``i`` second, so those orderings are skipped.
"""

from __future__ import annotations

import random
from collections import Counter
from typing import Iterator

from .core import ExpandedNeighborSet, tokens_of
from .errors import LimitExceeded, Unparseable

MAX_TARGET = 8
MAX_NEIGHBOR_TOKENS = 24
_BIG = 10 ** 6


def _all_spans(neighbors: ExpandedNeighborSet, max_len: int | None = None) -> set[tuple[int, ...]]:
    spans = set()
    for seq in neighbors.sequences:
        for k in range(len(seq)):
            stop = len(seq) if max_len is None else min(len(seq), k + max_len)
            for l in range(k + 1, stop + 1):
                spans.add(seq[k:l])
    return spans


def _canon(labels: tuple[int, ...]) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


class _Search:
    def __init__(self, y, neighbors, pruned):
        self.y = y
        self.T = len(y)
        self.pruned = pruned
        self.span_set = _all_spans(neighbors)
        ytypes = self.ytypes = set(y)
        spans = sorted(self.span_set)
        if pruned:
            spans = [s for s in spans if ytypes.intersection(s)]
        self.spans = spans
        self.types = sorted(ytypes)
        caps = {tuple(seq.count(t) for t in self.types) for seq in neighbors.sequences}
        self.capacities = sorted(c for c in caps if any(c))
        self._gap: dict[tuple[int, ...], int] = {}
        self._covers: dict[tuple[int, ...], int] = {}
        self.failed: dict[tuple, int] = {}
        self._lb: dict[tuple[int, ...], int] = {}
        self.nodes = 0

    def finishes(self, canvas: tuple[int, ...]) -> bool:
        """Can one action turn ``canvas`` into the target?"""
        y, T, M = self.y, self.T, len(canvas)
        pre = 0
        while pre < min(M, T) and canvas[pre] == y[pre]:
            pre += 1
        suf = 0
        while suf < min(M, T) and canvas[M - 1 - suf] == y[T - 1 - suf]:
            suf += 1
        for i in range(min(pre, T - 1) + 1):
            for keep in range(min(suf, M - i, T - i - 1) + 1):
                if y[i:T - keep] in self.span_set:
                    return True
        return False

    def gap_cost(self, z: tuple[int, ...]) -> int:
        hit = self._gap.get(z)
        if hit is None:
            counts = Counter(z)
            need = tuple(counts.get(t, 0) for t in self.types)
            hit = max(1 if z in self.span_set else 2, self._cover(need))
            self._gap[z] = hit
        return hit

    def _cover(self, need: tuple[int, ...]) -> int:
        """Fewest neighbor multisets whose sum covers ``need``."""
        hit = self._covers.get(need)
        if hit is not None:
            return hit
        first = next((idx for idx, c in enumerate(need) if c), None)
        if first is None:
            return 0
        best = _BIG
        for cap in self.capacities:
            if cap[first]:
                rest = tuple(max(0, c - h) for c, h in zip(need, cap))
                best = min(best, 1 + self._cover(rest))
        self._covers[need] = best
        return best

    def lower_bound(self, canvas: tuple[int, ...]) -> int:
        hit = self._lb.get(canvas)
        if hit is not None:
            return hit
        y, T, M = self.y, self.T, len(canvas)
        # survivors matched as pairs (p, q); virtual pairs at (-1, -1) and (M, T)
        pairs = [(p, q) for p in range(M) for q in range(T) if canvas[p] == y[q]]
        pairs.append((M, T))
        best = {(-1, -1): 0}
        for p, q in pairs:
            val = _BIG
            for (pp, qq), base in best.items():
                if pp < p and qq < q:
                    if q - qq > 1:
                        cand = base + self.gap_cost(y[qq + 1:q])
                    elif p - pp > 1:
                        continue
                    else:
                        cand = base
                    if cand < val:
                        val = cand
            best[(p, q)] = val
        result = best[(M, T)]
        self._lb[canvas] = result
        return result

    def children(self, canvas):
        M = len(canvas)
        for i in range(M + 1):
            for j in range(i + 1, M + 2):
                for span in self.spans:
                    yield i, j, span

    def dfs(self, canvas, labels, done, remaining, last_i=-1) -> bool:
        self.nodes += 1
        if remaining == 0:
            return canvas == self.y
        if remaining == 1:
            return self.finishes(canvas)
        if self.pruned:
            key = (canvas, _canon(labels), remaining, last_i)
        else:
            key = (canvas, remaining)
        if key in self.failed:
            return False
        ordinal = done + 1
        ytypes = self.ytypes
        for i, j, span in self.children(canvas):
            if self.pruned and i < last_i and j <= last_i + 1:
                continue
            new = canvas[:i] + span + canvas[j - 1:]
            new_labels = labels[:i] + (ordinal,) * len(span) + labels[j - 1:]
            if self.pruned:
                alive = {lab for tok, lab in zip(new, new_labels) if tok in ytypes}
                if len(alive) != ordinal:
                    continue
                if self.lower_bound(new) > remaining - 1:
                    continue
            if self.dfs(new, new_labels, ordinal, remaining - 1, i):
                return True
        self.failed[key] = True
        return False


def min_actions_bruteforce(
    y,
    neighbors: ExpandedNeighborSet,
    bound: int,
    *,
    parse_cost: int | None = None,
    pruned: bool = True,
    max_target: int = MAX_TARGET,
    max_neighbor_tokens: int = MAX_NEIGHBOR_TOKENS,
) -> int | None:
    """Fewest ``ginsert`` actions deriving ``y`` from the empty canvas.

    Returns ``None`` when no derivation of at most ``bound`` actions exists
    (or at most ``parse_cost`` actions, when that is supplied).
    """
    y = tokens_of(y)
    if len(y) > max_target:
        raise LimitExceeded(f"target length {len(y)} exceeds {max_target}")
    total = sum(len(s) for s in neighbors.sequences)
    if total > max_neighbor_tokens:
        raise LimitExceeded(f"{total} neighbor tokens exceed {max_neighbor_tokens}")
    if not y:
        return 0
    limit = bound if parse_cost is None else min(bound, parse_cost)
    search = _Search(y, neighbors, pruned)
    for depth in range(1, limit + 1):
        # every minimal derivation leaves one token per action in y
        if pruned and depth > len(y):
            break
        search.failed.clear()
        if search.dfs((), (), 0, depth):
            return depth
    return None


def min_spans_l2rs_dp(y, neighbors: ExpandedNeighborSet) -> int:
    """Fewest neighbor spans whose left-to-right concatenation is ``y``."""
    y = tokens_of(y)
    spans = _all_spans(neighbors, max_len=len(y))
    T = len(y)
    best = [0] + [_BIG] * T
    for end in range(1, T + 1):
        for start in range(end):
            if best[start] + 1 < best[end] and y[start:end] in spans:
                best[end] = best[start] + 1
    if best[T] >= _BIG:
        raise Unparseable("target cannot be segmented into neighbor spans")
    return best[T]


def generate_instance(rng: random.Random, max_len: int = 7) -> dict:
    """One random micro-instance: target plus 1-3 neighbors over a 2-5 token vocabulary."""
    vocab = list(range(3, 3 + rng.randint(2, 5)))
    n_neighbors = rng.randint(1, 3)
    neighbors = [[rng.choice(vocab) for _ in range(rng.randint(1, 6))] for _ in range(n_neighbors)]
    template = rng.random()
    if template < 0.1:
        y = list(rng.choice(neighbors))[:max_len]
    elif template < 0.2:
        y = list(rng.choice(neighbors))[:max_len]
        rng.shuffle(y)
    elif template < 0.3:
        # a neighbor with an inner stretch swapped out: replacement beats concatenation
        base = rng.choice(neighbors)
        if len(base) >= 3:
            cut = rng.randint(1, len(base) - 2)
            width = rng.randint(1, len(base) - 1 - cut)
            filler = [rng.choice(vocab) for _ in range(rng.randint(1, 2))]
            y = (list(base[:cut]) + filler + list(base[cut + width:]))[:max_len]
        else:
            y = [rng.choice(vocab) for _ in range(rng.randint(1, max_len))]
    else:
        y = [rng.choice(vocab) for _ in range(rng.randint(1, max_len))]
    return {"y": y, "neighbors": neighbors}


def generate_instances(count: int, seed: int, max_len: int = 7) -> Iterator[dict]:
    rng = random.Random(seed)
    for idx in range(count):
        inst = generate_instance(rng, max_len=max_len)
        inst["id"] = idx
        yield inst
