"""Minimum-cost CKY parsing under the splice grammar.

Grammar (rule weights in brackets)::

    [1] S    -> Y(n, k:l)
    [0] S    -> S S
    [1] S    -> Y(n, k:l) C(n, s)       l < s
    [0] C(n, s) -> S R(n, s)
    [0] R(n, s) -> Y(n, s:t)
    [0] R(n, s) -> Y(n, s:t) C(n, u)    t < u

``Y(n, k:l)`` yields neighbor ``n``'s tokens ``k..l``.  The minimum parse
cost equals the minimum number of splice actions deriving the target.

Charts are dense numpy arrays indexed ``[width, row, start]`` where ``row``
enumerates the neighbor positions ``(n, s)`` whose token occurs in the
target at all; every other ``(n, s)`` can only ever hold infinite cost.
``Cmin[w, p, a]`` is the best ``C(n, u)`` over ``u >= s`` within the same
neighbor, which turns the ``l < s`` / ``t < u`` side conditions into a
single lookup.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from .core import ExpandedNeighborSet, tokens_of
from .errors import EmptyTarget, Unparseable
from .matching import SEPARATOR, MatchTable

INF = 16000
_SEG_STRIDE = 1 << 15

RULE_COST = {
    "S->Y": 1,
    "S->S S": 0,
    "S->Y C": 1,
    "C->S R": 0,
    "R->Y": 0,
    "R->Y C": 0,
}
# tie-break rank among S rules of equal cost and equal leftmost leaf
_RULE_RANK = {"S->Y": 0, "S->Y C": 1, "S->S S": 2}


@dataclass
class ParseNode:
    """A node of the best parse.

    ``start``/``end`` delimit the target span (0-based, end exclusive).
    ``C``/``R`` nodes carry their neighbor parameter ``(n, s)``; ``Y`` leaves
    carry ``(n, k, l)``.
    """

    label: str
    start: int
    end: int
    rule: str | None = None
    children: list["ParseNode"] = field(default_factory=list)
    n: int | None = None
    s: int | None = None
    k: int | None = None
    l: int | None = None

    @property
    def width(self) -> int:
        return self.end - self.start

    def walk(self) -> Iterator["ParseNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list["ParseNode"]:
        return [node for node in self.walk() if node.label == "Y"]

    def cost(self) -> int:
        return sum(RULE_COST[node.rule] for node in self.walk() if node.rule is not None)

    def yield_tokens(self, neighbors: ExpandedNeighborSet) -> tuple[int, ...]:
        out: tuple[int, ...] = ()
        for leaf in self.leaves():
            out += neighbors.span(leaf.n, leaf.k, leaf.l)
        return out

    def pretty(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.label == "Y":
            head = f"{pad}Y({self.n}, {self.k}:{self.l}) [{self.start}:{self.end}]"
        elif self.label == "S":
            head = f"{pad}S [{self.start}:{self.end}] {self.rule}"
        else:
            head = f"{pad}{self.label}({self.n}, {self.s}) [{self.start}:{self.end}] {self.rule}"
        return "\n".join([head] + [c.pretty(indent + 1) for c in self.children])


@dataclass
class ParseStats:
    target_length: int
    neighbors: int
    neighbor_tokens: int
    active_rows: int
    s_items: int
    c_items: int
    r_items: int
    cells: int
    fill_seconds: float

    def as_dict(self) -> dict:
        return asdict(self)


class Chart:
    """Filled min-cost chart for one ``(y, neighbors)`` pair."""

    def __init__(self, y, neighbors: ExpandedNeighborSet, table: MatchTable | None = None):
        y = tokens_of(y)
        if not y:
            raise EmptyTarget("cannot parse an empty target")
        self.y = y
        self.neighbors = neighbors
        self.table = table if table is not None else MatchTable(y, neighbors)
        started = time.perf_counter()
        self._setup()
        self._fill()
        self._fill_seconds = time.perf_counter() - started
        self._memo: dict[tuple[int, int], tuple] = {}

    # -- chart filling -------------------------------------------------

    def _setup(self):
        T = len(self.y)
        lce = self.table.lce
        self.maxlce = np.zeros(T + 1, dtype=np.int32)
        if lce.shape[0]:
            self.maxlce[:] = lce.max(axis=0)
        missing = [self.y[a] for a in range(T) if self.maxlce[a] == 0]
        if missing:
            raise Unparseable(f"target tokens {sorted(set(missing))} occur in no neighbor")

        active = np.nonzero(lce.max(axis=1) > 0)[0]
        P = len(active)
        self.active = active
        self.P = P
        comp = np.full(len(self.table.flat), -1, dtype=np.int64)
        comp[active] = np.arange(P)
        seg = np.searchsorted(np.asarray(self.table.offsets), active, side="right") - 1
        self.seg = np.append(seg, len(self.neighbors) + 1)

        # nearest active row at or after each flat row, within its neighbor
        G = len(self.table.flat)
        nxt = np.full(G + T + 2, P, dtype=np.int64)
        cur = P
        flat = self.table.flat
        for g in range(G - 1, -1, -1):
            if flat[g] == SEPARATOR:
                cur = P
            elif comp[g] >= 0:
                cur = comp[g]
            nxt[g] = cur
        shifts = np.arange(T + 1)
        nextrow = np.full((T + 1, P + 1), P, dtype=np.int64)
        nextrow[:, :P] = nxt[active[None, :] + shifts[:, None]]
        self.nextrow = nextrow

        lceA = np.zeros((P + 1, T + 1), dtype=np.int32)
        lceA[:P] = lce[active]
        self.lceA = lceA

    def _segment_suffix_min(self, values: np.ndarray) -> np.ndarray:
        keys = self.seg[:, None].astype(np.int64) * _SEG_STRIDE + values
        keys = np.minimum.accumulate(keys[::-1], axis=0)[::-1]
        return (keys - self.seg[:, None] * _SEG_STRIDE).astype(np.int16)

    def _fill(self):
        T, P = len(self.y), self.P
        R = np.full((T + 1, P + 1, T + 1), INF, dtype=np.int16)
        C = np.full((T + 1, P + 1, T + 1), INF, dtype=np.int16)
        Cmin = np.full((T + 1, P + 1, T + 1), INF, dtype=np.int16)
        S = np.full((T + 1, T + 1), INF, dtype=np.int16)
        lceA, nextrow = self.lceA, self.nextrow
        rows_all = np.arange(P + 1)[None, :, None]
        cells = 0
        for w in range(1, T + 1):
            A = T - w + 1
            ar = np.arange(A)
            if w > 1:
                d = np.arange(1, w)
                D3 = d[:, None, None]
                vals = Cmin[(w - d)[:, None, None], nextrow[d][:, :, None], ar[None, None, :] + D3]
                Q = np.where(lceA[None, :, :A] >= D3, vals, INF).min(axis=0)
                Sd = S[d[:, None], ar[None, :]]
                Rg = R[(w - d)[:, None, None], rows_all, ar[None, None, :] + D3]
                Cw = np.minimum((Sd[:, None, :] + Rg).min(axis=0), INF).astype(np.int16)
                SS = (Sd + S[(w - d)[:, None], ar[None, :] + d[:, None]]).min(axis=0)
                cells += 2 * vals.size
            else:
                Q = np.full((P + 1, A), INF, dtype=np.int16)
                Cw = Q
                SS = np.full(A, INF, dtype=np.int16)
            R[w, :, :A] = np.where(lceA[:, :A] >= w, 0, Q)
            C[w, :, :A] = Cw
            Cmin[w, :, :A] = self._segment_suffix_min(Cw)
            single = np.where(self.maxlce[:A] >= w, 1, INF)
            spliced = np.minimum(Q.min(axis=0).astype(np.int32) + 1, INF)
            S[w, :A] = np.minimum(np.minimum(single, SS), spliced)
        self.R, self.C, self.Cmin, self.S = R, C, Cmin, S
        self._cells = cells

    # -- results --------------------------------------------------------

    @property
    def cost(self) -> int:
        return int(self.S[len(self.y), 0])

    def stats(self) -> ParseStats:
        T = len(self.y)
        return ParseStats(
            target_length=T,
            neighbors=len(self.neighbors),
            neighbor_tokens=sum(len(s) for s in self.neighbors.sequences),
            active_rows=self.P,
            s_items=int((self.S[1:] < INF).sum()),
            c_items=int((self.C[1:] < INF).sum()),
            r_items=int((self.R[1:] < INF).sum()),
            cells=self._cells,
            fill_seconds=self._fill_seconds,
        )

    def _pos(self, p: int) -> tuple[int, int]:
        return self.table.position(int(self.active[p]))

    def _spliced_values(self, a: int, w: int) -> np.ndarray:
        """``[d-1, p]`` -> cost of the ``C`` continuation after a ``d``-token ``Y`` at row ``p``."""
        d = np.arange(1, w)
        vals = self.Cmin[(w - d)[:, None], self.nextrow[d], a + d[:, None]]
        return np.where(self.lceA[None, :, a] >= d[:, None], vals, INF)

    def _best_s(self, a: int, w: int) -> tuple:
        """Choice for ``S`` over ``[a, a+w)``: ``(key, rule, *detail)``.

        Key orders equal-cost options: longest leftmost ``Y`` leaf, then
        smaller neighbor index, then smaller ``k``, then rule rank, then
        split point.
        """
        memo_key = (a, w)
        hit = self._memo.get(memo_key)
        if hit is not None:
            return hit
        cost = int(self.S[w, a])
        if cost >= INF:
            raise Unparseable(f"no derivation for target span [{a}, {a + w})")
        if self.maxlce[a] >= w:
            g = int(np.nonzero(self.table.lce[:, a] >= w)[0][0])
            n, k = self.table.position(g)
            result = ((-w, n, k, _RULE_RANK["S->Y"], 0), "S->Y", n, k)
            self._memo[memo_key] = result
            return result
        options = []
        floor = 1
        if w > 1:
            vals = self._spliced_values(a, w)
            ok = vals + 1 == cost
            ds = np.nonzero(ok.any(axis=1))[0]
            if len(ds):
                d = int(ds[-1]) + 1
                p = int(np.nonzero(ok[d - 1])[0][0])
                n, k = self._pos(p)
                options.append(((-d, n, k, _RULE_RANK["S->Y C"], d), "S->Y C", d, p))
                floor = d
            for d in range(floor, w):
                if int(self.S[d, a]) + int(self.S[w - d, a + d]) == cost:
                    left = self._best_s(a, d)[0]
                    options.append(((left[0], left[1], left[2], _RULE_RANK["S->S S"], d), "S->S S", d))
        result = min(options, key=lambda o: o[0])
        self._memo[memo_key] = result
        return result

    def tree(self) -> ParseNode:
        return self._build_s(0, len(self.y))

    def _build_s(self, a: int, w: int) -> ParseNode:
        choice = self._best_s(a, w)
        rule = choice[1]
        node = ParseNode("S", a, a + w, rule)
        if rule == "S->Y":
            n, k = choice[2], choice[3]
            node.children = [ParseNode("Y", a, a + w, n=n, k=k, l=k + w - 1)]
        elif rule == "S->S S":
            d = choice[2]
            node.children = [self._build_s(a, d), self._build_s(a + d, w - d)]
        else:
            d, p = choice[2], choice[3]
            n, k = self._pos(p)
            target = int(self.S[w, a]) - 1
            u = self._first_c_row(p, d, a + d, w - d, target)
            node.children = [
                ParseNode("Y", a, a + d, n=n, k=k, l=k + d - 1),
                self._build_c(u, a + d, w - d, target),
            ]
        return node

    def _first_c_row(self, p: int, d: int, a: int, w: int, target: int) -> int:
        """Smallest row ``u`` at or after ``p``'s position plus ``d`` whose ``C`` hits ``target``."""
        q = int(self.nextrow[d, p])
        seg = self.seg[p]
        while q < self.P and self.seg[q] == seg:
            if int(self.C[w, q, a]) == target:
                return q
            q += 1
        raise AssertionError("chart backpointer lost")  # pragma: no cover

    def _build_c(self, p: int, a: int, w: int, target: int) -> ParseNode:
        n, s = self._pos(p)
        best = None
        for d in range(1, w):
            left = int(self.S[d, a])
            if left + int(self.R[w - d, p, a + d]) == target:
                key = self._best_s(a, d)[0][:3] + (d,)
                if best is None or key < best[0]:
                    best = (key, d, left)
        _, d, left = best
        node = ParseNode("C", a, a + w, "C->S R", n=n, s=s)
        node.children = [self._build_s(a, d), self._build_r(p, a + d, w - d, target - left)]
        return node

    def _build_r(self, p: int, a: int, w: int, target: int) -> ParseNode:
        n, s = self._pos(p)
        if self.lceA[p, a] >= w:
            node = ParseNode("R", a, a + w, "R->Y", n=n, s=s)
            node.children = [ParseNode("Y", a, a + w, n=n, k=s, l=s + w - 1)]
            return node
        vals = self._spliced_values(a, w)[:, p]
        d = int(np.nonzero(vals == target)[0][-1]) + 1
        u = self._first_c_row(p, d, a + d, w - d, target)
        node = ParseNode("R", a, a + w, "R->Y C", n=n, s=s)
        node.children = [
            ParseNode("Y", a, a + d, n=n, k=s, l=s + d - 1),
            self._build_c(u, a + d, w - d, target),
        ]
        return node


def parse_min_cost(y, neighbors: ExpandedNeighborSet) -> tuple[int, ParseNode]:
    """Cheapest parse of ``y`` from ``neighbors``: ``(cost, tree)``."""
    chart = Chart(y, neighbors)
    return chart.cost, chart.tree()


def recompute_cost(tree: ParseNode) -> int:
    """Bottom-up cost of a tree from the rule weights alone."""
    return RULE_COST[tree.rule] + sum(recompute_cost(c) for c in tree.children if c.label != "Y")
