"""Turning a best parse into an ordered list of splice actions."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .core import (
    ExpandedNeighborSet,
    SpliceAction,
    check_non_interleaving,
    ginsert,
    replay,
    tokens_of,
)
from .errors import InternalInconsistency, NoSuchNeighbor, SpliceIndexError
from .matching import find_occurrences
from .parser import ParseNode


def checksum(tokens) -> str:
    data = ",".join(str(t) for t in tokens_of(tokens)).encode()
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class Derivation:
    actions: tuple[SpliceAction, ...]
    target_checksum: str

    @property
    def cost(self) -> int:
        return len(self.actions)

    def __len__(self):
        return len(self.actions)


class _AlternativeIndex:
    def __init__(self, neighbors: ExpandedNeighborSet):
        self.neighbors = neighbors
        self._cache: dict[tuple[int, ...], tuple] = {}

    def __call__(self, n: int, k: int, l: int) -> tuple:
        piece = self.neighbors.span(n, k, l)
        hit = self._cache.get(piece)
        if hit is None:
            hit = self._cache[piece] = find_occurrences(self.neighbors, piece)
        return hit


def make_derivation(args, y, neighbors: ExpandedNeighborSet) -> Derivation:
    """Attach alternative sets to raw ``(i, j, n, k, l)`` tuples and check by replay."""
    alternatives = _AlternativeIndex(neighbors)
    actions = tuple(SpliceAction(i, j, n, k, l, alternatives(n, k, l)) for i, j, n, k, l in args)
    deriv = Derivation(actions, checksum(y))
    if not verify_derivation(deriv, y, neighbors):
        raise InternalInconsistency("derivation does not replay to its target")
    return deriv


def extract_actions(tree: ParseNode, y, neighbors: ExpandedNeighborSet) -> Derivation:
    """Depth-first, left-to-right walk emitting one action per cost-1 ``S``.

    An ``S -> Y C`` chain inserts the whole neighbor stretch from its first
    leaf to its last one in a single action; each ``S`` nested under the
    chain's ``C`` nodes later overwrites the neighbor tokens lying between
    two consecutive leaves (a pure insertion when that gap is empty).
    """
    emitted: list[tuple[int, int, int, int, int]] = []
    canvas: tuple[int, ...] = ()

    def emit(i, j, n, k, l):
        nonlocal canvas
        canvas = ginsert(canvas, (i, j, n, k, l), neighbors)
        emitted.append((i, j, n, k, l))

    def visit(node: ParseNode, i: int, gap: int):
        # replace canvas positions i+1 .. i+gap by the yield of ``node``
        if node.rule == "S->Y":
            leaf = node.children[0]
            emit(i, i + gap + 1, leaf.n, leaf.k, leaf.l)
        elif node.rule == "S->S S":
            left, right = node.children
            visit(left, i, gap)
            visit(right, i + left.width, 0)
        elif node.rule == "S->Y C":
            first, c_node = node.children
            leaves, nested = [first], []
            while c_node is not None:
                s_node, r_node = c_node.children
                nested.append(s_node)
                leaves.append(r_node.children[0])
                c_node = r_node.children[1] if r_node.rule == "R->Y C" else None
            emit(i, i + gap + 1, first.n, first.k, leaves[-1].l)
            pos = i + first.width
            prev = first
            for s_node, leaf in zip(nested, leaves[1:]):
                visit(s_node, pos, leaf.k - prev.l - 1)
                pos += s_node.width + leaf.width
                prev = leaf
        else:
            raise InternalInconsistency(f"unexpected rule {node.rule!r} under S")

    try:
        visit(tree, 0, 0)
    except (SpliceIndexError, NoSuchNeighbor) as exc:
        raise InternalInconsistency(f"extracted action is malformed: {exc}") from exc
    if canvas != tokens_of(y):
        raise InternalInconsistency("extracted actions do not rebuild the target")
    return make_derivation(emitted, y, neighbors)


def verify_derivation(d: Derivation, y, neighbors: ExpandedNeighborSet) -> bool:
    try:
        canvas, trace = replay(d.actions, neighbors)
    except (SpliceIndexError, NoSuchNeighbor):
        return False
    return canvas == tokens_of(y) and check_non_interleaving(trace)
