"""Longest-common-extension table between a target and every neighbor start."""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

from .core import MASK, ExpandedNeighborSet, tokens_of

SEPARATOR = -1


class MatchTable:
    """``lce(n, k, a)``: length of the longest common prefix of ``nu[n][k:]`` and ``y[a:]``.

    All neighbors are laid out in one flat array with a separator after each,
    so row ``g`` of :attr:`lce` is one ``(n, k)`` start.  MASK tokens and
    separators never match anything.  Public accessors take 1-based
    ``n``, ``k`` and ``a``; the arrays themselves are 0-based.
    """

    def __init__(self, y, neighbors: ExpandedNeighborSet):
        self.y = np.asarray(tokens_of(y), dtype=np.int64)
        self.neighbors = neighbors
        pieces, offsets = [], []
        pos = 0
        for seq in neighbors.sequences:
            offsets.append(pos)
            pieces.extend(seq)
            pieces.append(SEPARATOR)
            pos += len(seq) + 1
        self.flat = np.asarray(pieces, dtype=np.int64)
        self.offsets = offsets
        G, T = len(self.flat), len(self.y)
        usable = (self.flat != SEPARATOR) & (self.flat != MASK)
        eq = (self.flat[:, None] == self.y[None, :]) & usable[:, None]
        lce = np.zeros((G + 1, T + 1), dtype=np.int32)
        for a in range(T - 1, -1, -1):
            lce[:G, a] = eq[:, a] * (1 + lce[1:G + 1, a + 1])
        self.lce = lce[:G]

    def row(self, n: int, k: int) -> int:
        return self.offsets[n - 1] + k - 1

    def position(self, g: int) -> tuple[int, int]:
        """Inverse of :meth:`row`: flat row to 1-based ``(n, k)``."""
        idx = bisect_right(self.offsets, g) - 1
        return idx + 1, g - self.offsets[idx] + 1

    def lce_at(self, n: int, k: int, a: int) -> int:
        if a > len(self.y):
            return 0
        return int(self.lce[self.row(n, k), a - 1])

    def matches(self, a: int, b: int) -> list[tuple[int, int]]:
        """Sorted ``(n, k)`` whose neighbor span equals ``y[a..b]`` (1-based, inclusive)."""
        rows = np.nonzero(self.lce[:, a - 1] >= b - a + 1)[0]
        return [self.position(int(g)) for g in rows]


def find_occurrences(neighbors: ExpandedNeighborSet, tokens) -> tuple[tuple[int, int, int], ...]:
    """Every ``(n, k, l)`` whose neighbor span is token-identical to ``tokens``."""
    tokens = tuple(tokens)
    width = len(tokens)
    out = []
    if width == 0:
        return ()
    for n, seq in enumerate(neighbors.sequences, start=1):
        first = tokens[0]
        for start in range(len(seq) - width + 1):
            if seq[start] == first and seq[start:start + width] == tokens:
                out.append((n, start + 1, start + width))
    return tuple(out)
