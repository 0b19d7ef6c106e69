"""Token sequences, neighbor sets and the generalized insertion operation.

Canvas positions follow the usual 1-based inclusive slicing: an action
``(i, j, n, k, l)`` keeps canvas tokens ``1..i``, inserts neighbor tokens
``k..l`` of neighbor ``n`` and keeps canvas tokens ``j..M``.  Everything in
``0 < i+1 .. j-1`` is overwritten.  Neighbors are addressed 1-based as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NoSuchNeighbor, SpliceIndexError

BOS = 0
EOS = 1
MASK = 2
SPECIALS = ("<s>", "</s>", "<mask>")

RETRIEVED = "retrieved"
SOURCE_SPAN = "source-span"
SINGLETON = "singleton-fallback"
ORIGINS = (RETRIEVED, SOURCE_SPAN, SINGLETON)


class Vocabulary:
    """First-seen token to id mapping with the special ids reserved up front."""

    def __init__(self, tokens: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._tokens: list[str] = []
        for tok in SPECIALS:
            self.add(tok)
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        idx = self._ids.get(token)
        if idx is None:
            idx = len(self._tokens)
            self._ids[token] = idx
            self._tokens.append(token)
        return idx

    def encode(self, tokens: Iterable[str], grow: bool = True) -> tuple[int, ...]:
        if grow:
            return tuple(self.add(t) for t in tokens)
        return tuple(self._ids[t] for t in tokens)

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self._tokens[i] for i in ids]

    def __len__(self):
        return len(self._tokens)

    def __contains__(self, token):
        return token in self._ids

    def __getitem__(self, token: str) -> int:
        return self._ids[token]


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[int, ...]
    padded: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(int(t) for t in self.tokens))
        if any(t < 0 for t in self.tokens):
            raise ValueError("token ids must be non-negative")
        if self.padded:
            toks = self.tokens
            if len(toks) < 2 or toks[0] != BOS or toks[-1] != EOS:
                raise ValueError("padded sequence must start with BOS and end with EOS")
            inner = toks[1:-1]
            if BOS in inner or EOS in inner:
                raise ValueError("BOS/EOS may only appear at the ends of a padded sequence")

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, idx):
        return self.tokens[idx]


def tokens_of(seq) -> tuple[int, ...]:
    if isinstance(seq, TokenSequence):
        return seq.tokens
    return tuple(seq)


@dataclass(frozen=True)
class SpliceAction:
    """One ``ginsert`` call: replace canvas ``i+1..j-1`` by neighbor ``n``'s ``k..l``.

    ``alternatives`` lists every ``(n, k, l)`` in the neighbor set whose span
    has exactly the same tokens (the action's own triple included).
    """

    i: int
    j: int
    n: int
    k: int
    l: int
    alternatives: tuple[tuple[int, int, int], ...] = field(default=(), compare=False)

    @property
    def args(self) -> tuple[int, int, int, int, int]:
        return (self.i, self.j, self.n, self.k, self.l)

    @property
    def span_length(self) -> int:
        return self.l - self.k + 1

    def __iter__(self):
        return iter(self.args)


@dataclass(frozen=True)
class ExpandedNeighborSet:
    sequences: tuple[tuple[int, ...], ...]
    origins: tuple[str, ...] = ()
    source_links: tuple = ()

    def __post_init__(self):
        seqs = tuple(tokens_of(s) for s in self.sequences)
        object.__setattr__(self, "sequences", seqs)
        origins = tuple(self.origins) or (RETRIEVED,) * len(seqs)
        links = tuple(self.source_links) or (None,) * len(seqs)
        if len(origins) != len(seqs) or len(links) != len(seqs):
            raise ValueError("origins/source_links must match the number of sequences")
        for o in origins:
            if o not in ORIGINS:
                raise ValueError(f"unknown origin {o!r}")
        if any(len(s) == 0 for s in seqs):
            raise ValueError("neighbor sequences must be non-empty")
        object.__setattr__(self, "origins", origins)
        object.__setattr__(self, "source_links", links)

    @classmethod
    def of(cls, *sequences) -> "ExpandedNeighborSet":
        return cls(tuple(tokens_of(s) for s in sequences))

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def neighbor(self, n: int) -> tuple[int, ...]:
        """Neighbor ``n`` (1-based)."""
        if not 1 <= n <= len(self.sequences):
            raise NoSuchNeighbor(f"neighbor {n} not in 1..{len(self.sequences)}")
        return self.sequences[n - 1]

    def span(self, n: int, k: int, l: int) -> tuple[int, ...]:
        seq = self.neighbor(n)
        if not 1 <= k <= l <= len(seq):
            raise SpliceIndexError(f"span {k}:{l} outside neighbor {n} of length {len(seq)}")
        return seq[k - 1:l]

    def token_types(self) -> set[int]:
        out = set()
        for s in self.sequences:
            out.update(s)
        out.discard(MASK)
        return out


@dataclass(frozen=True)
class ProvenanceTrace:
    labels: tuple[int, ...] = ()

    def __len__(self):
        return len(self.labels)


def ginsert(canvas: Sequence[int], action, neighbors: ExpandedNeighborSet) -> tuple[int, ...]:
    """Apply one splice action and return the new canvas."""
    canvas = tokens_of(canvas)
    i, j, n, k, l = tuple(action)[:5]
    m = len(canvas)
    if not 0 <= i < j <= m + 1:
        raise SpliceIndexError(f"need 0 <= i < j <= {m + 1}, got i={i}, j={j}")
    piece = neighbors.span(n, k, l)
    return canvas[:i] + piece + canvas[j - 1:]


def replay(actions: Iterable, neighbors: ExpandedNeighborSet):
    """Apply ``actions`` from the empty canvas; return ``(canvas, trace)``.

    The trace records, for every final position, the 1-based ordinal of the
    action that last wrote it.
    """
    canvas: tuple[int, ...] = ()
    labels: tuple[int, ...] = ()
    for ordinal, action in enumerate(actions, start=1):
        try:
            new = ginsert(canvas, action, neighbors)
        except (SpliceIndexError, NoSuchNeighbor) as exc:
            err = type(exc)(f"action {ordinal}: {exc}")
            err.ordinal = ordinal
            raise err from exc
        i, j, _, k, l = tuple(action)[:5]
        labels = labels[:i] + (ordinal,) * (l - k + 1) + labels[j - 1:]
        canvas = new
    return canvas, ProvenanceTrace(labels)


def check_non_interleaving(trace) -> bool:
    """True iff no ``a<b<c<d`` has ``z[a]=z[c] != z[b]=z[d]``."""
    labels = trace.labels if isinstance(trace, ProvenanceTrace) else tuple(trace)
    stack: list[int] = []
    open_labels: set[int] = set()
    closed: set[int] = set()
    for lab in labels:
        if lab in closed:
            return False
        if lab in open_labels:
            while stack[-1] != lab:
                top = stack.pop()
                open_labels.discard(top)
                closed.add(top)
        else:
            stack.append(lab)
            open_labels.add(lab)
    return True
