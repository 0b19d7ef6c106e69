import string

from hypothesis import strategies as st

from neighbor_splice.core import ExpandedNeighborSet
from neighbor_splice.oracles import expand_neighbors

# letters stand for token ids 3.. so 0-2 stay free for BOS/EOS/MASK
LETTER_IDS = {ch: 3 + idx for idx, ch in enumerate(string.ascii_lowercase)}


def ids(text: str) -> tuple[int, ...]:
    return tuple(LETTER_IDS[w] for w in text.split())


def nset(*texts: str) -> ExpandedNeighborSet:
    return ExpandedNeighborSet.of(*(ids(t) for t in texts))


@st.composite
def micro_instances(draw, max_len=6, max_vocab=4, max_neighbors=3, max_nb_len=5):
    vocab = list(range(3, 3 + draw(st.integers(2, max_vocab))))
    tok = st.sampled_from(vocab)
    y = draw(st.lists(tok, min_size=1, max_size=max_len))
    retrieved = draw(st.lists(st.lists(tok, min_size=1, max_size=max_nb_len),
                              min_size=0, max_size=max_neighbors))
    return tuple(y), expand_neighbors(y, retrieved)


@st.composite
def action_lists(draw, neighbors, max_actions=6):
    """Random valid action sequences against ``neighbors``."""
    actions = []
    length = 0
    for _ in range(draw(st.integers(0, max_actions))):
        n = draw(st.integers(1, len(neighbors)))
        T = len(neighbors.neighbor(n))
        k = draw(st.integers(1, T))
        l = draw(st.integers(k, T))
        i = draw(st.integers(0, length))
        j = draw(st.integers(i + 1, length + 1))
        actions.append((i, j, n, k, l))
        length = i + (l - k + 1) + (length - j + 1)
    return actions
