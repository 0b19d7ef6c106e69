"""Seeded synthetic corpora for tests, benchmarks and demos.

Records look like small biography tables with one-sentence descriptions,
so retrieval finds neighbors that share phrasing but not content words.
"""

from __future__ import annotations

import random

FIELD_VALUES = {
    "name": ["ada lovelace", "alan turing", "grace hopper", "emmy noether", "niels bohr",
             "marie curie", "john nash", "kurt godel", "ayelet nahmias-verbin", "paul erdos"],
    "born": ["1815", "1912", "1906", "1882", "1885", "1867", "1928", "1906", "1970", "1913"],
    "birthplace": ["london", "paris", "vienna", "copenhagen", "warsaw", "budapest", "new york",
                   "tel aviv", "erlangen", "bluefield"],
    "occupation": ["mathematician", "physicist", "computer scientist", "chemist", "logician",
                   "writer", "politician", "engineer"],
    "nationality": ["british", "american", "german", "danish", "polish", "hungarian", "israeli",
                    "austrian"],
    "known_for": ["analytical engine", "turing machine", "cobol", "noether theorem",
                  "bohr model", "radioactivity", "nash equilibrium", "incompleteness"],
}

TEMPLATES = [
    "{name} ( born {born} ) was a {nationality} {occupation} .",
    "{name} was a {occupation} born in {birthplace} in {born} .",
    "{name} ( {born} ) is a {nationality} {occupation} known for the {known_for} .",
    "born in {birthplace} , {name} became a {occupation} known for the {known_for} .",
    "{name} is a {nationality} {occupation} from {birthplace} .",
    "{name} was a {nationality} {occupation} best known for work on the {known_for} , born in {birthplace} .",
    "the {occupation} {name} was born in {birthplace} and is known for the {known_for} .",
]

FILLER = ["also", "later", "widely", "often", "famous", "early", "career", "many", "awarded"]


def _fill(template: str, table: dict, rng: random.Random) -> str:
    words = template.format(**table).split()
    # occasional filler so targets are not pure template instances
    for _ in range(rng.randint(0, 2)):
        words.insert(rng.randint(1, len(words) - 1), rng.choice(FILLER))
    return " ".join(words)


def synthetic_record(rng: random.Random, idx: int, max_target: int = 38) -> dict:
    fields = list(FIELD_VALUES)
    keep = ["name"] + [f for f in fields[1:] if rng.random() < 0.8]
    table = {f: rng.choice(FIELD_VALUES[f]) for f in fields}
    target = _fill(rng.choice(TEMPLATES), table, rng)
    if rng.random() < 0.3:
        # a second sentence pushes some targets toward the length cap
        target += " " + _fill(rng.choice(TEMPLATES), table, rng)
    words = target.split()[:max_target]
    return {
        "id": f"ex{idx:05d}",
        "source": {"fields": [[f, table[f]] for f in keep]},
        "target": " ".join(words),
    }


def synthetic_corpus(count: int, seed: int = 0, max_target: int = 38) -> list[dict]:
    """``count`` records; padded targets stay within ``max_target + 2`` tokens."""
    rng = random.Random(seed)
    return [synthetic_record(rng, idx, max_target) for idx in range(count)]


def random_parse_instance(rng: random.Random, T: int, N: int, vocab_size: int = 30):
    """Target of length ``T`` and ``N`` neighbors of length ``T`` sharing chunks with it."""
    y = [rng.randrange(3, 3 + vocab_size) for _ in range(T)]
    neighbors = []
    for _ in range(N):
        seq: list[int] = []
        while len(seq) < T:
            if rng.random() < 0.5:
                a = rng.randrange(T)
                seq += y[a:a + rng.randint(1, 6)]
            else:
                seq.append(rng.randrange(3, 3 + vocab_size))
        neighbors.append(seq[:T])
    return y, neighbors
