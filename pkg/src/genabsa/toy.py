"""Synthetic review sentences with known triplets, for smoke tests and overfit runs."""

from __future__ import annotations

import random
from typing import List

ASPECTS = [
    ["battery", "life"], ["screen"], ["keyboard"], ["wine", "selection"], ["drinks"],
    ["service"], ["pizza"], ["staff"], ["price"], ["sound", "quality"], ["menu"], ["trackpad"],
]
OPINIONS = {
    "POS": [["good"], ["great"], ["well", "made"], ["fairly", "priced"], ["excellent"], ["friendly"]],
    "NEG": [["bad"], ["terrible"], ["overpriced"], ["slow"], ["poorly", "designed"], ["rude"]],
    "NEU": [["okay"], ["average"], ["standard"], ["acceptable"]],
}
FILLERS = [["the"], ["honestly", "the"], ["i", "think", "the"], ["overall", "the"]]
LINKS = [["is"], ["was"], ["seemed"], ["felt", "really"]]
JOINERS = [["and"], ["but"], [",", "while"]]


def _clause(rng: random.Random, words: List[str], triplets: list, used: set) -> None:
    aspect = rng.choice([a for a in ASPECTS if tuple(a) not in used])
    used.add(tuple(aspect))
    polarity = rng.choice(sorted(OPINIONS))
    opinion = rng.choice(OPINIONS[polarity])
    words += rng.choice(FILLERS)
    a0 = len(words)
    words += aspect
    a1 = len(words) - 1
    words += rng.choice(LINKS)
    o0 = len(words)
    words += opinion
    o1 = len(words) - 1
    triplets.append({"aspect": [a0, a1], "opinion": [o0, o1], "polarity": polarity})


def make_toy_corpus(num_sentences: int = 20, seed: int = 0, max_clauses: int = 2) -> List[dict]:
    """JSONL-ready records of one or two aspect/opinion clauses each."""
    rng = random.Random(seed)
    out = []
    for _ in range(num_sentences):
        words: List[str] = []
        triplets: list = []
        used: set = set()
        for c in range(rng.randint(1, max_clauses)):
            if c:
                words += rng.choice(JOINERS)
            _clause(rng, words, triplets, used)
        words.append(".")
        out.append({"tokens": words, "triplets": triplets})
    return out
