"""Dataset ingestion, tokenization and serialization.

The canonical on-disk format is JSONL, one sentence per line::

    {"tokens": ["the", "battery", "life", "is", "good"],
     "triplets": [{"aspect": [1, 2], "opinion": [4, 4], "polarity": "POS"}]}

with 0-based inclusive word indexes. ``"opinion"`` may be null for aspects
without an attached opinion term. A line without ``"triplets"`` is an
unlabeled sentence.
"""

from __future__ import annotations

import ast
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from .core import Annotation, Polarity, Sentence, Span, make_sentence, sort_annotations

Merge = Tuple[str, str]


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class TokenizerConfig:
    mode: str = "whitespace"
    merges: Optional[Tuple[Merge, ...]] = None
    lowercase: bool = False

    def __post_init__(self):
        if self.mode not in ("whitespace", "bpe"):
            raise ValueError(f"unknown tokenizer mode {self.mode!r}")
        if self.mode == "bpe" and self.merges is None:
            raise ValueError("bpe mode needs a merge table")
        if self.merges is not None:
            object.__setattr__(self, "merges", tuple(tuple(m) for m in self.merges))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "merges": [list(m) for m in self.merges] if self.merges is not None else None,
            "lowercase": self.lowercase,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TokenizerConfig":
        return cls(d.get("mode", "whitespace"), d.get("merges"), bool(d.get("lowercase", False)))


WHITESPACE = TokenizerConfig()


@dataclass(frozen=True)
class DatasetRecord:
    sentence: Sentence
    annotations: Tuple[Annotation, ...] = ()
    labeled: bool = True

    def __post_init__(self):
        anns = tuple(sort_annotations(self.annotations))
        for a in anns:
            a.check(self.sentence)
        object.__setattr__(self, "annotations", anns)


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------


def apply_bpe(word: str, merges: Sequence[Merge]) -> List[str]:
    """Split ``word`` into pieces by greedily applying the best-ranked merge."""
    ranks = {tuple(m): i for i, m in enumerate(merges)}
    symbols = list(word)
    while len(symbols) > 1:
        best = min(
            (ranks.get((a, b), len(ranks)), i) for i, (a, b) in enumerate(zip(symbols, symbols[1:]))
        )
        if best[0] == len(ranks):
            break
        pair = (symbols[best[1]], symbols[best[1] + 1])
        merged, i = [], 0
        while i < len(symbols):
            if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
                merged.append(symbols[i] + symbols[i + 1])
                i += 2
            else:
                merged.append(symbols[i])
                i += 1
        symbols = merged
    return symbols


def tokenize(words: Sequence[str], cfg: TokenizerConfig = WHITESPACE) -> Sentence:
    if not words:
        raise ValueError("cannot tokenize an empty word list")
    if cfg.lowercase:
        words = [w.lower() for w in words]
    if cfg.mode == "whitespace":
        return make_sentence(words)
    tokens, begins = [], []
    for w in words:
        pieces = apply_bpe(w, cfg.merges)
        tokens += pieces
        begins += [True] + [False] * (len(pieces) - 1)
    return make_sentence(tokens, begins)


def train_bpe(corpus: Sequence[DatasetRecord], num_merges: int) -> Tuple[Merge, ...]:
    """Learn ``num_merges`` byte-pair merges from the words of ``corpus``.

    Each round merges the most frequent adjacent pair; ties go to the
    lexicographically smallest pair.
    """
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")
    if not corpus:
        raise ValueError("cannot learn merges from an empty corpus")
    freq = Counter(w for rec in corpus for w in rec.sentence.words())
    vocab = {w: list(w) for w in freq}
    merges: List[Merge] = []
    for _ in range(num_merges):
        pairs: Counter = Counter()
        for w, symbols in vocab.items():
            for pair in zip(symbols, symbols[1:]):
                pairs[pair] += freq[w]
        if not pairs:
            break
        best = min(pairs, key=lambda p: (-pairs[p], p))
        merges.append(best)
        joined = best[0] + best[1]
        for w, symbols in vocab.items():
            out, i = [], 0
            while i < len(symbols):
                if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == best:
                    out.append(joined)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            vocab[w] = out
    return tuple(merges)


def word_spans(sentence: Sentence) -> List[Tuple[int, int]]:
    """Token range ``(first, last)`` of every word."""
    spans: List[List[int]] = []
    for i, begins in enumerate(sentence.word_begin):
        if begins:
            spans.append([i, i])
        else:
            spans[-1][1] = i
    return [tuple(s) for s in spans]


def to_token_span(sentence: Sentence, word_span: Sequence[int]) -> Span:
    ranges = word_spans(sentence)
    s, e = word_span
    if not 0 <= s <= e < len(ranges):
        raise ValueError(f"word span {list(word_span)} out of range for {len(ranges)} words")
    return Span(ranges[s][0], ranges[e][1])


def to_word_span(sentence: Sentence, span: Sequence[int]) -> Span:
    widx = sentence.word_index()
    return Span(widx[span[0]], widx[span[1]])


def span_text(sentence: Sentence, span: Sequence[int]) -> str:
    words = sentence.words()
    ws = to_word_span(sentence, span)
    return " ".join(words[ws.start : ws.end + 1])


# ---------------------------------------------------------------------------
# JSONL
# ---------------------------------------------------------------------------


def _span_field(value, what: str) -> Tuple[int, int]:
    if not (isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise ValueError(f"{what} must be a [start, end] pair of integers, got {value!r}")
    return int(value[0]), int(value[1])


def record_from_json(obj: dict, cfg: TokenizerConfig = WHITESPACE) -> DatasetRecord:
    words = obj.get("tokens")
    if not isinstance(words, list) or not words or not all(isinstance(w, str) and w for w in words):
        raise ValueError("'tokens' must be a non-empty list of non-empty strings")
    sentence = tokenize(words, cfg)
    if "triplets" not in obj:
        return DatasetRecord(sentence, (), labeled=False)
    grouped: dict = {}
    for t in obj["triplets"]:
        aspect = to_token_span(sentence, _span_field(t.get("aspect"), "aspect"))
        key = (aspect, Polarity(t.get("polarity")))
        opinions = grouped.setdefault(key, set())
        if t.get("opinion") is not None:
            opinions.add(to_token_span(sentence, _span_field(t["opinion"], "opinion")))
    anns = [Annotation(a, tuple(sorted(ops)), p) for (a, p), ops in grouped.items()]
    return DatasetRecord(sentence, tuple(anns))


def record_to_json(rec: DatasetRecord) -> dict:
    out = {"tokens": list(rec.sentence.words())}
    if rec.labeled:
        triplets = []
        for a in rec.annotations:
            asp = list(to_word_span(rec.sentence, a.aspect))
            for o in a.opinions or (None,):
                triplets.append({
                    "aspect": asp,
                    "opinion": list(to_word_span(rec.sentence, o)) if o is not None else None,
                    "polarity": a.polarity.value,
                })
        out["triplets"] = triplets
    return out


def load_dataset(path, cfg: TokenizerConfig = WHITESPACE) -> List[DatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}:{lineno}: malformed JSON ({e.msg})") from None
            try:
                records.append(record_from_json(obj, cfg))
            except (ValueError, TypeError, AttributeError) as e:
                raise DatasetError(f"{path}:{lineno}: record {len(records)}: {e}") from None
    return records


def save_dataset(records: Iterable[DatasetRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(json.dumps(record_to_json(rec), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# third-party format
# ---------------------------------------------------------------------------


def convert_triplet_line(line: str) -> dict:
    """Parse ``sentence####[([a idx..], [o idx..], 'POS'), ...]`` into the JSONL schema."""
    if "####" not in line:
        raise ValueError("expected '####' between sentence and triplets")
    text, _, rest = line.rstrip("\n").partition("####")
    words = text.split()
    triplets = []
    for aspect, opinion, pol in ast.literal_eval(rest.strip()):
        triplets.append({
            "aspect": [min(aspect), max(aspect)],
            "opinion": [min(opinion), max(opinion)] if opinion else None,
            "polarity": pol.upper(),
        })
    return {"tokens": words, "triplets": triplets}


def convert_file(src, dst) -> int:
    count = 0
    lines = Path(src).read_text(encoding="utf-8").splitlines()
    with open(dst, "w", encoding="utf-8", newline="\n") as f:
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                obj = convert_triplet_line(line)
                record_from_json(obj)
            except (ValueError, SyntaxError) as e:
                raise DatasetError(f"{src}:{lineno}: {e}") from None
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")
            count += 1
    return count
