"""Domain types shared across the package.

Everything here is immutable once built. Spans are inclusive on both ends and
pointer indexes are 0-based over the source tokens; class ``k`` of a
:class:`ClassTokenList` is addressed by the index ``n + k`` in a target sequence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

EOS = "<EOS>"


class Polarity(str, enum.Enum):
    POS = "POS"
    NEG = "NEG"
    NEU = "NEU"

    def __str__(self) -> str:
        return self.value


class Subtask(str, enum.Enum):
    AE = "AE"
    OE = "OE"
    ALSC = "ALSC"
    AOE = "AOE"
    AESC = "AESC"
    PAIR = "Pair"
    TRIPLET = "Triplet"

    def __str__(self) -> str:
        return self.value

    @property
    def needs_aspect(self) -> bool:
        """True for the subtasks whose aspect is supplied at inference time."""
        return self in (Subtask.ALSC, Subtask.AOE)

    @property
    def tag(self) -> str:
        return f"<{self.value}>"

    @classmethod
    def parse(cls, name: str) -> "Subtask":
        for member in cls:
            if member.value.lower() == name.lower():
                return member
        raise ValueError(f"unknown subtask {name!r}")


class _SpanBase(NamedTuple):
    start: int
    end: int


class Span(_SpanBase):
    """Inclusive token range. Compares equal to the plain tuple ``(start, end)``."""

    __slots__ = ()

    def __new__(cls, start: int, end: int) -> "Span":
        start, end = int(start), int(end)
        if start < 0 or end < start:
            raise ValueError(f"invalid span ({start}, {end})")
        return super().__new__(cls, start, end)

    def __repr__(self) -> str:
        return f"Span({self.start}, {self.end})"

    def check(self, n: int) -> None:
        if self.end >= n:
            raise ValueError(f"span {tuple(self)} out of range for {n} tokens")


@dataclass(frozen=True)
class Sentence:
    tokens: Tuple[str, ...]
    word_begin: Tuple[bool, ...]

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise ValueError("a sentence needs at least one token")
        if len(self.word_begin) != len(self.tokens):
            raise ValueError("word_begin must have one flag per token")
        if any(not isinstance(t, str) or not t for t in self.tokens):
            raise ValueError("tokens must be non-empty strings")
        if not self.word_begin[0]:
            raise ValueError("the first token must begin a word")

    @property
    def n(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def word_index(self) -> Tuple[int, ...]:
        """Word number of every token (pieces of one word share a number)."""
        out, w = [], -1
        for begins in self.word_begin:
            w += int(begins)
            out.append(w)
        return tuple(out)

    def words(self) -> Tuple[str, ...]:
        words: list = []
        for tok, begins in zip(self.tokens, self.word_begin):
            if begins:
                words.append(tok)
            else:
                words[-1] += tok
        return tuple(words)


def make_sentence(tokens: Sequence[str], word_begin: Optional[Sequence[bool]] = None) -> Sentence:
    tokens = tuple(tokens)
    if word_begin is None:
        word_begin = (True,) * len(tokens)
    return Sentence(tokens, tuple(bool(b) for b in word_begin))


@dataclass(frozen=True)
class Annotation:
    """One aspect term with its polarity and the opinion terms attached to it."""

    aspect: Span
    opinions: Tuple[Span, ...] = ()
    polarity: Polarity = Polarity.NEU

    def __post_init__(self):
        object.__setattr__(self, "aspect", Span(*self.aspect))
        opinions = tuple(Span(*o) for o in self.opinions)
        if list(opinions) != sorted(set(opinions)):
            raise ValueError("opinions must be sorted and free of duplicates")
        object.__setattr__(self, "opinions", opinions)
        object.__setattr__(self, "polarity", Polarity(self.polarity))

    def check(self, sentence: Sentence) -> None:
        self.aspect.check(sentence.n)
        for o in self.opinions:
            o.check(sentence.n)

    @property
    def sort_key(self):
        first = self.opinions[0].start if self.opinions else -1
        return (self.aspect.start, self.aspect.end, first)


def sort_annotations(annotations: Iterable[Annotation]) -> list:
    return sorted(annotations, key=lambda a: (a.sort_key, a.opinions, a.polarity.value))


@dataclass(frozen=True)
class ClassTokenList:
    """Class tokens addressable by the decoder; position 0 is always ``<EOS>``."""

    tokens: Tuple[str, ...] = (EOS, "POS", "NEG", "NEU")

    def __post_init__(self):
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        if not tokens or tokens[0] != EOS:
            raise ValueError("class list must start with <EOS>")
        if len(set(tokens)) != len(tokens):
            raise ValueError("duplicate class tokens")
        for p in Polarity:
            if p.value not in tokens:
                raise ValueError(f"class list is missing {p.value}")

    @classmethod
    def with_tags(cls, subtasks: Iterable[Subtask]) -> "ClassTokenList":
        return cls(cls().tokens + tuple(Subtask(s).tag for s in subtasks))

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def index(self, token: str) -> int:
        return self.tokens.index(token)

    def polarity(self, k: int) -> Optional[Polarity]:
        """Polarity carried by class ``k``, or None for EOS and task tags."""
        tok = self.tokens[k]
        try:
            return Polarity(tok)
        except ValueError:
            return None

    @property
    def tags(self) -> Tuple[str, ...]:
        return tuple(t for t in self.tokens[1:] if self.polarity(self.index(t)) is None)


DEFAULT_CLASSES = ClassTokenList()


@dataclass(frozen=True)
class TargetSequence:
    """Mixed pointer/class index list.

    A gold (``raw=False``) sequence ends with the EOS class index and contains it
    nowhere else. Generated sequences are built with ``raw=True`` and only have
    their indexes range-checked.
    """

    indexes: Tuple[int, ...]
    n: int
    l: int  # noqa: E741
    raw: bool = False

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indexes)
        object.__setattr__(self, "indexes", idx)
        if self.n < 1 or self.l < 1:
            raise ValueError("n and l must be positive")
        for i in idx:
            if not 0 <= i < self.n + self.l:
                raise ValueError(f"index {i} outside [0, {self.n + self.l - 1}]")
        if not self.raw:
            if not idx or idx[-1] != self.eos or idx.count(self.eos) != 1:
                raise ValueError("gold sequence must end with exactly one EOS")

    @property
    def eos(self) -> int:
        return self.n

    def is_pointer(self, i: int) -> bool:
        return 0 <= i < self.n

    def is_class(self, i: int) -> bool:
        return self.n <= i < self.n + self.l

    def __len__(self) -> int:
        return len(self.indexes)

    def __iter__(self):
        return iter(self.indexes)

    def strip_eos(self) -> Tuple[int, ...]:
        if self.indexes and self.indexes[-1] == self.eos:
            return self.indexes[:-1]
        return self.indexes
