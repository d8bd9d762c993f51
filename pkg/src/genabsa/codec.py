"""Conversion between annotations and pointer/class index sequences.

Target layouts (``s``/``e`` = span start/end pointer, ``p`` = polarity class)::

    AE       a.s a.e ...
    OE       o.s o.e ...
    AESC     a.s a.e p ...
    Pair     a.s a.e o.s o.e ...
    Triplet  a.s a.e o.s o.e p ...
    ALSC     a.s a.e p            (aspect given)
    AOE      a.s a.e o.s o.e ...  (aspect given)

every one closed by the EOS class index. Decoding never raises on malformed
input; it splits the stream into chunks, keeps the well-formed ones and labels
the rest so that :func:`validity_report` can count them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .core import (
    DEFAULT_CLASSES,
    Annotation,
    ClassTokenList,
    Sentence,
    Span,
    Subtask,
    TargetSequence,
    sort_annotations,
)

OK, BAD_SIZE, BAD_ORDER = "ok", "size", "order"

# pointers per chunk before the terminating polarity (class-terminated layouts)
# or per chunk (fixed-length layouts)
CHUNK_LEN = {
    Subtask.AE: 2,
    Subtask.OE: 2,
    Subtask.PAIR: 4,
    Subtask.AOE: 2,
    Subtask.AESC: 2,
    Subtask.ALSC: 2,
    Subtask.TRIPLET: 4,
}
CLASS_TERMINATED = (Subtask.AESC, Subtask.ALSC, Subtask.TRIPLET)


@dataclass(frozen=True)
class Chunk:
    pointers: Tuple[int, ...]
    cls: Optional[int]  # class position in the ClassTokenList, None if unterminated
    status: str


@dataclass(frozen=True)
class Decoded:
    tuples: FrozenSet
    chunks: Tuple[Chunk, ...]

    def count(self, status: str) -> int:
        return sum(c.status == status for c in self.chunks)


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------


def project(subtask: Subtask, annotations: Iterable[Annotation], given_aspect=None) -> FrozenSet:
    """Gold tuple set of ``subtask`` as the decoders return it."""
    subtask = Subtask(subtask)
    anns = list(annotations)
    if subtask is Subtask.AE:
        return frozenset(a.aspect for a in anns)
    if subtask is Subtask.OE:
        return frozenset(o for a in anns for o in a.opinions)
    if subtask is Subtask.AESC:
        return frozenset((a.aspect, a.polarity) for a in anns)
    if subtask is Subtask.PAIR:
        return frozenset((a.aspect, o) for a in anns for o in a.opinions)
    if subtask is Subtask.TRIPLET:
        return frozenset((a.aspect, o, a.polarity) for a in anns for o in a.opinions)
    given = _given(given_aspect)
    matching = [a for a in anns if a.aspect == given]
    if subtask is Subtask.ALSC:
        return frozenset((a.aspect, a.polarity) for a in matching)
    return frozenset(o for a in matching for o in a.opinions)


def _given(given_aspect) -> Span:
    if given_aspect is None:
        raise ValueError("this subtask needs a given aspect")
    return Span(*given_aspect)


def encode(
    subtask: Subtask,
    sentence: Sentence,
    annotations: Sequence[Annotation],
    given_aspect: Optional[Span] = None,
    classes: ClassTokenList = DEFAULT_CLASSES,
    multitask: bool = False,
) -> TargetSequence:
    """Build the gold target sequence of ``subtask`` for one sentence.

    With ``multitask`` the subtask's tag class (e.g. ``<AESC>``) is emitted first;
    the tag must then be part of ``classes``.
    """
    subtask = Subtask(subtask)
    n = sentence.n
    for a in annotations:
        a.check(sentence)
    if subtask.needs_aspect:
        given = _given(given_aspect)
        given.check(n)
        if not any(a.aspect == given for a in annotations):
            raise ValueError(f"given aspect {tuple(given)} is not annotated")
    elif given_aspect is not None:
        raise ValueError(f"{subtask.value} does not take a given aspect")

    out: List[int] = []
    if multitask:
        out.append(n + classes.index(subtask.tag))
    anns = sort_annotations(annotations)
    if subtask is Subtask.AE:
        for a in sorted({a.aspect for a in anns}):
            out += a
    elif subtask is Subtask.OE:
        for o in sorted({o for a in anns for o in a.opinions}):
            out += o
    elif subtask is Subtask.AESC:
        for asp, p in sorted({(a.aspect, a.polarity.value) for a in anns}):
            out += [*asp, n + classes.index(p)]
    elif subtask is Subtask.PAIR:
        for asp, o in sorted({(a.aspect, o) for a in anns for o in a.opinions}):
            out += [*asp, *o]
    elif subtask is Subtask.TRIPLET:
        triples = sorted({(a.aspect, o, a.polarity.value) for a in anns for o in a.opinions})
        for asp, o, p in triples:
            out += [*asp, *o, n + classes.index(p)]
    elif subtask is Subtask.ALSC:
        pols = sorted({a.polarity.value for a in anns if a.aspect == given})
        if len(pols) != 1:
            raise ValueError(f"aspect {tuple(given)} has conflicting polarities {pols}")
        out += [*given, n + classes.index(pols[0])]
    else:  # AOE
        out += given
        for o in sorted({o for a in anns if a.aspect == given for o in a.opinions}):
            out += o
    out.append(n)
    return TargetSequence(tuple(out), n, classes.l)


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------


def _ordered(pointers: Sequence[int]) -> bool:
    return all(pointers[i] <= pointers[i + 1] for i in range(0, len(pointers), 2))


def _spans(pointers: Sequence[int]) -> Tuple[Span, ...]:
    return tuple(Span(pointers[i], pointers[i + 1]) for i in range(0, len(pointers), 2))


def _class_terminated(body: Sequence[int], n: int, chunk_len: int, classes: ClassTokenList) -> List[Chunk]:
    chunks, buf = [], []
    for y in body:
        if y >= n:
            chunks.append((tuple(buf), y - n))
            buf = []
        else:
            buf.append(y)
    if buf:
        chunks.append((tuple(buf), None))
    out = []
    for pointers, k in chunks:
        if k is None or classes.polarity(k) is None or len(pointers) != chunk_len:
            status = BAD_SIZE
        elif not _ordered(pointers):
            status = BAD_ORDER
        else:
            status = OK
        out.append(Chunk(pointers, k, status))
    return out


def _fixed_len(body: Sequence[int], n: int, chunk_len: int) -> List[Chunk]:
    # class indexes carry no meaning here; they only break the pointer run
    runs, buf = [], []
    for y in body:
        if y >= n:
            runs.append(buf)
            buf = []
        else:
            buf.append(y)
    runs.append(buf)
    out = []
    for run in runs:
        for i in range(0, len(run), chunk_len):
            pointers = tuple(run[i : i + chunk_len])
            if len(pointers) != chunk_len:
                status = BAD_SIZE
            elif not _ordered(pointers):
                status = BAD_ORDER
            else:
                status = OK
            out.append(Chunk(pointers, None, status))
    return out


def _body(seq: TargetSequence, classes: ClassTokenList, tag: Optional[str]) -> Tuple[int, ...]:
    body = seq.strip_eos()
    if tag is not None and tag in classes.tokens and body and body[0] == seq.n + classes.index(tag):
        body = body[1:]
    return body


def _check_prefix(body: Sequence[int], given: Span) -> None:
    if tuple(body[:2]) != tuple(given):
        raise ValueError(f"sequence prefix {list(body[:2])} does not match the given aspect {tuple(given)}")


def chunk_sequence(
    subtask: Subtask,
    seq: TargetSequence,
    classes: ClassTokenList = DEFAULT_CLASSES,
    given_aspect: Optional[Span] = None,
    multitask: bool = False,
) -> List[Chunk]:
    """Split a raw sequence into labelled chunks.

    For ALSC/AOE the first two indexes are the supplied aspect; when
    ``given_aspect`` is passed they are checked against it.
    """
    subtask = Subtask(subtask)
    n = seq.n
    if seq.l != classes.l:
        raise ValueError(f"sequence expects {seq.l} classes, class list has {classes.l}")
    body = _body(seq, classes, subtask.tag if multitask else None)
    if subtask.needs_aspect and given_aspect is not None:
        _check_prefix(body, Span(*given_aspect))
    if subtask is Subtask.ALSC:
        chunks = _class_terminated(body, n, 2, classes)
        return chunks[:1] + [Chunk(c.pointers, c.cls, BAD_SIZE) for c in chunks[1:]]
    if subtask is Subtask.AOE:
        return _fixed_len(body[2:], n, 2)
    if subtask in CLASS_TERMINATED:
        return _class_terminated(body, n, CHUNK_LEN[subtask], classes)
    return _fixed_len(body, n, CHUNK_LEN[subtask])


def _tuple_of(subtask: Subtask, chunk: Chunk, classes: ClassTokenList):
    spans = _spans(chunk.pointers)
    if subtask in (Subtask.AE, Subtask.OE, Subtask.AOE):
        return spans[0]
    if subtask is Subtask.PAIR:
        return spans
    pol = classes.polarity(chunk.cls)
    if subtask is Subtask.TRIPLET:
        return (spans[0], spans[1], pol)
    return (spans[0], pol)


def decode_with_chunks(
    subtask: Subtask,
    seq: TargetSequence,
    classes: ClassTokenList = DEFAULT_CLASSES,
    given_aspect: Optional[Span] = None,
    multitask: bool = False,
) -> Decoded:
    subtask = Subtask(subtask)
    given = _given(given_aspect) if subtask.needs_aspect else None
    chunks = chunk_sequence(subtask, seq, classes, given, multitask)
    tuples = frozenset(_tuple_of(subtask, c, classes) for c in chunks if c.status == OK)
    return Decoded(tuples, tuple(chunks))


def decode(subtask, seq, classes=DEFAULT_CLASSES, given_aspect=None, multitask=False) -> FrozenSet:
    return decode_with_chunks(subtask, seq, classes, given_aspect, multitask).tuples


def decode_triplet(seq: TargetSequence, classes: ClassTokenList = DEFAULT_CLASSES) -> FrozenSet:
    """``{(aspect, opinion, polarity)}`` from a raw Triplet sequence."""
    return decode(Subtask.TRIPLET, seq, classes)


def decode_aesc(seq: TargetSequence, classes: ClassTokenList = DEFAULT_CLASSES) -> FrozenSet:
    return decode(Subtask.AESC, seq, classes)


def decode_fixed_len(seq: TargetSequence, chunk_len: int) -> FrozenSet:
    """Span chunks of an AE/OE (``chunk_len=2``) or Pair (``chunk_len=4``) sequence."""
    if chunk_len == 2:
        return decode(Subtask.AE, seq)
    if chunk_len == 4:
        return decode(Subtask.PAIR, seq)
    raise ValueError("chunk_len must be 2 or 4")


def decode_aoe(seq: TargetSequence, given_aspect: Span) -> FrozenSet:
    return decode(Subtask.AOE, seq, given_aspect=given_aspect)


def decode_alsc(seq: TargetSequence, given_aspect: Span, classes: ClassTokenList = DEFAULT_CLASSES) -> FrozenSet:
    return decode(Subtask.ALSC, seq, classes, given_aspect=given_aspect)


def index2token(index: int, sentence: Sentence, classes: ClassTokenList = DEFAULT_CLASSES) -> str:
    n = sentence.n
    if not 0 <= index < n + classes.l:
        raise IndexError(f"index {index} outside [0, {n + classes.l - 1}]")
    return sentence.tokens[index] if index < n else classes.tokens[index - n]


# ---------------------------------------------------------------------------
# validity diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidityReport:
    """Chunk-level counts of malformed generations, with exact rates."""

    total_chunks: int
    invalid_size: int
    invalid_order: int
    invalid_token: int

    @staticmethod
    def _rate(num: int, den: int) -> Fraction:
        return Fraction(num, den) if den else Fraction(0)

    @property
    def invalid_size_rate(self) -> Fraction:
        return self._rate(self.invalid_size, self.total_chunks)

    @property
    def invalid_order_rate(self) -> Fraction:
        return self._rate(self.invalid_order, self.total_chunks - self.invalid_size)

    @property
    def invalid_token_rate(self) -> Fraction:
        return self._rate(self.invalid_token, self.total_chunks)

    def to_dict(self) -> dict:
        return {
            "total_chunks": self.total_chunks,
            "invalid_size": self.invalid_size,
            "invalid_order": self.invalid_order,
            "invalid_token": self.invalid_token,
            "invalid_size_rate": float(self.invalid_size_rate),
            "invalid_order_rate": float(self.invalid_order_rate),
            "invalid_token_rate": float(self.invalid_token_rate),
        }

    def to_table(self) -> str:
        rows = [
            ("Invalid size", self.invalid_size_rate),
            ("Invalid order", self.invalid_order_rate),
            ("Invalid token", self.invalid_token_rate),
        ]
        lines = [f"{'metric':<14} {'rate':>8}", "-" * 23]
        lines += [f"{name:<14} {float(rate) * 100:>7.2f}%" for name, rate in rows]
        lines.append(f"{'chunks':<14} {self.total_chunks:>8d}")
        return "\n".join(lines)


def validity_report(
    raw_sequences: Sequence[TargetSequence],
    subtask: Subtask,
    sentences: Sequence[Sentence],
    classes: ClassTokenList = DEFAULT_CLASSES,
    multitask: bool = False,
) -> ValidityReport:
    if len(raw_sequences) != len(sentences):
        raise ValueError(f"{len(raw_sequences)} sequences but {len(sentences)} sentences")
    total = size = order = token = 0
    for seq, sent in zip(raw_sequences, sentences):
        if seq.n != sent.n:
            raise ValueError("sequence and sentence lengths disagree")
        for chunk in chunk_sequence(subtask, seq, classes, multitask=multitask):
            total += 1
            size += chunk.status == BAD_SIZE
            order += chunk.status == BAD_ORDER
            if chunk.pointers and not sent.word_begin[chunk.pointers[0]]:
                token += 1
    return ValidityReport(total, size, order, token)
