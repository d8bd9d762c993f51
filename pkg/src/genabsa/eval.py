"""Exact-match precision / recall / F1, micro-averaged over sentences."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

from .core import Polarity, Span


def _shape(item):
    if isinstance(item, Polarity):
        return "polarity"
    if isinstance(item, tuple):
        if len(item) == 2 and all(isinstance(v, int) for v in item):
            return "span"
        return tuple(_shape(v) for v in item)
    if isinstance(item, str):
        return "polarity"
    return type(item).__name__


def _common_shape(items: Iterable):
    shapes = {_shape(x) for x in items}
    if len(shapes) > 1:
        raise ValueError(f"tuples of different arity mixed: {sorted(map(str, shapes))}")
    return next(iter(shapes), None)


@dataclass(frozen=True)
class Scores:
    n_gold: int
    n_pred: int
    n_matched: int

    def __post_init__(self):
        if self.n_matched > min(self.n_gold, self.n_pred):
            raise ValueError("matched count exceeds gold or predicted count")

    @property
    def zero_support(self) -> bool:
        return self.n_gold == 0

    @property
    def precision(self) -> Fraction:
        return Fraction(self.n_matched, self.n_pred) if self.n_pred else Fraction(0)

    @property
    def recall(self) -> Fraction:
        return Fraction(self.n_matched, self.n_gold) if self.n_gold else Fraction(0)

    @property
    def f1(self) -> Fraction:
        # equals 2PR / (P + R)
        den = self.n_gold + self.n_pred
        return Fraction(2 * self.n_matched, den) if den and self.n_matched else Fraction(0)

    def __add__(self, other: "Scores") -> "Scores":
        return Scores(self.n_gold + other.n_gold, self.n_pred + other.n_pred, self.n_matched + other.n_matched)

    def to_dict(self) -> dict:
        return {
            "precision": float(self.precision),
            "recall": float(self.recall),
            "f1": float(self.f1),
            "gold": self.n_gold,
            "predicted": self.n_pred,
            "matched": self.n_matched,
            "zero_support": self.zero_support,
        }


def score_spans(gold: Iterable, pred: Iterable) -> Scores:
    """Exact set matching of span / span+polarity tuples for one sentence."""
    gold, pred = set(gold), set(pred)
    g, p = _common_shape(gold), _common_shape(pred)
    if g is not None and p is not None and g != p:
        raise ValueError(f"gold tuples look like {g} but predictions look like {p}")
    return Scores(len(gold), len(pred), len(gold & pred))


def score_corpus(gold_sets: Sequence[Iterable], pred_sets: Sequence[Iterable]) -> Scores:
    """Micro-averaged scores over aligned per-sentence tuple sets."""
    if len(gold_sets) != len(pred_sets):
        raise ValueError(f"{len(gold_sets)} gold sentences but {len(pred_sets)} predicted")
    total = Scores(0, 0, 0)
    for g, p in zip(gold_sets, pred_sets):
        total = total + score_spans(g, p)
    return total


@dataclass(frozen=True)
class ConditionedScores:
    """ALSC accuracy and AESC scores restricted to correctly extracted aspects."""

    alsc_correct: int
    alsc_support: int
    aesc: Scores

    @property
    def alsc_accuracy(self) -> Fraction:
        return Fraction(self.alsc_correct, self.alsc_support) if self.alsc_support else Fraction(0)

    def to_dict(self) -> dict:
        return {
            "alsc_accuracy": float(self.alsc_accuracy),
            "alsc_correct": self.alsc_correct,
            "alsc_support": self.alsc_support,
            "zero_support": self.alsc_support == 0,
            "aesc": self.aesc.to_dict(),
        }


def _polarities(pairs, aspect) -> frozenset:
    return frozenset(Polarity(p) for a, p in pairs if a == aspect)


def score_conditioned(
    gold_aesc: Sequence[Iterable],
    pred_aesc: Sequence[Iterable],
    pred_ae: Optional[Sequence[Iterable]] = None,
) -> ConditionedScores:
    """Score polarity only where the aspect span itself was found.

    ``pred_ae`` defaults to the aspects of ``pred_aesc``. For every sentence the
    true-positive aspects are ``pred_ae & gold aspects``; ALSC counts one of them
    as correct when its predicted polarities equal the gold ones. AESC counts a
    predicted (aspect, polarity) pair as matched only if its aspect is a
    true-positive aspect and the pair is gold.
    """
    if len(gold_aesc) != len(pred_aesc):
        raise ValueError("gold and predicted sentence counts differ")
    correct = support = 0
    aesc = Scores(0, 0, 0)
    for i, (gold, pred) in enumerate(zip(gold_aesc, pred_aesc)):
        gold = {(Span(*a), Polarity(p)) for a, p in gold}
        pred = {(Span(*a), Polarity(p)) for a, p in pred}
        ae = {Span(*a) for a in pred_ae[i]} if pred_ae is not None else {a for a, _ in pred}
        tp = ae & {a for a, _ in gold}
        for aspect in tp:
            support += 1
            correct += _polarities(pred, aspect) == _polarities(gold, aspect)
        matched = {(a, p) for a, p in pred & gold if a in tp}
        aesc = aesc + Scores(len(gold), len(pred), len(matched))
    return ConditionedScores(correct, support, aesc)


@dataclass
class EvalReport:
    rows: Dict[str, Scores] = field(default_factory=dict)
    extras: Dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scores": {name: s.to_dict() for name, s in self.rows.items()},
            **({"conditioned": self.extras} if self.extras else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        header = f"{'subtask':<10} {'P':>7} {'R':>7} {'F1':>7} {'gold':>6} {'pred':>6} {'match':>6}"
        lines: List[str] = [header, "-" * len(header)]
        for name, s in self.rows.items():
            flag = "  (zero support)" if s.zero_support else ""
            lines.append(
                f"{name:<10} {float(s.precision) * 100:7.2f} {float(s.recall) * 100:7.2f} "
                f"{float(s.f1) * 100:7.2f} {s.n_gold:6d} {s.n_pred:6d} {s.n_matched:6d}{flag}"
            )
        for name, extra in self.extras.items():
            lines.append(
                f"{name:<10} acc {extra['alsc_accuracy'] * 100:6.2f} over {extra['alsc_support']} "
                "correctly extracted aspects"
            )
        return "\n".join(lines) + "\n"
