"""Autoregressive generation of index sequences."""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import torch

from ..core import Sentence, Span, Subtask, TargetSequence
from .network import PointerSeq2Seq


def forced_prefix(
    model: PointerSeq2Seq,
    sentence: Sentence,
    subtask: Subtask,
    given_aspect: Optional[Span] = None,
    multitask: bool = False,
) -> List[int]:
    """Indexes fed to the decoder before it predicts anything.

    The task tag comes first in multitask mode, then the supplied aspect for
    ALSC/AOE.
    """
    subtask = Subtask(subtask)
    n = sentence.n
    prefix = []
    if multitask:
        prefix.append(n + model.classes.index(subtask.tag))
    if subtask.needs_aspect:
        if given_aspect is None:
            raise ValueError(f"{subtask.value} generation needs a given aspect")
        aspect = Span(*given_aspect)
        aspect.check(n)
        prefix += [aspect.start, aspect.end]
    elif given_aspect is not None:
        raise ValueError(f"{subtask.value} does not take a given aspect")
    return prefix


@torch.no_grad()
def greedy(model: PointerSeq2Seq, sentence: Sentence, max_len: int, prefix: Sequence[int] = ()) -> List[int]:
    """Argmax decoding; ties go to the smaller index."""
    was_training = model.training
    model.eval()
    try:
        enc = model.encode(sentence)
        eos = sentence.n
        seq = list(prefix)
        for _ in range(max_len):
            y = int(torch.argmax(model.step_log_probs(enc, [seq])[0]))
            seq.append(y)
            if y == eos:
                break
        return seq
    finally:
        model.train(was_training)


@torch.no_grad()
def beam_search(
    model: PointerSeq2Seq,
    sentence: Sentence,
    beam: int,
    max_len: int,
    prefix: Sequence[int] = (),
) -> Tuple[List[int], float]:
    """Length-normalized beam search.

    At each step the ``beam`` best expansions of all live hypotheses are kept;
    those ending in EOS leave the beam. The winner maximizes the mean
    log-probability of its generated (non-forced) indexes. Returns the full
    sequence, forced prefix included, and that mean log-probability.
    """
    was_training = model.training
    model.eval()
    try:
        enc = model.encode(sentence)
        eos = sentence.n
        start = tuple(prefix)
        # (summed log-prob, generated indexes)
        alive: List[Tuple[float, Tuple[int, ...]]] = [(0.0, ())]
        done: List[Tuple[float, Tuple[int, ...]]] = []
        for _ in range(max_len):
            lp = model.step_log_probs(enc, [start + g for _, g in alive])
            # stable sort keeps the smaller index first among equal scores
            top_lp, top_idx = torch.sort(lp, dim=1, descending=True, stable=True)
            top_lp, top_idx = top_lp[:, :beam], top_idx[:, :beam]
            cands = []
            for (score, gen), row_lp, row_idx in zip(alive, top_lp.tolist(), top_idx.tolist()):
                for step_lp, y in zip(row_lp, row_idx):
                    cands.append((score + step_lp, step_lp, gen + (y,)))
            # rounding can make different step scores collide; fall back on the step score, then index order
            cands.sort(key=lambda c: (-c[0], -c[1], c[2]))
            alive = []
            for score, _, gen in cands[:beam]:
                (done if gen[-1] == eos else alive).append((score, gen))
            if not alive:
                break
        pool = done + alive
        best = min(pool, key=lambda h: (-h[0] / len(h[1]), h[1]))
        return list(start + best[1]), best[0] / len(best[1])
    finally:
        model.train(was_training)


def sequence_log_prob(model: PointerSeq2Seq, sentence: Sentence, seq: Sequence[int], n_forced: int = 0) -> float:
    """Mean log-probability of the generated part of ``seq`` (the beam score)."""
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            enc = model.encode(sentence)
            total = 0.0
            for t in range(n_forced, len(seq)):
                total += float(model.step_log_probs(enc, [list(seq[:t])])[0, seq[t]])
        return total / max(1, len(seq) - n_forced)
    finally:
        model.train(was_training)


def generate(
    model: PointerSeq2Seq,
    sentence: Sentence,
    subtask: Subtask,
    beam: int = 1,
    max_len: int = 50,
    given_aspect: Optional[Span] = None,
    multitask: bool = False,
) -> TargetSequence:
    if beam < 1:
        raise ValueError("beam width must be >= 1")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    prefix = forced_prefix(model, sentence, subtask, given_aspect, multitask)
    seq, _ = beam_search(model, sentence, beam, max_len, prefix)
    return TargetSequence(tuple(seq), sentence.n, model.config.l, raw=True)
