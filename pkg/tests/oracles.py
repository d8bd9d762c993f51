"""Straight-line reference implementations used as test oracles.

These deliberately share no code with the package: plain lists, plain tuples,
no chunk objects.
"""

import random

POLARITIES = {1: "POS", 2: "NEG", 3: "NEU"}


def _strip(seq, n):
    seq = list(seq)
    if seq and seq[-1] == n:
        seq.pop()
    return seq


def ref_decode_triplet(seq, n):
    out = set()
    e = []
    for y in _strip(seq, n):
        if y >= n:
            k = y - n
            if len(e) == 4 and k in POLARITIES and e[0] <= e[1] and e[2] <= e[3]:
                out.add(((e[0], e[1]), (e[2], e[3]), POLARITIES[k]))
            e = []
        else:
            e.append(y)
    return out


def ref_decode_aesc(seq, n):
    out = set()
    e = []
    for y in _strip(seq, n):
        if y >= n:
            k = y - n
            if len(e) == 2 and k in POLARITIES and e[0] <= e[1]:
                out.add(((e[0], e[1]), POLARITIES[k]))
            e = []
        else:
            e.append(y)
    return out


def ref_decode_fixed(seq, n, chunk_len):
    out = set()
    e = []
    for y in _strip(seq, n):
        if y >= n:
            e = []
            continue
        e.append(y)
        if len(e) == chunk_len:
            if all(e[i] <= e[i + 1] for i in range(0, chunk_len, 2)):
                if chunk_len == 2:
                    out.add((e[0], e[1]))
                else:
                    out.add(((e[0], e[1]), (e[2], e[3])))
            e = []
    return out


def ref_decode_aoe(seq, n, given):
    seq = _strip(seq, n)
    assert tuple(seq[:2]) == tuple(given)
    return ref_decode_fixed(seq[2:], n, 2)


def ref_count_triplet(seq, n, word_begin):
    """(chunks, bad_size, bad_order, bad_token) for one Triplet sequence."""
    chunks = []
    e = []
    for y in _strip(seq, n):
        if y >= n:
            chunks.append((e, y - n))
            e = []
        else:
            e.append(y)
    if e:
        chunks.append((e, None))
    size = order = token = 0
    for e, k in chunks:
        if len(e) != 4 or k not in POLARITIES:
            size += 1
        elif e[1] < e[0] or e[3] < e[2]:
            order += 1
        if e and not word_begin[e[0]]:
            token += 1
    return len(chunks), size, order, token


def fuzz_sequence(rng: random.Random, n: int, l: int, max_len: int = 16):
    """Raw index list mixing plausible and arbitrary material."""
    mode = rng.random()
    length = rng.randint(0, max_len)
    if mode < 0.3:
        seq = [rng.randrange(n + l) for _ in range(length)]
    else:
        seq = []
        while len(seq) < length:
            k = rng.choice([1, 2, 2, 3, 4, 4, 5])
            for _ in range(k):
                if rng.random() < 0.15:
                    seq.append(rng.randrange(n + l))
                else:
                    seq.append(rng.randrange(n))
            seq.append(n + rng.randrange(l))
    if rng.random() < 0.5:
        seq.append(n)
    return seq


def ref_conditioned(gold_sets, pred_sets):
    """Two-pass counting of the aspect-conditioned scores.

    Pass one collects the true-positive aspects of each sentence, pass two
    counts polarity agreement and matched pairs on those aspects only.
    """
    tp_aspects = []
    for gold, pred in zip(gold_sets, pred_sets):
        g_aspects = [a for a, _ in gold]
        tp_aspects.append({a for a, _ in pred if a in g_aspects})
    correct = support = n_gold = n_pred = matched = 0
    for tp, gold, pred in zip(tp_aspects, gold_sets, pred_sets):
        gold, pred = set(gold), set(pred)
        n_gold += len(gold)
        n_pred += len(pred)
        for a in tp:
            support += 1
            gp = sorted(p for x, p in gold if x == a)
            pp = sorted(p for x, p in pred if x == a)
            if gp == pp:
                correct += 1
        for a, p in pred:
            if a in tp and (a, p) in gold:
                matched += 1
    return correct, support, n_gold, n_pred, matched
