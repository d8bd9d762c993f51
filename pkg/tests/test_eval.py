import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genabsa.core import Polarity
from genabsa.eval import EvalReport, Scores, score_conditioned, score_corpus, score_spans

from oracles import ref_conditioned

POS, NEG, NEU = Polarity.POS, Polarity.NEG, Polarity.NEU
T1 = ((0, 0), (2, 2), POS)
T2 = ((3, 4), (6, 6), NEG)
T3 = ((8, 8), (9, 10), NEU)
T4 = ((11, 11), (12, 12), POS)
X = ((1, 1), (2, 2), NEG)
Y = ((5, 5), (7, 7), NEU)

# (gold, pred, hand counts gold/pred/matched, hand P, R, F1)
FIXTURE = [
    ({T1}, {T1}, (1, 1, 1), Fraction(1), Fraction(1), Fraction(1)),
    ({T1, T2, T3, T4}, {T1, T2, X}, (4, 3, 2), Fraction(2, 3), Fraction(1, 2), Fraction(4, 7)),
    (set(), set(), (0, 0, 0), Fraction(0), Fraction(0), Fraction(0)),
    ({T1}, set(), (1, 0, 0), Fraction(0), Fraction(0), Fraction(0)),
    (set(), {X}, (0, 1, 0), Fraction(0), Fraction(0), Fraction(0)),
    ({T1}, {((0, 0), (2, 2), NEG)}, (1, 1, 0), Fraction(0), Fraction(0), Fraction(0)),
    ({T1}, {((0, 0), (2, 3), POS)}, (1, 1, 0), Fraction(0), Fraction(0), Fraction(0)),
    ({T1, T2}, {T2, T1}, (2, 2, 2), Fraction(1), Fraction(1), Fraction(1)),
    ({T1, T2}, {T1}, (2, 1, 1), Fraction(1), Fraction(1, 2), Fraction(2, 3)),
    ({T1}, {T1, X, Y}, (1, 3, 1), Fraction(1, 3), Fraction(1), Fraction(1, 2)),
]
# pooled by hand: gold 13, pred 13, matched 7
MICRO = Scores(13, 13, 7)


class TestScoreSpans:
    @pytest.mark.parametrize("gold,pred,counts,p,r,f1", FIXTURE)
    def test_fixture_rows(self, gold, pred, counts, p, r, f1):
        s = score_spans(gold, pred)
        assert (s.n_gold, s.n_pred, s.n_matched) == counts
        assert (s.precision, s.recall, s.f1) == (p, r, f1)

    def test_fixture_micro(self):
        s = score_corpus([g for g, *_ in FIXTURE], [p for _, p, *_ in FIXTURE])
        assert s == MICRO
        assert s.precision == s.recall == s.f1 == Fraction(7, 13)

    def test_aesc_polarity_must_match(self):
        assert score_spans({((1, 1), POS)}, {((1, 1), POS)}).f1 == 1
        assert score_spans({((1, 1), POS)}, {((1, 1), NEG)}).f1 == 0

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            score_spans({((1, 1), POS)}, {(1, 1)})
        with pytest.raises(ValueError):
            score_spans({T1}, {((1, 1), POS)})

    def test_zero_support_flag(self):
        s = score_spans(set(), {(0, 0)})
        assert s.zero_support and s.to_dict()["f1"] == 0.0

    def test_corpus_length_mismatch(self):
        with pytest.raises(ValueError):
            score_corpus([set()], [])

    def test_f1_is_harmonic_mean(self):
        for gold, pred, *_ in FIXTURE:
            s = score_spans(gold, pred)
            p, r = s.precision, s.recall
            assert s.f1 == (2 * p * r / (p + r) if p + r else 0)


span_sets = st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=8)


class TestProperties:
    @given(span_sets, span_sets)
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, gold, pred):
        a, b = score_spans(gold, pred), score_spans(pred, gold)
        assert (a.precision, a.recall, a.f1) == (b.recall, b.precision, b.f1)

    @given(span_sets, span_sets)
    @settings(max_examples=200, deadline=None)
    def test_bounds(self, gold, pred):
        s = score_spans(gold, pred)
        assert all(0 <= v <= 1 for v in (s.precision, s.recall, s.f1))
        assert s.n_matched <= min(s.n_gold, s.n_pred)

    @given(span_sets, st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=8))
    @settings(max_examples=200, deadline=None)
    def test_duplicates_ignored(self, gold, pred_list):
        assert score_spans(gold, pred_list + pred_list) == score_spans(gold, set(pred_list))


def _random_aesc(rng, n_sent=30):
    aspects = [(i, i + rng.randint(0, 1)) for i in range(6)]
    pols = ["POS", "NEG", "NEU"]
    gold, pred = [], []
    for _ in range(n_sent):
        g = {(a, rng.choice(pols)) for a in rng.sample(aspects, rng.randint(0, 3))}
        p = {(a, rng.choice(pols)) for a in rng.sample(aspects, rng.randint(0, 3))}
        # sometimes copy gold pairs so matches are common
        p |= {x for x in g if rng.random() < 0.5}
        gold.append(g)
        pred.append(p)
    return gold, pred


class TestConditioned:
    def test_all_aspects_wrong(self):
        c = score_conditioned([{((0, 0), "POS")}], [{((1, 1), "POS")}])
        assert c.alsc_support == 0 and c.alsc_accuracy == 0 and c.to_dict()["zero_support"]

    def test_half_polarities_right(self):
        gold = [{((0, 0), "POS"), ((2, 2), "NEG")}]
        pred = [{((0, 0), "POS"), ((2, 2), "POS")}]
        c = score_conditioned(gold, pred)
        assert c.alsc_accuracy == Fraction(1, 2)
        assert (c.aesc.n_gold, c.aesc.n_pred, c.aesc.n_matched) == (2, 2, 1)

    def test_separate_ae_predictions(self):
        gold = [{((0, 0), "POS"), ((2, 2), "NEG")}]
        pred = [{((0, 0), "POS"), ((2, 2), "NEG")}]
        c = score_conditioned(gold, pred, pred_ae=[{(0, 0)}])
        assert c.alsc_support == 1 and c.aesc.n_matched == 1

    def test_randomized_against_oracle(self):
        rng = random.Random(11)
        for _ in range(50):
            gold, pred = _random_aesc(rng)
            c = score_conditioned(gold, pred)
            assert (c.alsc_correct, c.alsc_support, c.aesc.n_gold, c.aesc.n_pred, c.aesc.n_matched) == \
                ref_conditioned(gold, pred)


class TestReport:
    def test_json_and_table(self):
        report = EvalReport({"AESC": Scores(4, 3, 2), "OE": Scores(0, 0, 0)})
        d = report.to_dict()["scores"]
        assert d["AESC"]["precision"] == pytest.approx(2 / 3)
        assert d["OE"]["zero_support"]
        table = report.to_table()
        assert "66.67" in table and "57.14" in table and "(zero support)" in table
