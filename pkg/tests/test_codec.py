import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from genabsa.codec import (
    decode,
    decode_aesc,
    decode_alsc,
    decode_aoe,
    decode_fixed_len,
    decode_triplet,
    decode_with_chunks,
    encode,
    index2token,
    project,
    validity_report,
)
from genabsa.core import (
    Annotation,
    ClassTokenList,
    Polarity,
    Span,
    Subtask,
    TargetSequence,
    make_sentence,
)

from oracles import (
    fuzz_sequence,
    ref_count_triplet,
    ref_decode_aesc,
    ref_decode_aoe,
    ref_decode_fixed,
    ref_decode_triplet,
)
from strategies import examples

DRINKS = make_sentence("The drinks are always well made and wine selection is fairly priced".split())
N = 12
EOS, POS, NEG, NEU = N, N + 1, N + 2, N + 3
DRINKS_ANNS = [
    Annotation(Span(1, 1), (Span(4, 5),), Polarity.POS),
    Annotation(Span(7, 8), (Span(10, 11),), Polarity.POS),
]


def raw(seq, n=N, l=4):
    return TargetSequence(tuple(seq), n, l, raw=True)


class TestEncodeWorkedExamples:
    def test_aesc(self):
        seq = encode(Subtask.AESC, DRINKS, DRINKS_ANNS)
        assert seq.indexes == (1, 1, POS, 7, 8, POS, EOS)

    def test_oe(self):
        assert encode(Subtask.OE, DRINKS, DRINKS_ANNS).indexes == (4, 5, 10, 11, EOS)

    def test_aoe(self):
        assert encode(Subtask.AOE, DRINKS, DRINKS_ANNS, given_aspect=Span(1, 1)).indexes == (1, 1, 4, 5, EOS)
        assert encode(Subtask.AOE, DRINKS, DRINKS_ANNS, given_aspect=Span(7, 8)).indexes == (7, 8, 10, 11, EOS)

    def test_triplet(self):
        seq = encode(Subtask.TRIPLET, DRINKS, DRINKS_ANNS)
        assert seq.indexes == (1, 1, 4, 5, POS, 7, 8, 10, 11, POS, EOS)

    def test_ae_pair_alsc(self):
        assert encode(Subtask.AE, DRINKS, DRINKS_ANNS).indexes == (1, 1, 7, 8, EOS)
        assert encode(Subtask.PAIR, DRINKS, DRINKS_ANNS).indexes == (1, 1, 4, 5, 7, 8, 10, 11, EOS)
        assert encode(Subtask.ALSC, DRINKS, DRINKS_ANNS, given_aspect=Span(7, 8)).indexes == (7, 8, POS, EOS)

    def test_no_aspects(self):
        assert encode(Subtask.AE, DRINKS, []).indexes == (EOS,)

    def test_multitask_tags(self):
        classes = ClassTokenList.with_tags([Subtask.AESC, Subtask.OE])
        aesc_tag, oe_tag = N + 4, N + 5
        seq = encode(Subtask.AESC, DRINKS, DRINKS_ANNS, classes=classes, multitask=True)
        assert seq.indexes == (aesc_tag, 1, 1, POS, 7, 8, POS, EOS)
        seq = encode(Subtask.OE, DRINKS, DRINKS_ANNS, classes=classes, multitask=True)
        assert seq.indexes == (oe_tag, 4, 5, 10, 11, EOS)
        assert decode(Subtask.OE, raw(seq.indexes, l=6), classes, multitask=True) == {(4, 5), (10, 11)}

    def test_given_aspect_preconditions(self):
        with pytest.raises(ValueError):
            encode(Subtask.ALSC, DRINKS, DRINKS_ANNS)
        with pytest.raises(ValueError):
            encode(Subtask.AOE, DRINKS, DRINKS_ANNS, given_aspect=Span(2, 2))
        with pytest.raises(ValueError):
            encode(Subtask.AE, DRINKS, DRINKS_ANNS, given_aspect=Span(1, 1))

    def test_out_of_range_annotation(self):
        with pytest.raises(ValueError):
            encode(Subtask.AE, make_sentence(["a", "b"]), [Annotation(Span(0, 2), (), Polarity.POS)])

    def test_input_order_irrelevant(self):
        fwd = encode(Subtask.TRIPLET, DRINKS, DRINKS_ANNS)
        assert encode(Subtask.TRIPLET, DRINKS, DRINKS_ANNS[::-1]) == fwd


class TestDecoders:
    def test_triplet_worked(self):
        got = decode_triplet(raw([1, 1, 4, 5, POS, 7, 8, 10, 11, POS]))
        assert got == {((1, 1), (4, 5), Polarity.POS), ((7, 8), (10, 11), Polarity.POS)}

    def test_triplet_short_chunk(self):
        d = decode_with_chunks(Subtask.TRIPLET, raw([1, 1, 4, POS]))
        assert d.tuples == set()
        assert d.count("size") == 1

    def test_triplet_non_polarity_terminator_dropped(self):
        assert decode_triplet(raw([1, 1, 4, 5, EOS, 7, 8, 10, 11, POS])) == {((7, 8), (10, 11), "POS")}

    def test_aesc(self):
        assert decode_aesc(raw([1, 1, POS, 7, 8, POS])) == {((1, 1), "POS"), ((7, 8), "POS")}
        assert decode_aesc(raw([])) == set()

    def test_fixed_len(self):
        assert decode_fixed_len(raw([4, 5, 10, 11]), 2) == {(4, 5), (10, 11)}
        assert decode_fixed_len(raw([1, 1, 4, 5, 7, 8, 10, 11]), 4) == {((1, 1), (4, 5)), ((7, 8), (10, 11))}
        assert decode_fixed_len(raw([5, 4]), 2) == set()
        with pytest.raises(ValueError):
            decode_fixed_len(raw([1, 1]), 3)

    def test_aoe(self):
        assert decode_aoe(raw([1, 1, 4, 5]), Span(1, 1)) == {(4, 5)}
        assert decode_aoe(raw([7, 8, 10, 11]), Span(7, 8)) == {(10, 11)}
        assert decode_aoe(raw([1, 1]), Span(1, 1)) == set()
        with pytest.raises(ValueError):
            decode_aoe(raw([1, 2, 4, 5]), Span(1, 1))

    def test_alsc_extra_chunks_invalid(self):
        d = decode_with_chunks(Subtask.ALSC, raw([7, 8, NEG, 1, 1, POS]), given_aspect=Span(7, 8))
        assert d.tuples == {((7, 8), Polarity.NEG)}
        assert d.count("size") == 1
        assert decode_alsc(raw([7, 8, NEU, EOS]), Span(7, 8)) == {((7, 8), "NEU")}

    def test_deterministic(self):
        seq = raw([1, 1, 4, 5, POS, 3, 2, 1, 1, NEG, 0, 0, 0, 0])
        assert decode_triplet(seq) == decode_triplet(seq)


class TestRoundTrip:
    @settings(max_examples=300, deadline=None)
    @given(examples())
    def test_all_subtasks(self, example):
        sentence, anns = example
        for subtask in Subtask:
            if subtask.needs_aspect:
                for a in anns:
                    seq = encode(subtask, sentence, anns, given_aspect=a.aspect)
                    got = decode(subtask, seq, given_aspect=a.aspect)
                    assert got == project(subtask, anns, a.aspect)
            else:
                seq = encode(subtask, sentence, anns)
                assert decode(subtask, seq) == project(subtask, anns)


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", range(3))
    def test_fuzz(self, seed):
        rng = random.Random(seed)
        for _ in range(500):
            n = rng.randint(1, 12)
            seq = fuzz_sequence(rng, n, 4)
            assert decode_triplet(raw(seq, n)) == ref_decode_triplet(seq, n)
            assert decode_aesc(raw(seq, n)) == ref_decode_aesc(seq, n)
            assert decode_fixed_len(raw(seq, n), 2) == ref_decode_fixed(seq, n, 2)
            assert decode_fixed_len(raw(seq, n), 4) == ref_decode_fixed(seq, n, 4)
            given_aspect = (seq[0], seq[1]) if len(seq) >= 2 and seq[0] <= seq[1] < n else None
            if given_aspect:
                assert decode_aoe(raw(seq, n), given_aspect) == ref_decode_aoe(seq, n, given_aspect)

    def test_decode_is_total_and_partitions(self):
        rng = random.Random(7)
        classes = ClassTokenList.with_tags([Subtask.AESC, Subtask.OE])
        for _ in range(500):
            n = rng.randint(1, 10)
            seq = fuzz_sequence(rng, n, 6)
            for subtask in (Subtask.TRIPLET, Subtask.AESC, Subtask.AE, Subtask.PAIR):
                d = decode_with_chunks(subtask, raw(seq, n, 6), classes)
                assert d.count("ok") + d.count("size") + d.count("order") == len(d.chunks)
                assert len(d.tuples) <= d.count("ok")


class TestIndex2Token:
    sent = make_sentence(["the", "battery", "life", "is", "good"])

    def test_pointer(self):
        assert index2token(1, self.sent) == "battery"

    def test_classes(self):
        assert index2token(5, self.sent) == "<EOS>"
        assert index2token(6, self.sent) == "POS"

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            index2token(9, self.sent)
        with pytest.raises(IndexError):
            index2token(-1, self.sent)


class TestValidityReport:
    def test_clean_batch(self):
        seqs = [encode(Subtask.TRIPLET, DRINKS, DRINKS_ANNS)] * 3
        rep = validity_report(seqs, Subtask.TRIPLET, [DRINKS] * 3)
        assert rep.total_chunks == 6
        assert rep.invalid_size_rate == rep.invalid_order_rate == rep.invalid_token_rate == 0

    def test_one_short_chunk_in_ten(self):
        good = [1, 1, 4, 5, POS] * 9
        seqs = [raw(good + [1, 1, 4, POS, EOS])]
        rep = validity_report(seqs, Subtask.TRIPLET, [DRINKS])
        assert rep.total_chunks == 10
        assert rep.invalid_size_rate == Fraction(1, 10)

    def test_order_and_token(self):
        sent = make_sentence(["the", "wi", "ne", "is", "fair", "ly", "priced"],
                             [True, True, False, True, True, False, True])
        n = sent.n
        seqs = [
            raw([1, 2, 4, 5, n + 1, 2, 2, 6, 6, n + 2, 3, 3, 6, 4, n + 1, n], n),
        ]
        rep = validity_report(seqs, Subtask.TRIPLET, [sent])
        assert (rep.total_chunks, rep.invalid_size, rep.invalid_order, rep.invalid_token) == (3, 0, 1, 1)
        assert rep.invalid_order_rate == Fraction(1, 3)
        assert rep.invalid_token_rate == Fraction(1, 3)

    def test_fuzz_matches_counting_script(self):
        rng = random.Random(11)
        seqs, sents, expect = [], [], [0, 0, 0, 0]
        for _ in range(300):
            n = rng.randint(1, 10)
            wb = [True] + [rng.random() < 0.7 for _ in range(n - 1)]
            sents.append(make_sentence([f"t{i}" for i in range(n)], wb))
            s = fuzz_sequence(rng, n, 4)
            seqs.append(raw(s, n))
            for i, c in enumerate(ref_count_triplet(s, n, wb)):
                expect[i] += c
        rep = validity_report(seqs, Subtask.TRIPLET, sents)
        assert [rep.total_chunks, rep.invalid_size, rep.invalid_order, rep.invalid_token] == expect
        assert rep.invalid_size_rate == Fraction(expect[1], expect[0])
        assert rep.invalid_order_rate == Fraction(expect[2], expect[0] - expect[1])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            validity_report([raw([EOS])], Subtask.TRIPLET, [])
