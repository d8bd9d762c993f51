"""Small models and corpora shared by the model, CLI and acceptance tests."""

import random

from genabsa.codec import encode
from genabsa.core import ClassTokenList, Subtask, make_sentence
from genabsa.data import record_from_json
from genabsa.model import ModelConfig, PointerSeq2Seq, Vocab
from genabsa.toy import make_toy_corpus

WORDS = "the battery life is good but screen was rather dim and keys feel cheap".split()


def tiny_model(d=16, layers=1, seed=0, alpha=0.5, dropout=0.0, classes=None, words=WORDS, **kw):
    classes = classes or ClassTokenList()
    vocab = Vocab.build(words, classes.tokens)
    cfg = ModelConfig(d=d, layers_enc=layers, layers_dec=layers, heads=2, ffn_dim=2 * d,
                      vocab_size=len(vocab), l=classes.l, alpha=alpha, dropout=dropout, seed=seed, **kw)
    return PointerSeq2Seq(cfg, vocab, classes)


def random_sentence(rng: random.Random, lo=2, hi=9, words=WORDS):
    return make_sentence([rng.choice(words) for _ in range(rng.randint(lo, hi))])


def toy_examples(num=20, seed=0, subtask=Subtask.TRIPLET):
    records = [record_from_json(r) for r in make_toy_corpus(num, seed)]
    examples = [(r.sentence, encode(subtask, r.sentence, r.annotations).indexes) for r in records]
    words = sorted({t for r in records for t in r.sentence.tokens})
    return records, examples, words
