"""Encoder-decoder transformer with a pointer/class prediction head.

The encoder reads ``<s> x_1 .. x_n </s>``; the decoder reads ``<s>`` followed by
the already generated indexes, each mapped back to a token (a pointer index
becomes the source token it points at, a class index becomes its class token).
At every step the decoder state is scored against

* the ``n`` blended source states ``alpha * MLP(H) + (1 - alpha) * E`` where
  ``H`` are the encoder outputs and ``E`` the plain source token embeddings, and
* the ``l`` class token embeddings,

and a softmax over the ``n + l`` scores gives the next-index distribution.
A single embedding table serves source tokens, decoder inputs and class tokens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from ..core import ClassTokenList, Sentence
from .config import BOS, EOS_SRC, PAD, ModelConfig, Vocab


@dataclass
class EncoderOutput:
    states: Tensor  # (n, d), one row per source token
    memory: Tensor  # (n + 2, d), includes the <s> and </s> rows for cross-attention
    token_ids: Tensor  # (n,)

    @property
    def n(self) -> int:
        return self.states.shape[0]


@dataclass
class StepDistribution:
    probs: Tensor  # (n + l,)

    def __len__(self) -> int:
        return self.probs.shape[0]


class MultiHeadAttention(nn.Module):
    def __init__(self, d: int, heads: int):
        super().__init__()
        self.heads = heads
        self.q = nn.Linear(d, d)
        self.k = nn.Linear(d, d)
        self.v = nn.Linear(d, d)
        self.out = nn.Linear(d, d)

    def forward(self, x: Tensor, mem: Tensor, keep: Tensor) -> Tensor:
        """``keep`` broadcasts to (B, heads, Tq, Tk); False entries are masked out."""
        B, Tq, d = x.shape
        Tk = mem.shape[1]
        dh = d // self.heads
        q = self.q(x).view(B, Tq, self.heads, dh).transpose(1, 2)
        k = self.k(mem).view(B, Tk, self.heads, dh).transpose(1, 2)
        v = self.v(mem).view(B, Tk, self.heads, dh).transpose(1, 2)
        att = (q @ k.transpose(-1, -2)) / math.sqrt(dh)
        att = att.masked_fill(~keep, float("-inf")).softmax(-1)
        y = (att @ v).transpose(1, 2).reshape(B, Tq, d)
        return self.out(y)


class FeedForward(nn.Module):
    def __init__(self, d: int, hidden: int):
        super().__init__()
        self.fc1 = nn.Linear(d, hidden)
        self.fc2 = nn.Linear(hidden, d)

    def forward(self, x: Tensor) -> Tensor:
        return self.fc2(F.gelu(self.fc1(x)))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.attn = MultiHeadAttention(cfg.d, cfg.heads)
        self.ln1 = nn.LayerNorm(cfg.d)
        self.ffn = FeedForward(cfg.d, cfg.ffn_dim)
        self.ln2 = nn.LayerNorm(cfg.d)
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, x: Tensor, keep: Tensor) -> Tensor:
        x = self.ln1(x + self.drop(self.attn(x, x, keep)))
        return self.ln2(x + self.drop(self.ffn(x)))


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d, cfg.heads)
        self.ln1 = nn.LayerNorm(cfg.d)
        self.cross_attn = MultiHeadAttention(cfg.d, cfg.heads)
        self.ln2 = nn.LayerNorm(cfg.d)
        self.ffn = FeedForward(cfg.d, cfg.ffn_dim)
        self.ln3 = nn.LayerNorm(cfg.d)
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, x: Tensor, mem: Tensor, self_keep: Tensor, mem_keep: Tensor) -> Tensor:
        x = self.ln1(x + self.drop(self.self_attn(x, x, self_keep)))
        x = self.ln2(x + self.drop(self.cross_attn(x, mem, mem_keep)))
        return self.ln3(x + self.drop(self.ffn(x)))


class PointerSeq2Seq(nn.Module):
    def __init__(self, config: ModelConfig, vocab: Vocab, classes: ClassTokenList):
        super().__init__()
        if config.vocab_size != len(vocab):
            config = ModelConfig.from_dict({**config.to_dict(), "vocab_size": len(vocab)})
        if config.l != classes.l:
            raise ValueError(f"config has l={config.l} but {classes.l} class tokens were given")
        self.config = config
        self.vocab = vocab
        self.classes = classes
        # own RNG stream so building a model never disturbs the caller's seed
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(config.seed)
            self._build(config, vocab, classes)

    def _build(self, config: ModelConfig, vocab: Vocab, classes: ClassTokenList) -> None:
        d = config.d
        self.embed = nn.Embedding(len(vocab), d)
        self.enc_pos = nn.Embedding(config.max_positions, d)
        self.dec_pos = nn.Embedding(config.max_positions, d)
        self.enc_ln = nn.LayerNorm(d)
        self.dec_ln = nn.LayerNorm(d)
        self.encoder = nn.ModuleList(EncoderLayer(config) for _ in range(config.layers_enc))
        self.decoder = nn.ModuleList(DecoderLayer(config) for _ in range(config.layers_dec))
        self.head_mlp = nn.Sequential(nn.Linear(d, d), nn.GELU(), nn.Linear(d, d))
        self.drop = nn.Dropout(config.dropout)
        self.register_buffer(
            "class_ids", torch.tensor(vocab.encode(classes.tokens), dtype=torch.long), persistent=False
        )
        self._init_weights()

    def _init_weights(self) -> None:
        for m in self.modules():
            if isinstance(m, (nn.Linear, nn.Embedding)):
                nn.init.normal_(m.weight, 0.0, 0.02)
                if isinstance(m, nn.Linear):
                    nn.init.zeros_(m.bias)
            elif isinstance(m, nn.LayerNorm):
                nn.init.ones_(m.weight)
                nn.init.zeros_(m.bias)

    @property
    def dtype(self) -> torch.dtype:
        return self.embed.weight.dtype

    # -- batched internals -------------------------------------------------

    def _source_batch(self, sentences: Sequence[Sentence]) -> Tuple[Tensor, Tensor, Tensor]:
        """Token ids of ``<s> x </s>`` padded to a common length, and the source lengths."""
        width = max(s.n for s in sentences) + 2
        if width > self.config.max_positions:
            raise ValueError(f"sentence of {width - 2} tokens exceeds max_positions")
        pad = self.vocab.ids[PAD]
        rows = []
        for s in sentences:
            ids = [self.vocab.ids[BOS]] + self.vocab.encode(s.tokens) + [self.vocab.ids[EOS_SRC]]
            rows.append(ids + [pad] * (width - len(ids)))
        src = torch.tensor(rows, dtype=torch.long)
        lengths = torch.tensor([s.n for s in sentences], dtype=torch.long)
        return src, src != pad, lengths

    def _encode(self, src: Tensor, src_keep: Tensor) -> Tensor:
        pos = torch.arange(src.shape[1])
        x = self.drop(self.enc_ln(self.embed(src) + self.enc_pos(pos)))
        keep = src_keep[:, None, None, :]
        for layer in self.encoder:
            x = layer(x, keep)
        return x

    def _decode(self, memory: Tensor, src_keep: Tensor, dec_in: Tensor) -> Tensor:
        T = dec_in.shape[1]
        if T > self.config.max_positions:
            raise ValueError("decoder prefix exceeds max_positions")
        pos = torch.arange(T)
        x = self.drop(self.dec_ln(self.embed(dec_in) + self.dec_pos(pos)))
        causal = torch.ones(T, T, dtype=torch.bool).tril()[None, None]
        mem_keep = src_keep[:, None, None, :]
        for layer in self.decoder:
            x = layer(x, memory, causal, mem_keep)
        return x

    def _pointer_states(self, enc_states: Tensor, src_tokens: Tensor) -> Tensor:
        alpha = self.config.alpha
        return alpha * self.head_mlp(enc_states) + (1.0 - alpha) * self.embed(src_tokens)

    def _scores(self, pointer_states: Tensor, hidden: Tensor, lengths: Tensor) -> Tensor:
        """(B, T, S + l) logits; pointer slots past each sentence's length are -inf."""
        S = pointer_states.shape[1]
        ptr = hidden @ pointer_states.transpose(1, 2)
        cls = hidden @ self.embed(self.class_ids).t()
        logits = torch.cat([ptr, cls], dim=-1)
        if self.config.scale_scores:
            logits = logits / math.sqrt(self.config.d)
        valid = torch.arange(S)[None, :] < lengths[:, None]
        valid = torch.cat([valid, torch.ones(len(lengths), self.config.l, dtype=torch.bool)], dim=1)
        return logits.masked_fill(~valid[:, None, :], float("-inf"))

    def index_tokens(self, indexes: Sequence[int], src_tokens: Sequence[int], n: int) -> List[int]:
        """Map target indexes to embedding ids (pointer -> source token, class -> class token)."""
        out = []
        for y in indexes:
            if 0 <= y < n:
                out.append(int(src_tokens[y]))
            elif n <= y < n + self.config.l:
                out.append(int(self.class_ids[y - n]))
            else:
                raise IndexError(f"index {y} outside [0, {n + self.config.l - 1}]")
        return out

    def teacher_forced_logits(self, sentences: Sequence[Sentence], targets: Sequence[Sequence[int]]):
        """Logits for every gold position of a batch.

        Returns ``(logits, gold, mask)`` where ``gold`` holds the targets remapped
        to the padded layout (class ``k`` at column ``S + k``).
        """
        src, src_keep, lengths = self._source_batch(sentences)
        S = src.shape[1] - 2
        memory = self._encode(src, src_keep)
        T = max(len(t) for t in targets)
        bos = self.vocab.ids[BOS]
        dec_in = torch.full((len(targets), T), self.vocab.ids[PAD], dtype=torch.long)
        gold = torch.zeros((len(targets), T), dtype=torch.long)
        mask = torch.zeros((len(targets), T), dtype=self.dtype)
        for b, (s, tgt) in enumerate(zip(sentences, targets)):
            tokens = [bos] + self.index_tokens(tgt[:-1], src[b, 1 : s.n + 1].tolist(), s.n)
            dec_in[b, : len(tokens)] = torch.tensor(tokens)
            gold[b, : len(tgt)] = torch.tensor([y if y < s.n else S + (y - s.n) for y in tgt])
            mask[b, : len(tgt)] = 1.0
        hidden = self._decode(memory, src_keep, dec_in)
        ptr_states = self._pointer_states(memory[:, 1 : S + 1], src[:, 1 : S + 1])
        return self._scores(ptr_states, hidden, lengths), gold, mask

    # -- single-sentence API -----------------------------------------------

    def encode(self, sentence: Sentence) -> EncoderOutput:
        src, keep, _ = self._source_batch([sentence])
        memory = self._encode(src, keep)[0]
        return EncoderOutput(states=memory[1 : sentence.n + 1], memory=memory, token_ids=src[0, 1 : sentence.n + 1])

    def decode_all(self, enc: EncoderOutput, prefix: Sequence[int]) -> Tensor:
        """Decoder states for ``<s>`` and every prefix position, shape (len(prefix) + 1, d)."""
        tokens = [self.vocab.ids[BOS]] + self.index_tokens(prefix, enc.token_ids.tolist(), enc.n)
        dec_in = torch.tensor([tokens], dtype=torch.long)
        keep = torch.ones(1, enc.memory.shape[0], dtype=torch.bool)
        return self._decode(enc.memory[None], keep, dec_in)[0]

    def decode_step(self, enc: EncoderOutput, prefix: Sequence[int]) -> Tensor:
        """Last decoder hidden state after reading ``prefix``, shape (d,)."""
        return self.decode_all(enc, prefix)[-1]

    def source_embeddings(self, enc: EncoderOutput) -> Tensor:
        return self.embed(enc.token_ids)

    def mlp_states(self, enc: EncoderOutput) -> Tensor:
        return self.head_mlp(enc.states)

    def pointer_states(self, enc: EncoderOutput) -> Tensor:
        return self._pointer_states(enc.states, enc.token_ids)

    def logits(self, enc: EncoderOutput, hidden: Tensor) -> Tensor:
        """Scores over the ``n + l`` indexes for one or more decoder states."""
        hidden = hidden.reshape(1, -1, self.config.d)
        lengths = torch.tensor([enc.n])
        return self._scores(self.pointer_states(enc)[None], hidden, lengths)[0]

    def predict_distribution(self, enc: EncoderOutput, hidden: Tensor) -> StepDistribution:
        return StepDistribution(self.logits(enc, hidden).reshape(-1).softmax(-1))

    def step_log_probs(self, enc: EncoderOutput, prefixes: Sequence[Sequence[int]]) -> Tensor:
        """Next-index log-probabilities, one row per prefix (all prefixes equally long)."""
        src_ids = enc.token_ids.tolist()
        bos = self.vocab.ids[BOS]
        dec_in = torch.tensor([[bos] + self.index_tokens(p, src_ids, enc.n) for p in prefixes], dtype=torch.long)
        keep = torch.ones(len(prefixes), enc.memory.shape[0], dtype=torch.bool)
        memory = enc.memory[None].expand(len(prefixes), -1, -1)
        hidden = self._decode(memory, keep, dec_in)[:, -1]
        return self.logits(enc, hidden).log_softmax(-1)


def nll_loss(model: PointerSeq2Seq, batch, weights: Sequence[float] = None) -> Tensor:
    """Mean over the batch of the summed negative log-likelihood of each gold sequence.

    ``batch`` is a sequence of ``(sentence, target)`` pairs; targets are index
    lists or :class:`TargetSequence` objects.
    """
    if not batch:
        raise ValueError("empty batch")
    sentences = [s for s, _ in batch]
    targets = [tuple(t) for _, t in batch]
    logits, gold, mask = model.teacher_forced_logits(sentences, targets)
    token_nll = -logits.log_softmax(-1).gather(-1, gold[..., None])[..., 0] * mask
    seq_nll = token_nll.sum(1)
    if weights is not None:
        seq_nll = seq_nll * torch.tensor(weights, dtype=seq_nll.dtype)
    return seq_nll.mean()
