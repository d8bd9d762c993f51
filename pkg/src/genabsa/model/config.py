from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Dict, Iterable, List, Sequence

PAD, UNK, BOS, EOS_SRC = "<pad>", "<unk>", "<s>", "</s>"
SPECIALS = (PAD, UNK, BOS, EOS_SRC)


@dataclass(frozen=True)
class ModelConfig:
    d: int = 64
    layers_enc: int = 2
    layers_dec: int = 2
    heads: int = 4
    ffn_dim: int = 256
    vocab_size: int = 0
    l: int = 4  # noqa: E741
    alpha: float = 0.5
    dropout: float = 0.1
    seed: int = 0
    max_positions: int = 256
    # divide pointer/class scores by sqrt(d); off by default
    scale_scores: bool = False

    def __post_init__(self):
        if self.d <= 0 or self.heads <= 0 or self.d % self.heads:
            raise ValueError(f"d={self.d} must be a positive multiple of heads={self.heads}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} must lie in [0, 1]")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout={self.dropout} must lie in [0, 1)")
        if min(self.layers_enc, self.layers_dec) < 0 or self.ffn_dim <= 0 or self.l < 1:
            raise ValueError("invalid layer, ffn or class-list size")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)


class Vocab:
    """Token table shared by the source side, decoder inputs and class tokens."""

    def __init__(self, tokens: Sequence[str]):
        self.tokens: List[str] = list(tokens)
        self.ids: Dict[str, int] = {t: i for i, t in enumerate(self.tokens)}
        if len(self.ids) != len(self.tokens):
            raise ValueError("duplicate vocabulary entries")
        for s in SPECIALS:
            if s not in self.ids:
                raise ValueError(f"vocabulary is missing {s}")

    @classmethod
    def build(cls, words: Iterable[str], class_tokens: Sequence[str]) -> "Vocab":
        reserved = set(SPECIALS) | set(class_tokens)
        rest = sorted({w for w in words if w not in reserved})
        return cls(list(SPECIALS) + list(class_tokens) + rest)

    def __len__(self) -> int:
        return len(self.tokens)

    def id(self, token: str) -> int:
        return self.ids.get(token, self.ids[UNK])

    def encode(self, tokens: Sequence[str]) -> List[int]:
        return [self.id(t) for t in tokens]
