"""Flat JSON run configuration with ``--key value`` command-line overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Sequence

from .core import ClassTokenList, Subtask
from .model import ModelConfig, OptimizerConfig

MULTI = "multi"


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (exit code 2)."""


@dataclass
class RunConfig:
    subtask: str = "Triplet"
    # multitask mode only: subtasks trained jointly behind task tags, and their loss weights
    tags: List[str] = field(default_factory=lambda: ["AESC", "OE"])
    task_weights: List[float] = field(default_factory=lambda: [1.0, 1.0])
    train: Optional[str] = None
    dev: Optional[str] = None
    test: Optional[str] = None
    out_dir: str = "runs/default"
    seed: int = 0
    d: int = 64
    layers_enc: int = 2
    layers_dec: int = 2
    heads: int = 4
    ffn_dim: int = 256
    alpha: float = 0.5
    dropout: float = 0.1
    scale_scores: bool = False
    max_positions: int = 256
    lr: float = 1e-3
    warmup_steps: int = 10
    epochs: int = 100
    batch_size: int = 8
    grad_clip: float = 1.0
    beam: int = 1
    max_len: int = 64
    tokenizer: str = "whitespace"
    bpe_merges: int = 0
    lowercase: bool = False

    @property
    def multitask(self) -> bool:
        return self.subtask == MULTI

    @property
    def tasks(self) -> List[Subtask]:
        if self.multitask:
            return [Subtask.parse(t) for t in self.tags]
        return [Subtask.parse(self.subtask)]

    def classes(self) -> ClassTokenList:
        return ClassTokenList.with_tags(self.tasks) if self.multitask else ClassTokenList()

    def model_config(self, vocab_size: int = 0) -> ModelConfig:
        return ModelConfig(
            d=self.d, layers_enc=self.layers_enc, layers_dec=self.layers_dec, heads=self.heads,
            ffn_dim=self.ffn_dim, vocab_size=vocab_size, l=self.classes().l, alpha=self.alpha,
            dropout=self.dropout, seed=self.seed, max_positions=self.max_positions,
            scale_scores=self.scale_scores,
        )

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            lr=self.lr, warmup_steps=self.warmup_steps, epochs=self.epochs,
            batch_size=self.batch_size, grad_clip=self.grad_clip, seed=self.seed,
        )

    def validate(self, require_train: bool = True) -> "RunConfig":
        try:
            tasks = self.tasks
            if self.multitask:
                if any(t.needs_aspect for t in tasks) or len(set(tasks)) != len(tasks) or not tasks:
                    raise ConfigError("multitask tags must be distinct subtasks without a given aspect")
                if len(self.task_weights) != len(tasks):
                    raise ConfigError("task_weights needs one weight per tag")
            self.model_config()
            self.optimizer_config()
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.tokenizer not in ("whitespace", "bpe"):
            raise ConfigError(f"unknown tokenizer {self.tokenizer!r}")
        if self.beam < 1 or self.max_len < 1:
            raise ConfigError("beam and max_len must be >= 1")
        if require_train and not self.train:
            raise ConfigError("no training set given")
        for name in ("train", "dev", "test"):
            path = getattr(self, name)
            if path and not Path(path).is_file():
                raise ConfigError(f"{name} dataset {path} does not exist")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**d)

    @classmethod
    def load(cls, path, overrides: Sequence[str] = ()) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
        except FileNotFoundError:
            raise ConfigError(f"config file {path} does not exist") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON ({e.msg})") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold one JSON object")
        cfg = cls.from_dict(data)
        apply_overrides(cfg, overrides)
        return cfg


def _coerce(name: str, value: str, like):
    if isinstance(like, bool):
        if value.lower() in ("1", "true", "yes"):
            return True
        if value.lower() in ("0", "false", "no"):
            return False
        raise ConfigError(f"--{name} expects true/false")
    try:
        if isinstance(like, int):
            return int(value)
        if isinstance(like, float):
            return float(value)
        if isinstance(like, list):
            items = [v for v in value.split(",") if v]
            return [float(v) for v in items] if like and isinstance(like[0], float) else items
    except ValueError:
        raise ConfigError(f"--{name}: cannot parse {value!r}") from None
    return value


def apply_overrides(cfg: RunConfig, overrides: Sequence[str]) -> None:
    """Apply ``["--key", "value", ...]`` pairs (``--max-len`` and ``--max_len`` both work)."""
    args = list(overrides)
    if len(args) % 2:
        raise ConfigError(f"overrides must come as --key value pairs, got {args}")
    defaults = RunConfig()
    for flag, value in zip(args[::2], args[1::2]):
        if not flag.startswith("--"):
            raise ConfigError(f"expected --key, got {flag!r}")
        name = flag[2:].replace("-", "_")
        if not hasattr(defaults, name):
            raise ConfigError(f"unknown option {flag}")
        setattr(cfg, name, _coerce(name, value, getattr(defaults, name)))
