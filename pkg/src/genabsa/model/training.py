from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field
from typing import List, Sequence, Tuple

import torch

from ..core import Sentence
from .network import PointerSeq2Seq, nll_loss

Example = Tuple[Sentence, Sequence[int]]


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    lr: float = 1e-3
    warmup_steps: int = 10
    epochs: int = 100
    batch_size: int = 8
    grad_clip: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0 or self.batch_size < 1 or self.epochs < 0 or self.warmup_steps < 0:
            raise ValueError(f"invalid optimizer settings: {self}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    model: PointerSeq2Seq
    losses: List[float] = field(default_factory=list)  # one entry per optimizer step
    epoch_losses: List[float] = field(default_factory=list)  # mean step loss of each epoch
    lrs: List[float] = field(default_factory=list)


def triangular(step: int, warmup: int, total: int) -> float:
    """Learning-rate multiplier: linear ramp over ``warmup`` steps, then linear decay to 0 at ``total``."""
    if step < warmup:
        return (step + 1) / warmup
    if total <= warmup:
        return 1.0
    return max(0.0, (total - step) / (total - warmup))


def train(
    model: PointerSeq2Seq,
    examples: Sequence[Example],
    opt: OptimizerConfig = OptimizerConfig(),
    weights: Sequence[float] = None,
    log_every: int = 0,
) -> TrainResult:
    """Teacher-forced NLL training; deterministic for a fixed ``opt.seed``.

    ``weights`` optionally scales each example's loss (multitask weighting).
    """
    if not examples:
        raise ValueError("cannot train on an empty dataset")
    if weights is not None and len(weights) != len(examples):
        raise ValueError("one weight per example expected")
    torch.manual_seed(opt.seed)
    order_rng = random.Random(opt.seed)
    steps_per_epoch = math.ceil(len(examples) / opt.batch_size)
    total = steps_per_epoch * opt.epochs
    optim = torch.optim.Adam(model.parameters(), lr=opt.lr)
    sched = torch.optim.lr_scheduler.LambdaLR(optim, lambda s: triangular(s, opt.warmup_steps, total))
    result = TrainResult(model)
    model.train()
    step = 0
    for epoch in range(opt.epochs):
        order = list(range(len(examples)))
        order_rng.shuffle(order)
        epoch_total = 0.0
        for b in range(0, len(order), opt.batch_size):
            idx = order[b : b + opt.batch_size]
            batch = [examples[i] for i in idx]
            w = [weights[i] for i in idx] if weights is not None else None
            loss = nll_loss(model, batch, w)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDiverged(f"loss became {value} at step {step} (epoch {epoch})")
            optim.zero_grad()
            loss.backward()
            if opt.grad_clip > 0:
                torch.nn.utils.clip_grad_norm_(model.parameters(), opt.grad_clip)
            result.lrs.append(optim.param_groups[0]["lr"])
            optim.step()
            sched.step()
            result.losses.append(value)
            epoch_total += value
            step += 1
        result.epoch_losses.append(epoch_total / steps_per_epoch)
        if log_every and (epoch + 1) % log_every == 0:
            print(f"epoch {epoch + 1:4d}  loss {result.epoch_losses[-1]:.4f}")
    model.eval()
    return result
