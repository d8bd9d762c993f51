from __future__ import annotations

import copy
import random

import torch

from .network import PointerSeq2Seq, nll_loss


def gradient_check(
    model: PointerSeq2Seq,
    batch,
    num_samples: int = 60,
    eps: float = 1e-4,
    seed: int = 0,
    floor: float = 1e-6,
) -> float:
    """Largest relative gap between autograd and central-difference gradients.

    Runs on a float64 copy with dropout disabled. ``num_samples`` parameter
    entries are drawn uniformly (seeded); the error of one entry is
    ``|a - f| / max(|a|, |f|, floor)``, the floor keeping vanishing gradients
    from turning rounding noise into huge ratios.
    """
    if num_samples <= 0:
        return 0.0
    probe = copy.deepcopy(model).double()
    probe.eval()
    params = [(name, p) for name, p in probe.named_parameters()]
    probe.zero_grad()
    nll_loss(probe, batch).backward()

    rng = random.Random(seed)
    sizes = [p.numel() for _, p in params]
    total = sum(sizes)
    worst = 0.0
    for _ in range(num_samples):
        flat = rng.randrange(total)
        for (name, p), size in zip(params, sizes):
            if flat < size:
                break
            flat -= size
        analytic = float(p.grad.reshape(-1)[flat])
        with torch.no_grad():
            view = p.data.reshape(-1)
            orig = float(view[flat])
            view[flat] = orig + eps
            up = float(nll_loss(probe, batch))
            view[flat] = orig - eps
            down = float(nll_loss(probe, batch))
            view[flat] = orig
        numeric = (up - down) / (2 * eps)
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
        worst = max(worst, err)
    return worst
