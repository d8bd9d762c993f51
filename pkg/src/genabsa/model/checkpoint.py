"""Binary checkpoint format.

Layout (all integers little-endian)::

    8 bytes   magic  b"GENABSA\\0"
    u32       format version
    u32       header length, followed by the UTF-8 JSON header
              {"config": ..., "vocab": [...], "classes": [...], "meta": {...}}
    u32       tensor count
    per tensor:
      u16 name length, UTF-8 name
      u8  rank, then rank x u32 shape
      float32 data, row-major
"""

from __future__ import annotations

import json
import struct
from typing import Optional, Tuple

import numpy as np
import torch

from ..core import ClassTokenList
from .config import ModelConfig, Vocab
from .network import PointerSeq2Seq

MAGIC = b"GENABSA\0"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(model: PointerSeq2Seq, path, meta: Optional[dict] = None) -> None:
    header = {
        "config": model.config.to_dict(),
        "vocab": model.vocab.tokens,
        "classes": list(model.classes.tokens),
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    params = list(model.named_parameters())
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(blob)))
        f.write(blob)
        f.write(struct.pack("<I", len(params)))
        for name, p in params:
            raw_name = name.encode("utf-8")
            arr = p.detach().cpu().numpy().astype("<f4")
            f.write(struct.pack("<H", len(raw_name)))
            f.write(raw_name)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.tobytes(order="C"))


def _read(f, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise CheckpointError("truncated checkpoint")
    return data


def load_checkpoint(path) -> Tuple[PointerSeq2Seq, dict]:
    """Rebuild the model stored at ``path``; returns ``(model, meta)``."""
    with open(path, "rb") as f:
        if _read(f, len(MAGIC)) != MAGIC:
            raise CheckpointError(f"{path} is not a checkpoint")
        version, hlen = struct.unpack("<II", _read(f, 8))
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        header = json.loads(_read(f, hlen).decode("utf-8"))
        (count,) = struct.unpack("<I", _read(f, 4))
        tensors = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", _read(f, 2))
            name = _read(f, nlen).decode("utf-8")
            (rank,) = struct.unpack("<B", _read(f, 1))
            shape = struct.unpack(f"<{rank}I", _read(f, 4 * rank))
            size = int(np.prod(shape)) if rank else 1
            arr = np.frombuffer(_read(f, 4 * size), dtype="<f4").reshape(shape)
            if name in tensors:
                raise CheckpointError(f"parameter {name} stored twice")
            tensors[name] = torch.from_numpy(arr.astype(np.float32))
    config = ModelConfig.from_dict(header["config"])
    model = PointerSeq2Seq(config, Vocab(header["vocab"]), ClassTokenList(tuple(header["classes"])))
    expected = dict(model.named_parameters())
    if set(expected) != set(tensors):
        missing, extra = set(expected) - set(tensors), set(tensors) - set(expected)
        raise CheckpointError(f"parameter mismatch (missing {sorted(missing)}, unexpected {sorted(extra)})")
    with torch.no_grad():
        for name, p in expected.items():
            if tuple(p.shape) != tuple(tensors[name].shape):
                raise CheckpointError(f"shape mismatch for {name}")
            p.copy_(tensors[name])
    model.eval()
    return model, header.get("meta", {})
