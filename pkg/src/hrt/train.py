"""Training loop, per-epoch history, and the flat-binary checkpoint format."""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataFormatError
from .tensor import Tensor
from .rng import SeededRng
from .model import HrtModel, ModelConfig
from .semantics import SemanticSpace
from .losses import (LossConfig, attribute_regression_loss, calibration_loss,
                     cross_entropy, predict)
from .optim import OptimizerConfig, RmsPropState, optimizer_step

CHECKPOINT_MAGIC = b"HRTC"
HISTORY_HEADER = "epoch,L_ce,L_cal,L_reg,total,train_acc"


@dataclass
class EpochStats:
    epoch: int
    ce: float
    cal: float
    reg: float
    total: float
    train_acc: float

    def csv_row(self) -> str:
        return (f"{self.epoch},{self.ce!r},{self.cal!r},{self.reg!r},"
                f"{self.total!r},{self.train_acc!r}")


def _sample_loss(model: HrtModel, x: np.ndarray, label: int,
                 loss_config: LossConfig):
    result = model.forward(Tensor(x))
    s = result.scores
    l_ce = cross_entropy(s, label)
    gamma = loss_config.gamma_per_class
    if gamma is None:
        gamma = np.zeros(s.data.shape[0])
    l_cal = calibration_loss(s, label, gamma)
    l_reg = attribute_regression_loss(result.psi,
                                      model.semantics.class_attr[label])
    total = l_ce + loss_config.lambda1 * l_cal + loss_config.lambda2 * l_reg
    parts = (l_ce.item(), l_cal.item(), l_reg.item(), total.item())
    return total, parts, predict(s)


def train(dataset, model: HrtModel, loss_config: LossConfig,
          optimizer_config: OptimizerConfig, epochs: int, seed: int = 0,
          batch_size: int = 16) -> list[EpochStats]:
    """Train on the seen-class train split; deterministic for a fixed seed."""
    feats, labels = dataset.split_samples("train")
    n = feats.shape[0]
    if n == 0:
        raise ConfigError("training split is empty")
    if epochs < 0 or batch_size < 1:
        raise ConfigError("need epochs >= 0 and batch_size >= 1")
    rng = SeededRng(seed)
    state = RmsPropState(config=optimizer_config)
    history: list[EpochStats] = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        sums = np.zeros(4)
        correct = 0
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            model.zero_grad()
            for i in batch:
                total, parts, pred = _sample_loss(model, feats[i],
                                                  int(labels[i]), loss_config)
                total.backward()
                sums += parts
                correct += int(pred == labels[i])
            grads = {name: (p.grad if p.grad is not None
                            else np.zeros_like(p.data)) / batch.size
                     for name, p in model.params.items()}
            optimizer_step(state, model.params, grads)
        history.append(EpochStats(epoch=epoch,
                                  ce=float(sums[0] / n),
                                  cal=float(sums[1] / n),
                                  reg=float(sums[2] / n),
                                  total=float(sums[3] / n),
                                  train_acc=correct / n))
    return history


def write_history(history: list[EpochStats], path) -> None:
    lines = [HISTORY_HEADER] + [h.csv_row() for h in history]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- checkpoint format -------------------------------------------------------
#
# [4-byte magic "HRTC"][8-byte little-endian header length][UTF-8 JSON header]
# [float64 little-endian payload]
#
# The header declares tensor names/shapes in payload order, the model config,
# the init seed, and a hash of the resolved experiment config.


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(model: HrtModel, path, experiment_config: dict | None = None,
                    extra: dict | None = None) -> None:
    names = sorted(model.params)
    sem = model.semantics
    arrays = [("sem.attr_vectors", sem.attr_vectors),
              ("sem.compact_vectors", sem.compact_vectors),
              ("sem.class_attr", sem.class_attr)]
    arrays += [(n, model.params[n].data) for n in names]
    header = {
        "version": 1,
        "dtype": "f64",
        "endianness": "little",
        "seed": model.seed,
        "model_config": model.config_dict(),
        "config_hash": config_hash(experiment_config or {}),
        "tensors": [{"name": n, "shape": list(a.shape)} for n, a in arrays],
    }
    if extra:
        header["extra"] = extra
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_checkpoint(path) -> HrtModel:
    raw = Path(path).read_bytes()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise DataFormatError("not a model checkpoint (bad magic)")
    (hlen,) = struct.unpack("<Q", raw[4:12])
    try:
        header = json.loads(raw[12:12 + hlen].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise DataFormatError(f"corrupt checkpoint header: {e}") from e
    offset = 12 + hlen
    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + count * 8
        if end > len(raw):
            raise DataFormatError(
                f"checkpoint truncated in tensor {entry['name']!r}")
        tensors[entry["name"]] = np.frombuffer(raw[offset:end],
                                               dtype="<f8").reshape(shape)
        offset = end
    if offset != len(raw):
        raise DataFormatError(
            f"checkpoint has {len(raw) - offset} trailing bytes")

    config = ModelConfig(**header["model_config"])
    semantics = SemanticSpace(attr_vectors=tensors["sem.attr_vectors"],
                              compact_vectors=tensors["sem.compact_vectors"],
                              class_attr=tensors["sem.class_attr"])
    model = HrtModel(config, semantics, seed=header["seed"])
    for name, p in model.params.items():
        if name not in tensors:
            raise DataFormatError(f"checkpoint missing parameter {name!r}")
        if tensors[name].shape != p.data.shape:
            raise DataFormatError(
                f"parameter {name!r} has shape {tensors[name].shape}, "
                f"expected {p.data.shape}")
        p.data = tensors[name].copy()
    return model
