"""Training loop (full-batch or mini-batch), evaluation, and metrics records.

One call to :func:`train` owns the whole run: Adam steps, early stopping on
validation loss with a fixed patience, restoring the best checkpoint, and a
final test-set evaluation.  Metrics serialize to JSON lines with one record
per epoch plus a summary record; wall-clock time stays on the in-memory
object only, so the file is a pure function of (data, config, seeds).
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import layers as ly
from . import models as md
from .autodiff import Tensor
from .errors import NumericalError
from .layers import GraphOperator


@dataclass
class TrainConfig:
    lr: float = 0.01
    weight_decay: float = 0.0
    dropout: float = 0.0
    epochs: int = 500
    patience: int = 10
    seed: int = 0
    dim: int = 16
    batch_size: int = None  # None = full batch

    def validate(self):
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.lr < 0.0:
            raise ValueError("learning rate must be non-negative")
        if self.epochs < 1:
            raise ValueError("epoch cap must be at least 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch size must be positive when set")


@dataclass
class PreparedData:
    """Model-ready inputs: features already mapped into the model's space."""

    x: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray
    op: GraphOperator = None


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class Metrics:
    records: list = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = float("inf")
    test_accuracy: float = float("nan")
    stopped_early: bool = False
    wall_clock_seconds: float = 0.0

    def to_jsonl(self) -> str:
        lines = []
        for r in self.records:
            lines.append(json.dumps({
                "epoch": r.epoch,
                "train_loss": r.train_loss,
                "train_acc": r.train_acc,
                "val_loss": r.val_loss,
                "val_acc": r.val_acc,
            }, sort_keys=True))
        lines.append(json.dumps({
            "summary": True,
            "epochs_run": len(self.records),
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "stopped_early": self.stopped_early,
            "test_accuracy": self.test_accuracy,
        }, sort_keys=True))
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


def prepare(ds, spec: md.ModelSpec) -> PreparedData:
    """Featurize a node-classification dataset for the given model kind."""
    if ds.train_mask is None or ds.val_mask is None or ds.test_mask is None:
        raise ValueError("dataset has no split masks; split it first")
    if spec.kind == "hypgcn":
        x = md.featurize(ds.features, spec.c)
    else:
        x = md.standardize(ds.features)
    return PreparedData(x, ds.labels, ds.train_mask, ds.val_mask, ds.test_mask,
                        GraphOperator(ds.graph))


def _snapshot(params):
    return [p.value.data.copy() for p in params]


def _restore(params, saved):
    for p, s in zip(params, saved):
        p.value.data[...] = s


def _eval_logits(model, data: PreparedData, idx: np.ndarray) -> np.ndarray:
    model.set_training(False)
    if data.op is None:
        return model.forward(Tensor(data.x[idx]), None).data
    return model.forward(Tensor(data.x), data.op).data[idx]


def evaluate(model, data: PreparedData, mask) -> float:
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("evaluation mask selects no examples")
    idx = np.flatnonzero(mask)
    logits = _eval_logits(model, data, idx)
    return ly.accuracy(logits, data.labels[idx])


def _loss_value(logits: np.ndarray, labels: np.ndarray) -> float:
    return float(ly.cross_entropy(Tensor(logits), labels).data)


def train(model, data: PreparedData, cfg: TrainConfig) -> Metrics:
    """Run the optimization; returns metrics with the best checkpoint restored."""
    cfg.validate()
    idx_train = np.flatnonzero(data.train_mask)
    idx_val = np.flatnonzero(data.val_mask)
    if idx_train.size == 0 or idx_val.size == 0:
        raise ValueError("training requires non-empty train and val masks")
    params = model.params()
    batch_rng = np.random.default_rng(cfg.seed)
    x_full = Tensor(data.x)
    metrics = Metrics()
    best_state = _snapshot(params)
    bad = 0
    t0 = time.perf_counter()

    for epoch in range(cfg.epochs):
        model.set_training(True)
        if cfg.batch_size is None:
            with ad.Tape() as tape:
                logits = model.forward(x_full, data.op)
                loss = ly.cross_entropy(ad.gather_rows(logits, idx_train),
                                        data.labels[idx_train])
                if not np.isfinite(loss.data).all():
                    raise NumericalError("training loss is not finite at epoch %d" % epoch)
                tape.backward(loss)
            ad.adam_step(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
            train_loss = float(loss.data)
            train_acc = ly.accuracy(logits.data[idx_train], data.labels[idx_train])
        else:
            perm = batch_rng.permutation(idx_train)
            seen = correct = 0
            total_loss = 0.0
            for lo in range(0, perm.size, cfg.batch_size):
                chunk = perm[lo:lo + cfg.batch_size]
                with ad.Tape() as tape:
                    logits = model.forward(Tensor(data.x[chunk]), data.op)
                    loss = ly.cross_entropy(logits, data.labels[chunk])
                    if not np.isfinite(loss.data).all():
                        raise NumericalError("training loss is not finite at epoch %d" % epoch)
                    tape.backward(loss)
                ad.adam_step(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
                total_loss += float(loss.data) * chunk.size
                correct += ly.accuracy(logits.data, data.labels[chunk]) * chunk.size
                seen += chunk.size
            train_loss = total_loss / seen
            train_acc = correct / seen

        val_logits = _eval_logits(model, data, idx_val)
        val_loss = _loss_value(val_logits, data.labels[idx_val])
        if not np.isfinite(val_loss):
            raise NumericalError("validation loss is not finite at epoch %d" % epoch)
        val_acc = ly.accuracy(val_logits, data.labels[idx_val])
        metrics.records.append(EpochRecord(epoch, train_loss, train_acc, val_loss, val_acc))

        if val_loss < metrics.best_val_loss:
            metrics.best_val_loss = val_loss
            metrics.best_epoch = epoch
            best_state = _snapshot(params)
            bad = 0
        else:
            bad += 1
            if bad >= cfg.patience:
                metrics.stopped_early = True
                break

    _restore(params, best_state)
    if np.asarray(data.test_mask, dtype=bool).any():
        metrics.test_accuracy = evaluate(model, data, data.test_mask)
    metrics.wall_clock_seconds = time.perf_counter() - t0
    return metrics
