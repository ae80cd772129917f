import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from core.datasets.batching import augment, batches
from core.datasets.dataset import LabeledDataset
from core.errors import TrainingDivergedError
from core.network.graph import NetworkGraph
from core.network.loss import cross_entropy_loss
from core.training.checkpoint import save_checkpoint
from core.training.metrics import EvalMetrics, MetricAccumulator
from core.training.optim import MomentumSGD
from core.utils.config import RunConfig, format_value
from core.utils.logging import log_event

logger = logging.getLogger("lifb")

EVAL_BATCH = 256


@dataclass
class EpochRecord:
    """One row of the metric history."""
    epoch: int
    split: str
    loss: float
    accuracy: float
    lr: float
    firing: Dict[str, Dict[str, float]] = field(default_factory=dict)
    kappa: Dict[str, List[float]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainResult:
    net: NetworkGraph
    history: List[EpochRecord]
    best_epoch: int
    best_accuracy: float
    optimizer: MomentumSGD


def evaluate(net: NetworkGraph, dataset: LabeledDataset, steps: Optional[int] = None, batch_size: int = EVAL_BATCH) -> EvalMetrics:
    """
    Accuracy, loss and firing statistics in evaluation mode.

    Leaves the network exactly as it found it (mode, parameters and running
    statistics), so repeated calls agree.
    """
    was_training = net.training
    net.eval()
    accumulator = MetricAccumulator(net)
    try:
        for images, labels in batches(dataset, batch_size, shuffle=False):
            forward_pass = net.forward(images, keep_context=False, steps=steps)
            loss, _ = cross_entropy_loss(forward_pass.logits, labels)
            accumulator.add(forward_pass, labels, loss)
    finally:
        net.training = was_training
    return accumulator.result(net)


def _kappa_snapshot(net: NetworkGraph) -> Dict[str, List[float]]:
    return {
        layer.name: layer.kappa.value.reshape(-1).tolist() for layer in net.spiking_layers() if layer.kappa is not None
    }


def _check_finite(net: NetworkGraph, loss: float, epoch: int, batch: int):
    if not np.isfinite(loss):
        raise TrainingDivergedError(f"loss became {loss} at epoch {epoch}, batch {batch}; lower train.lr")
    for name, pair in net.parameters().items():
        if not np.all(np.isfinite(pair.grad)):
            raise TrainingDivergedError(f"non-finite gradient in {name} at epoch {epoch}, batch {batch}")


def train(
    net: NetworkGraph,
    dataset: LabeledDataset,
    config: RunConfig,
    val_set: Optional[LabeledDataset] = None,
    out_dir: Optional[str] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainResult:
    """
    Mini-batch training with momentum SGD and BPTT.

    Every epoch is evaluated on `val_set` (the training set when absent). The
    network at the best validation accuracy is written to `best.ckpt` and the
    final one to `last.ckpt` when `out_dir` is given.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    settings = config.train
    optimizer = MomentumSGD(
        net.parameters(),
        lr=settings.lr,
        kappa_lr=config.kappa_lr,
        momentum=settings.momentum,
        kappa_momentum=settings.kappa_momentum,
        weight_decay=settings.weight_decay,
    )
    rng = np.random.default_rng([settings.seed, 1])
    snapshot = {key: format_value(value) for key, value in config.flat().items()}
    history: List[EpochRecord] = []
    best_epoch, best_accuracy = -1, -1.0
    val_set = val_set if val_set is not None else dataset

    for epoch in range(settings.epochs):
        optimizer.schedule(epoch, settings.epochs)
        net.train()
        accumulator = MetricAccumulator(net)
        for index, (images, labels) in enumerate(batches(dataset, settings.batch_size, settings.seed, True, epoch)):
            images = augment(images, rng, config.data.crop_padding, config.data.flip)
            optimizer.zero_grad()
            forward_pass = net.forward(images, keep_context=True)
            loss, grad_logits = cross_entropy_loss(forward_pass.logits, labels)
            net.backward(forward_pass, grad_logits)
            _check_finite(net, loss, epoch, index)
            optimizer.step()
            accumulator.add(forward_pass, labels, loss)
        net.eval()

        train_record = EpochRecord(
            epoch=epoch,
            split="train",
            loss=accumulator.loss,
            accuracy=accumulator.accuracy,
            lr=optimizer.state.lr,
            firing={name: counts.fractions() for name, counts in accumulator.counts.items()},
            kappa=_kappa_snapshot(net),
        )
        metrics = evaluate(net, val_set)
        val_record = EpochRecord(
            epoch=epoch,
            split=val_set.split if val_set is not dataset else "train-eval",
            loss=metrics.loss,
            accuracy=metrics.accuracy,
            lr=optimizer.state.lr,
            firing=metrics.firing,
            kappa=train_record.kappa,
        )
        history.extend([train_record, val_record])
        logger.info(
            f"epoch {epoch + 1}/{settings.epochs} | train loss {train_record.loss:.4f} acc {train_record.accuracy:.4f} "
            f"| {val_record.split} loss {val_record.loss:.4f} acc {val_record.accuracy:.4f}"
        )
        kappa_means = {name: round(float(np.mean(values)), 6) for name, values in train_record.kappa.items()}
        log_event(
            f"epoch={epoch} train_loss={train_record.loss!r} train_acc={train_record.accuracy!r} "
            f"{val_record.split}_loss={val_record.loss!r} {val_record.split}_acc={val_record.accuracy!r} kappa={kappa_means}"
        )
        if on_epoch is not None:
            on_epoch(val_record)

        if metrics.accuracy > best_accuracy:
            best_epoch, best_accuracy = epoch, metrics.accuracy
            if out_dir:
                save_checkpoint(
                    os.path.join(out_dir, "best.ckpt"),
                    net,
                    optimizer,
                    snapshot,
                    epoch,
                    [record.to_dict() for record in history],
                    rng,
                )

    if out_dir:
        save_checkpoint(
            os.path.join(out_dir, "last.ckpt"),
            net,
            optimizer,
            snapshot,
            settings.epochs,
            [record.to_dict() for record in history],
            rng,
        )
    return TrainResult(net=net, history=history, best_epoch=best_epoch, best_accuracy=best_accuracy, optimizer=optimizer)


METRICS_HEADER = ("epoch", "split", "loss", "accuracy", "lr", "layer", "rest", "regular", "burst", "kappa")


def metric_rows(history: List[EpochRecord]) -> List[list]:
    """
    Long-form metric rows: one per (epoch, split, spiking layer), with the
    layer's kappa vector space-separated (empty for layers without one).
    """
    rows = []
    for record in history:
        layers = list(record.firing) or [""]
        for layer in layers:
            fractions = record.firing.get(layer, {"rest": "", "regular": "", "burst": ""})
            kappa = " ".join(repr(value) for value in record.kappa.get(layer, []))
            rows.append(
                [
                    record.epoch,
                    record.split,
                    repr(record.loss),
                    repr(record.accuracy),
                    repr(record.lr),
                    layer,
                    fractions["rest"] if fractions["rest"] == "" else repr(fractions["rest"]),
                    fractions["regular"] if fractions["regular"] == "" else repr(fractions["regular"]),
                    fractions["burst"] if fractions["burst"] == "" else repr(fractions["burst"]),
                    kappa,
                ]
            )
    return rows
