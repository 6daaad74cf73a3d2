"""Seeded SGD training: autoencoder pretraining of the conv stack, then
transfer to a classifier head on the labeled shapes.

Everything is single-order and deterministic: one master generator drawn
from the seed initializes weights and then deals the per-epoch shuffles,
so identical inputs give identical weight trajectories.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import layers as L
from .datasets import ShapeDataset
from .errors import DomainError, ShapeError
from .network import NetworkSpec, default_architecture, forward_traced

BATCH_SIZE = 8


@dataclass
class TrainReport:
    """Per-epoch training losses plus the final held-out accuracy (None for
    unsupervised runs)."""

    losses: list[float]
    accuracy: Optional[float]
    epochs: int
    lr: float

    def __post_init__(self):
        if not np.isfinite(self.losses).all():
            raise DomainError("training produced a non-finite loss")
        if self.accuracy is not None and not 0.0 <= self.accuracy <= 1.0:
            raise DomainError(f"accuracy {self.accuracy} outside [0, 1]")


def write_report_csv(report: TrainReport, path) -> None:
    lines = ["epoch,loss,accuracy"]
    for i, loss in enumerate(report.losses):
        acc = ""
        if report.accuracy is not None and i == len(report.losses) - 1:
            acc = f"{report.accuracy:.6f}"
        lines.append(f"{i},{loss:.9g},{acc}")
    if not report.losses and report.accuracy is not None:
        lines.append(f",,{report.accuracy:.6f}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def glorot_limit(layer: L.LayerSpec) -> float:
    if layer.kind == "conv3d":
        receptive = int(np.prod(layer.kernel))
        fan_in, fan_out = layer.in_channels * receptive, layer.out_channels * receptive
    elif layer.kind == "dense":
        fan_in, fan_out = layer.in_features, layer.out_features
    else:
        raise DomainError(f"layer kind {layer.kind!r} has no weights to initialize")
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_weights(layers, rng: np.random.Generator) -> dict[str, L.LayerWeights]:
    """Uniform(-limit, limit) weights with limit = sqrt(6/(fan_in+fan_out)),
    zero biases, drawn in layer order."""
    weights = {}
    for ly in layers:
        if not L.has_params(ly):
            continue
        limit = glorot_limit(ly)
        if ly.kind == "conv3d":
            shape = (ly.out_channels, ly.in_channels) + tuple(ly.kernel)
            bias = np.zeros(ly.out_channels)
        else:
            shape = (ly.out_features, ly.in_features)
            bias = np.zeros(ly.out_features)
        weights[ly.name] = L.LayerWeights(rng.uniform(-limit, limit, size=shape), bias)
    return weights


def init_network(layers, input_dims, seed: int) -> NetworkSpec:
    rng = np.random.default_rng(seed)
    return NetworkSpec(list(layers), init_weights(layers, rng), input_dims)


def encoder_layers(resolution: int) -> list[L.LayerSpec]:
    """The conv stack of the default architecture (through the second pool)."""
    return default_architecture(resolution)[0][:6]


def autoencoder_layers(resolution: int) -> list[L.LayerSpec]:
    """Encoder plus a nearest-neighbor-upsampling decoder back to input dims."""
    return encoder_layers(resolution) + [
        L.Upsample3d("up1", 2),
        L.Conv3d("dconv1", 16, 8, (3, 3, 3), padding="same"),
        L.Relu("drelu1"),
        L.Upsample3d("up2", 2),
        L.Conv3d("dconv2", 8, 1, (3, 3, 3), padding="same"),
    ]


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    diff = pred - target
    return float(np.mean(diff * diff)), (2.0 / diff.size) * diff


def softmax_cross_entropy(scores: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    shifted = scores - scores.max()
    log_z = np.log(np.exp(shifted).sum())
    loss = float(log_z - shifted[label])
    grad = np.exp(shifted - log_z)
    grad[label] -= 1.0
    return loss, grad


def loss_gradients(net: NetworkSpec, x, loss_fn) -> tuple[float, dict]:
    """One forward/backward pass; returns (loss, per-layer param grads)."""
    out, trace = forward_traced(net, x)
    loss, cot = loss_fn(out)
    grads = {}
    for i in range(len(net.layers) - 1, -1, -1):
        ly = net.layers[i]
        if L.has_params(ly):
            grads[ly.name] = L.layer_param_grads(ly, trace.inputs[i], cot)
        if i > 0:
            cot = L.layer_vjp(ly, trace.inputs[i], cot, net.weights.get(ly.name))
    net.counters.backward += 1
    return loss, grads


def sgd_epoch(net, inputs, loss_fns, lr, order, frozen=frozenset()) -> float:
    """One pass over `inputs` in the given order, batched mean-gradient steps.
    Returns the mean per-sample loss observed during the pass."""
    total = 0.0
    for start in range(0, len(order), BATCH_SIZE):
        batch = order[start : start + BATCH_SIZE]
        acc: dict[str, list] = {}
        for idx in batch:
            loss, grads = loss_gradients(net, inputs[idx], loss_fns[idx])
            total += loss
            for name, (dw, db) in grads.items():
                if name in acc:
                    acc[name][0] += dw
                    acc[name][1] += db
                else:
                    acc[name] = [dw.copy(), db.copy()]
        scale = lr / len(batch)
        for name, (dw, db) in acc.items():
            if name in frozen:
                continue
            net.weights[name].weight -= scale * dw
            net.weights[name].bias -= scale * db
    return total / len(order)


def pretrain_autoencoder(
    dataset: ShapeDataset, epochs: int = 50, lr: float = 0.1, seed: int = 0
) -> tuple[NetworkSpec, TrainReport]:
    """Train a reconstruction autoencoder on the grids; return the trained
    conv stack (decoder discarded) and the loss history."""
    if len(dataset) == 0:
        raise DomainError("cannot pretrain on an empty dataset")
    if epochs < 1:
        raise DomainError("pretraining needs at least one epoch")
    res = dataset.resolution
    rng = np.random.default_rng(seed)
    net = NetworkSpec(
        autoencoder_layers(res), init_weights(autoencoder_layers(res), rng), (1, res, res, res)
    )
    inputs = [g.values[None] for g in dataset.grids]
    loss_fns = [lambda pred, x=x: mse_loss(pred, x) for x in inputs]
    losses = [
        sgd_epoch(net, inputs, loss_fns, lr, rng.permutation(len(inputs)))
        for _ in range(epochs)
    ]
    enc_layers = encoder_layers(res)
    enc_weights = {
        ly.name: copy.deepcopy(net.weights[ly.name]) for ly in enc_layers if L.has_params(ly)
    }
    encoder = NetworkSpec(enc_layers, enc_weights, (1, res, res, res))
    return encoder, TrainReport(losses, None, epochs, lr)


def classifier_from_encoder(encoder: NetworkSpec, classes: int, rng) -> NetworkSpec:
    """Encoder copy plus a fresh flatten + two-layer dense head."""
    feat = int(np.prod(encoder.layer_shapes()[-1]))
    head = [
        L.Flatten("flatten"),
        L.Dense("fc1", feat, 64),
        L.Relu("relu3"),
        L.Dense("fc2", 64, classes),
    ]
    weights = {name: copy.deepcopy(w) for name, w in encoder.weights.items()}
    weights.update(init_weights(head, rng))
    return NetworkSpec(list(encoder.layers) + head, weights, encoder.input_dims)


def train_classifier(
    encoder: NetworkSpec,
    dataset: ShapeDataset,
    epochs: int = 50,
    lr: float = 0.1,
    seed: int = 0,
    freeze_encoder: bool = False,
) -> tuple[NetworkSpec, TrainReport]:
    """Fine-tune a classifier on top of the (copied) encoder.

    The last quarter of the dataset is held out for the accuracy report;
    round-robin labels keep that split balanced."""
    if len(dataset) == 0:
        raise DomainError("cannot train on an empty dataset")
    res = dataset.resolution
    if encoder.input_dims != (1, res, res, res):
        raise ShapeError(
            f"encoder expects input {encoder.input_dims}, dataset grids are {res}^3"
        )
    rng = np.random.default_rng(seed)
    net = classifier_from_encoder(encoder, len(dataset.class_names), rng)

    n_hold = len(dataset) // 4
    n_train = len(dataset) - n_hold
    inputs = [g.values[None] for g in dataset.grids]
    loss_fns = [
        lambda scores, label=int(label): softmax_cross_entropy(scores, label)
        for label in dataset.labels
    ]
    frozen = frozenset(name for name in encoder.weights) if freeze_encoder else frozenset()

    losses = [
        sgd_epoch(net, inputs, loss_fns, lr, rng.permutation(n_train), frozen=frozen)
        for _ in range(epochs)
    ]

    correct = 0
    for i in range(n_train, len(dataset)):
        scores, _ = forward_traced(net, inputs[i])
        correct += int(np.argmax(scores)) == dataset.labels[i]
    accuracy = correct / n_hold if n_hold else None
    return net, TrainReport(losses, accuracy, epochs, lr)
