"""Shared helpers for the demo scripts.

Every demo that needs a trained classifier calls load_or_train(), which
caches the model under demos/out/ so the training cost is paid once no
matter which demo runs first.
"""

from pathlib import Path

import numpy as np

from voxelxai import (
    NetworkSpec,
    ShapeDataset,
    generate_shape_dataset,
    load_ncf,
    pretrain_autoencoder,
    save_ncf,
    train_classifier,
)

OUT_DIR = Path(__file__).resolve().parent / "out"

RESOLUTION = 16
N_SAMPLES = 64
PRETRAIN_EPOCHS = 10
TRAIN_EPOCHS = 40
SEED = 0


def load_or_train(verbose: bool = True) -> NetworkSpec:
    """Return the demo classifier, training and caching it on first use."""
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    model_path = OUT_DIR / "model.ncf"
    if model_path.exists():
        if verbose:
            print(f"loading cached model from {model_path}")
        return load_ncf(model_path.read_bytes())

    if verbose:
        print(f"no cached model; training one ({N_SAMPLES} parts at "
              f"{RESOLUTION}^3, {PRETRAIN_EPOCHS}+{TRAIN_EPOCHS} epochs)")
    dataset = generate_shape_dataset(N_SAMPLES, RESOLUTION, seed=SEED)
    encoder, _ = pretrain_autoencoder(dataset, epochs=PRETRAIN_EPOCHS, seed=SEED)
    net, report = train_classifier(encoder, dataset, epochs=TRAIN_EPOCHS, seed=SEED)
    model_path.write_bytes(save_ncf(net))
    if verbose:
        print(f"holdout accuracy {report.accuracy:.2f}, cached to {model_path}")
    return net


def demo_part(label: int = 0, net: NetworkSpec | None = None) -> tuple:
    """One held-out part of the requested class, never seen in training.

    With a net, prefers an instance the net classifies correctly so the
    demos explain a confident right answer rather than a mistake.
    """
    held_out = generate_shape_dataset(12, RESOLUTION, seed=SEED + 999)
    candidates = np.flatnonzero(held_out.labels == label)
    idx = int(candidates[0])
    if net is not None:
        from voxelxai import forward

        for i in candidates:
            if int(np.argmax(forward(net, held_out.grids[i].values[None]))) == label:
                idx = int(i)
                break
    return held_out.grids[idx], held_out.class_names[label]


def describe_dataset(dataset: ShapeDataset) -> str:
    counts = np.bincount(dataset.labels, minlength=len(dataset.class_names))
    parts = ", ".join(f"{n}={c}" for n, c in zip(dataset.class_names, counts))
    return f"{len(dataset.grids)} parts ({parts})"
