"""Train the shape classifier end to end.

Generates a synthetic corpus of boxes, spheres, and plates, pretrains a
convolutional encoder as an autoencoder, then fine-tunes a classifier
head on top of it. Both stages report their loss trajectory; the final
model is saved in the network container format and reloaded to show the
round trip is exact.
"""

import numpy as np

from voxelxai import (
    forward,
    generate_shape_dataset,
    load_ncf,
    pretrain_autoencoder,
    save_ncf,
    train_classifier,
)

from _common import N_SAMPLES, OUT_DIR, PRETRAIN_EPOCHS, RESOLUTION, SEED, TRAIN_EPOCHS, describe_dataset


def sparkline(losses, width: int = 24) -> str:
    """Compress a loss trajectory into a fixed-width bar string."""
    picks = np.linspace(0, len(losses) - 1, num=min(width, len(losses))).astype(int)
    vals = np.asarray(losses, dtype=np.float64)[picks]
    lo, hi = vals.min(), vals.max()
    bars = " .:-=+*#%@"
    scaled = np.zeros(len(vals), dtype=int) if hi == lo else (
        ((vals - lo) / (hi - lo)) * (len(bars) - 1)).astype(int)
    return "".join(bars[i] for i in scaled)


def main() -> None:
    dataset = generate_shape_dataset(N_SAMPLES, RESOLUTION, seed=SEED)
    print(f"dataset: {describe_dataset(dataset)} at {RESOLUTION}^3")

    print(f"\npretraining encoder as autoencoder ({PRETRAIN_EPOCHS} epochs)")
    encoder, pre = pretrain_autoencoder(dataset, epochs=PRETRAIN_EPOCHS, seed=SEED)
    print(f"  reconstruction loss {pre.losses[0]:.4f} -> {pre.losses[-1]:.4f}  "
          f"[{sparkline(pre.losses)}]")

    print(f"\ntraining classifier head ({TRAIN_EPOCHS} epochs)")
    net, rep = train_classifier(encoder, dataset, epochs=TRAIN_EPOCHS, seed=SEED)
    print(f"  cross-entropy loss {rep.losses[0]:.4f} -> {rep.losses[-1]:.4f}  "
          f"[{sparkline(rep.losses)}]")
    print(f"  holdout accuracy {rep.accuracy:.2f}")

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    model_path = OUT_DIR / "model.ncf"
    blob = save_ncf(net)
    model_path.write_bytes(blob)
    print(f"\nsaved {len(blob)} bytes to {model_path}")

    reloaded = load_ncf(model_path.read_bytes())
    x = dataset.grids[0].values[None, ...]
    drift = np.abs(forward(net, x) - forward(reloaded, x)).max()
    print(f"reload check: max output drift {drift:.1e} (weights stored as float32)")

    scores = forward(reloaded, x)
    label = dataset.class_names[int(np.argmax(scores))]
    truth = dataset.class_names[int(dataset.labels[0])]
    print(f"first part: predicted {label!r}, actual {truth!r}")


if __name__ == "__main__":
    main()
