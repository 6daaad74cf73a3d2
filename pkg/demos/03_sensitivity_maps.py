"""Gradient-based relevance: sensitivity maps and activation dreaming.

The squared input gradient says how strongly each voxel can move a class
score; by construction the map sums to the squared gradient norm. The
signed variant keeps the gradient direction. Dreaming then follows that
gradient for a few steps and watches the class score rise.
"""

import numpy as np

from voxelxai import (
    SensitivityConfig,
    deep_dream,
    export_vtk,
    forward,
    sensitivity_map,
)
from voxelxai.network import input_gradient

from _common import OUT_DIR, demo_part, load_or_train


def main() -> None:
    net = load_or_train()
    grid, name = demo_part(label=1, net=net)
    x = grid.values[None, ...]

    scores = forward(net, x)
    target = int(np.argmax(scores))
    print(f"\nheld-out {name}: scores {np.round(scores, 3)}, explaining class {target}")

    squared = sensitivity_map(net, x, target)
    grad = input_gradient(net, x, target)
    print(f"squared map: sum {squared.values.sum():.6f} "
          f"== |grad|^2 {float((grad * grad).sum()):.6f}")
    hottest = tuple(int(i) for i in np.unravel_index(np.argmax(squared.values), squared.dims))
    print(f"  hottest voxel {hottest} with {squared.values.max():.2e}")

    signed = sensitivity_map(net, x, target, SensitivityConfig(output_form="signed"))
    pos = int((signed.values > 0).sum())
    neg = int((signed.values < 0).sum())
    print(f"signed map: {pos} voxels push the score up, {neg} pull it down")

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    export_vtk(squared, OUT_DIR / "sensitivity.vtk")
    print(f"wrote {OUT_DIR / 'sensitivity.vtk'}")

    print("\ndreaming: nudging the part along the gradient")
    current = x
    for step in range(3):
        current = deep_dream(net, current, target,
                             SensitivityConfig(dream_step=0.05, dream_iters=5))
        score = forward(net, current)[target]
        print(f"  after {(step + 1) * 5:2d} steps: class score {score:.4f}")
    moved = np.abs(current - x)
    print(f"dream moved {int((moved > 1e-6).sum())} voxels, max shift {moved.max():.4f}")


if __name__ == "__main__":
    main()
