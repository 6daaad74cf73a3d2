"""Class activation mapping over a 3D convolution layer.

Each feature channel of the chosen conv layer gets one weight: the mean
gradient of the class score over that channel. The weighted channel sum,
rectified, is a coarse saliency volume that trilinear interpolation
brings back to input resolution. Superimposing it on the occupancy grid
masks the map to the part itself.
"""

import numpy as np

from voxelxai import GradCamConfig, export_ply_colored, export_vtk, forward, gradcam, superimpose

from _common import OUT_DIR, demo_part, load_or_train


def main() -> None:
    net = load_or_train()
    grid, name = demo_part(label=0, net=net)
    x = grid.values[None, ...]
    target = int(np.argmax(forward(net, x)))
    print(f"\nheld-out {name}: explaining class {target}")

    result = gradcam(net, x, target)
    heat = result.upsampled_map.values
    print(f"\nlayer {result.layer_name}: channel weights {np.round(result.alpha, 4)}")
    print(f"coarse map {result.coarse_map.shape} -> upsampled {heat.shape}")
    print(f"map range [{heat.min():.4f}, {heat.max():.4f}] (rectified, so never negative)")

    earlier = gradcam(net, x, target, GradCamConfig(layer="conv1"))
    print(f"\nlayer conv1 instead: coarse map {earlier.coarse_map.shape}; earlier layers "
          "give finer grids but less class-specific features")

    nearest = gradcam(net, x, target, GradCamConfig(upsample="nearest"))
    diff = np.abs(heat - nearest.upsampled_map.values).max()
    print(f"trilinear vs nearest upsampling: max voxel difference {diff:.4f}")

    blended = superimpose(result, x)
    off_part = blended.values[grid.values < 0.5]
    print(f"\nsuperimposed on occupancy: {int((blended.values > 0).sum())} voxels lit, "
          f"max off-part value {off_part.max():.4f}")

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    export_vtk(result.upsampled_map, OUT_DIR / "gradcam.vtk")
    export_ply_colored(grid, heat, 0.5, OUT_DIR / "gradcam.ply")
    print(f"wrote {OUT_DIR / 'gradcam.vtk'} and {OUT_DIR / 'gradcam.ply'}")


if __name__ == "__main__":
    main()
