"""Command-line entry point: voxelization, dataset generation, training,
inference, single-method explanation, and the all-methods comparison.

Exit codes: 0 success, 2 usage/domain problems, 3 malformed files,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .datasets import generate_shape_dataset, load_dataset, save_dataset
from .errors import DomainError, FormatError, NumericalError, ShapeError, UsageError
from .explain import TargetSelection, explain, select_target
from .export import compare_all, export_ply_colored, export_vtk
from .gradcam import GradCamConfig
from .lime import LimeConfig
from .lrp import LrpConfig
from .mesh import parse_stl
from .ncf import read_ncf, write_ncf
from .network import forward, output_vector
from .sensitivity import SensitivityConfig
from .training import pretrain_autoencoder, train_classifier
from .voxelize import read_vxg, voxelize, write_vxg

PLY_THRESHOLD = 0.5  # occupancy cut for point-cloud exports


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxelxai",
        description="Relevance heatmaps for 3D convolutional networks over voxelized parts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("voxelize", help="rasterize an STL mesh into a voxel grid")
    p.add_argument("--input", required=True, help="STL mesh (ascii or binary)")
    p.add_argument("--resolution", type=int, default=32)
    p.add_argument("--mode", choices=("solid", "surface"), default="solid")
    p.add_argument("--output", required=True, help="voxel grid file to write")

    p = sub.add_parser("gen-data", help="generate a labeled synthetic shape dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--resolution", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="dataset directory to write")

    p = sub.add_parser("pretrain", help="train the reconstruction autoencoder")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="encoder network file to write")

    p = sub.add_parser("train", help="fine-tune the classifier from an encoder")
    p.add_argument("--encoder", required=True, help="pretrained encoder network file")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--freeze-encoder", action="store_true")
    p.add_argument("--out", required=True, help="classifier network file to write")

    p = sub.add_parser("infer", help="print class scores for one voxel grid")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)

    p = sub.add_parser("explain", help="write one method's relevance heatmap")
    p.add_argument("--method", required=True, choices=("sa", "lrp", "gradcam", "lime"))
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--target", default="argmax", help="'argmax' or an output index")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--epsilon-sign", choices=("signed", "unsigned"), default=None)
    p.add_argument("--output-init", choices=("activation_value", "unit"), default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--segments", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--lambda", dest="ridge_lambda", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--layer", default=None)
    p.add_argument("--signed", action="store_true")
    p.add_argument("--out", required=True, help="heatmap file, .vtk or .ply")

    p = sub.add_parser("compare", help="run all four methods side by side")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)

    return parser


_METHOD_FLAGS = {
    "sa": ("signed",),
    "lrp": ("epsilon", "epsilon_sign", "output_init"),
    "gradcam": ("layer",),
    "lime": ("sigma", "segments", "samples", "top_k", "ridge_lambda", "seed"),
}


def _explain_config(args):
    """Build the method's config from its own flags; flags belonging to a
    different method are a usage error rather than silently ignored."""
    provided = {
        name
        for names in _METHOD_FLAGS.values()
        for name in names
        if getattr(args, name) not in (None, False)
    }
    foreign = provided - set(_METHOD_FLAGS[args.method])
    if foreign:
        flags = ", ".join("--" + f.replace("_", "-") for f in sorted(foreign))
        raise UsageError(f"{flags} does not apply to method {args.method!r}")

    if args.method == "sa":
        return SensitivityConfig(output_form="signed" if args.signed else "squared")
    if args.method == "lrp":
        kw = {}
        if args.epsilon is not None:
            kw["epsilon"] = args.epsilon
        if args.epsilon_sign is not None:
            kw["epsilon_signing"] = args.epsilon_sign
        if args.output_init is not None:
            kw["output_init"] = args.output_init
        return LrpConfig(**kw)
    if args.method == "gradcam":
        return GradCamConfig(layer=args.layer)
    kw = {}
    for flag, field in (
        ("sigma", "sigma"),
        ("segments", "segments_per_axis"),
        ("samples", "n_samples"),
        ("top_k", "top_k"),
        ("ridge_lambda", "ridge_lambda"),
        ("seed", "seed"),
    ):
        if getattr(args, flag) is not None:
            kw[field] = getattr(args, flag)
    return LimeConfig(**kw)


def _target_selection(spec: str) -> TargetSelection:
    if spec == "argmax":
        return TargetSelection("argmax")
    try:
        index = int(spec)
    except ValueError:
        raise UsageError(f"--target must be 'argmax' or an integer, got {spec!r}") from None
    return TargetSelection("index", index)


def _write_heatmap(heatmap, grid, out):
    suffix = Path(out).suffix.lower()
    if suffix == ".vtk":
        export_vtk(heatmap, out, title=f"{heatmap.method} relevance")
    elif suffix == ".ply":
        export_ply_colored(grid, heatmap, PLY_THRESHOLD, out)
    else:
        raise UsageError(f"--out must end in .vtk or .ply, got {out!r}")


def _cmd_voxelize(args) -> int:
    mesh = parse_stl(Path(args.input).read_bytes())
    grid = voxelize(mesh, args.resolution, args.mode)
    write_vxg(grid, args.output)
    occupied = int((grid.values >= PLY_THRESHOLD).sum())
    print(f"wrote {args.output}: dims {grid.dims}, {occupied} occupied voxels")
    return 0


def _cmd_gen_data(args) -> int:
    dataset = generate_shape_dataset(args.n, args.resolution, args.seed)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} samples at {args.resolution}^3 to {args.out}")
    return 0


def _cmd_pretrain(args) -> int:
    dataset = load_dataset(args.data)
    encoder, report = pretrain_autoencoder(dataset, args.epochs, args.lr, args.seed)
    write_ncf(encoder, args.out)
    for epoch, loss in enumerate(report.losses):
        print(f"epoch {epoch} loss {loss:.6f}")
    print(f"wrote encoder to {args.out}")
    return 0


def _cmd_train(args) -> int:
    encoder = read_ncf(args.encoder)
    dataset = load_dataset(args.data)
    net, report = train_classifier(
        encoder, dataset, args.epochs, args.lr, args.seed, args.freeze_encoder
    )
    write_ncf(net, args.out)
    for epoch, loss in enumerate(report.losses):
        print(f"epoch {epoch} loss {loss:.6f}")
    if report.accuracy is not None:
        print(f"holdout accuracy {report.accuracy:.3f}")
    print(f"wrote classifier to {args.out}")
    return 0


def _cmd_infer(args) -> int:
    net = read_ncf(args.model)
    grid = read_vxg(args.input)
    scores = output_vector(forward(net, grid.values))
    for i, score in enumerate(scores):
        print(f"class {i}: {score:.6f}")
    print(f"argmax: {select_target(scores, TargetSelection('argmax'))}")
    return 0


def _cmd_explain(args) -> int:
    net = read_ncf(args.model)
    grid = read_vxg(args.input)
    sel = _target_selection(args.target)
    config = _explain_config(args)
    heatmap = explain(net, grid, args.method, sel, config)
    _write_heatmap(heatmap, grid, args.out)
    print(
        f"wrote {args.out}: method {heatmap.method}, target {heatmap.target}, "
        f"range [{heatmap.values.min():.6g}, {heatmap.values.max():.6g}]"
    )
    return 0


def _cmd_compare(args) -> int:
    net = read_ncf(args.model)
    grid = read_vxg(args.input)
    manifest = compare_all(net, grid, args.out_dir)
    sys.stdout.write(manifest.read_text(encoding="ascii"))
    print(f"wrote comparison to {args.out_dir}")
    return 0


_COMMANDS = {
    "voxelize": _cmd_voxelize,
    "gen-data": _cmd_gen_data,
    "pretrain": _cmd_pretrain,
    "train": _cmd_train,
    "infer": _cmd_infer,
    "explain": _cmd_explain,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, DomainError, ShapeError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
