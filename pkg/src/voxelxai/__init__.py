"""Relevance heatmaps for small 3D voxel CNNs over CAD parts.

Loads or trains desk-scale 3D convolutional networks on voxelized geometry
and explains their outputs per voxel with four attribution methods:
sensitivity analysis, layer-wise relevance propagation, Grad-CAM and LIME.
"""

from .datasets import CLASS_NAMES, ShapeDataset, generate_shape_dataset, load_dataset, save_dataset
from .errors import (
    DomainError,
    FormatError,
    NumericalError,
    ShapeError,
    UsageError,
    VoxelXaiError,
)
from .explain import Heatmap, TargetSelection, explain, select_target
from .export import compare_all, export_ply_colored, export_vtk, jet_color
from .gradcam import GradCamConfig, GradCamResult, gradcam, superimpose
from .layers import (
    Conv3d,
    Dense,
    Flatten,
    GlobalAvgPool,
    LayerWeights,
    MaxPool3d,
    Relu,
)
from .lime import LimeConfig, LimeResult, lime_explain, segment_uniform_grid
from .lrp import LrpConfig, RelevanceStack, lrp, relevance_stack
from .mesh import TriangleMesh, ascii_stl, binary_stl, mesh_from_triangles, parse_stl
from .ncf import load_ncf, read_ncf, save_ncf, write_ncf
from .network import (
    NetworkSpec,
    default_architecture,
    forward,
    input_gradient,
)
from .sensitivity import SensitivityConfig, deep_dream, sensitivity_map
from .training import (
    TrainReport,
    classifier_from_encoder,
    init_network,
    pretrain_autoencoder,
    train_classifier,
    write_report_csv,
)
from .voxelize import VoxelGrid, grid_to_points, load_vxg, read_vxg, save_vxg, voxelize, write_vxg

__version__ = "0.1.0"

__all__ = [
    "CLASS_NAMES",
    "Conv3d",
    "Dense",
    "DomainError",
    "Flatten",
    "FormatError",
    "GlobalAvgPool",
    "GradCamConfig",
    "GradCamResult",
    "Heatmap",
    "LayerWeights",
    "LimeConfig",
    "LimeResult",
    "LrpConfig",
    "MaxPool3d",
    "NetworkSpec",
    "NumericalError",
    "RelevanceStack",
    "Relu",
    "SensitivityConfig",
    "ShapeDataset",
    "ShapeError",
    "TargetSelection",
    "TrainReport",
    "TriangleMesh",
    "UsageError",
    "VoxelGrid",
    "VoxelXaiError",
    "__version__",
    "ascii_stl",
    "binary_stl",
    "classifier_from_encoder",
    "compare_all",
    "deep_dream",
    "default_architecture",
    "explain",
    "export_ply_colored",
    "export_vtk",
    "forward",
    "generate_shape_dataset",
    "gradcam",
    "grid_to_points",
    "init_network",
    "input_gradient",
    "jet_color",
    "lime_explain",
    "load_dataset",
    "load_ncf",
    "load_vxg",
    "lrp",
    "mesh_from_triangles",
    "parse_stl",
    "pretrain_autoencoder",
    "read_ncf",
    "read_vxg",
    "relevance_stack",
    "save_dataset",
    "save_ncf",
    "save_vxg",
    "segment_uniform_grid",
    "select_target",
    "sensitivity_map",
    "superimpose",
    "train_classifier",
    "voxelize",
    "write_ncf",
    "write_report_csv",
    "write_vxg",
]
