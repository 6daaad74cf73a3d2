"""Sequential layer graphs: validated specs, traced inference, reverse-mode
gradients via chained per-layer VJPs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import layers as L
from .errors import ShapeError, UsageError
from .numerics import as_f64

DEFAULT_CLASSES = 11


@dataclass
class EvalCounters:
    """Counts full forward passes and full backward (VJP chain) passes."""

    forward: int = 0
    backward: int = 0

    def snapshot(self) -> tuple[int, int]:
        return (self.forward, self.backward)


@dataclass
class NetworkSpec:
    """A sequential chain of layers with their parameters.

    `input_dims` is (channels, nx, ny, nz). Parameterized layers (conv3d,
    dense) own a LayerWeights entry keyed by layer name. The spec is
    validated on construction: unique names, weight shapes consistent with
    the declared layers, and a consistent shape chain from input to output.
    """

    layers: list[L.LayerSpec]
    weights: dict[str, L.LayerWeights]
    input_dims: tuple[int, int, int, int]
    counters: EvalCounters = field(default_factory=EvalCounters, repr=False, compare=False)

    def __post_init__(self):
        self.input_dims = tuple(int(d) for d in self.input_dims)
        if len(self.input_dims) != 4 or min(self.input_dims) < 1:
            raise ShapeError(f"input_dims must be 4 positive extents, got {self.input_dims}")
        names = [ly.name for ly in self.layers]
        if len(set(names)) != len(names):
            raise ShapeError("layer names must be unique within a network")
        for ly in self.layers:
            if L.has_params(ly):
                if ly.name not in self.weights:
                    raise ShapeError(f"missing weights for layer {ly.name!r}")
                w = self.weights[ly.name]
                w.weight = as_f64(w.weight)
                w.bias = as_f64(w.bias)
                expect = _expected_param_shapes(ly)
                if w.weight.shape != expect[0] or w.bias.shape != expect[1]:
                    raise ShapeError(
                        f"layer {ly.name!r} declares weight {expect[0]} / bias {expect[1]}, "
                        f"got {w.weight.shape} / {w.bias.shape}"
                    )
        self.layer_shapes()  # raises ShapeError on an inconsistent chain

    def layer_shapes(self) -> list[tuple[int, ...]]:
        """Output dims of every layer, in order, starting from input_dims."""
        shapes = []
        cur = self.input_dims
        for ly in self.layers:
            cur = L.output_shape(ly, cur)
            shapes.append(cur)
        return shapes

    @property
    def output_width(self) -> int:
        shapes = self.layer_shapes()
        final = shapes[-1] if shapes else self.input_dims
        return int(np.prod(final))

    def layer(self, name: str) -> L.LayerSpec:
        for ly in self.layers:
            if ly.name == name:
                return ly
        raise UsageError(f"no layer named {name!r}")

    def layer_index(self, name: str) -> int:
        for i, ly in enumerate(self.layers):
            if ly.name == name:
                return i
        raise UsageError(f"no layer named {name!r}")


@dataclass
class ActivationTrace:
    """Per-layer input/output activations recorded during one forward pass."""

    names: list[str]
    inputs: list[np.ndarray]
    outputs: list[np.ndarray]

    @property
    def final_output(self) -> np.ndarray:
        return self.outputs[-1]

    def input_of(self, name: str) -> np.ndarray:
        return self.inputs[self.names.index(name)]

    def output_of(self, name: str) -> np.ndarray:
        return self.outputs[self.names.index(name)]


def _expected_param_shapes(ly: L.LayerSpec):
    if ly.kind == "conv3d":
        return (ly.out_channels, ly.in_channels) + tuple(ly.kernel), (ly.out_channels,)
    if ly.kind == "dense":
        return (ly.out_features, ly.in_features), (ly.out_features,)
    raise ShapeError(f"layer {ly.name!r} has no parameters")


def _as_input(net: NetworkSpec, x) -> np.ndarray:
    x = as_f64(x)
    if x.shape == net.input_dims:
        return x
    if net.input_dims[0] == 1 and x.shape == net.input_dims[1:]:
        return x[None]
    raise ShapeError(f"input shape {x.shape} does not match network input {net.input_dims}")


def forward(net: NetworkSpec, x) -> np.ndarray:
    """Run `x` through the network and return the final activation."""
    out, _ = forward_traced(net, x)
    return out


def forward_traced(net: NetworkSpec, x) -> tuple[np.ndarray, ActivationTrace]:
    """As `forward`, additionally recording every layer's input and output."""
    a = _as_input(net, x)
    names, ins, outs = [], [], []
    for ly in net.layers:
        names.append(ly.name)
        ins.append(a)
        a = L.layer_forward(ly, a, net.weights.get(ly.name))
        outs.append(a)
    net.counters.forward += 1
    return a, ActivationTrace(names, ins, outs)


def layer_vjp(layer: L.LayerSpec, a, s, weights: L.LayerWeights | None = None) -> np.ndarray:
    """Gradient of <layer(a), s> w.r.t. `a` with `s` held constant."""
    return L.layer_vjp(layer, a, s, weights)


def backward_chain(
    net: NetworkSpec, trace: ActivationTrace, cotangent: np.ndarray, down_to: int = 0
) -> np.ndarray:
    """Propagate `cotangent` from the output back through the layers.

    Stops at layer index `down_to` and returns the cotangent with respect to
    that layer's input (the network input for down_to=0). Counts as one
    backward pass.
    """
    cot = as_f64(cotangent)
    if cot.shape != trace.outputs[-1].shape:
        raise ShapeError(
            f"cotangent shape {cot.shape} does not match output {trace.outputs[-1].shape}"
        )
    for i in range(len(net.layers) - 1, down_to - 1, -1):
        ly = net.layers[i]
        cot = L.layer_vjp(ly, trace.inputs[i], cot, net.weights.get(ly.name))
    net.counters.backward += 1
    return cot


def output_vector(out: np.ndarray) -> np.ndarray:
    if out.ndim != 1:
        raise UsageError(f"network output has shape {out.shape}, expected a vector")
    return out


def input_gradient(net: NetworkSpec, x, target: int) -> np.ndarray:
    """Gradient of output[target] with respect to the input, same dims as x."""
    x_arr = _as_input(net, x)
    out, trace = forward_traced(net, x_arr)
    vec = output_vector(out)
    target = int(target)
    if not 0 <= target < vec.size:
        raise IndexError(f"target {target} out of range for output width {vec.size}")
    seed = np.zeros_like(vec)
    seed[target] = 1.0
    return backward_chain(net, trace, seed)


def last_conv_layer(net: NetworkSpec) -> L.LayerSpec:
    """The last conv3d layer in graph order."""
    for ly in reversed(net.layers):
        if ly.kind == "conv3d":
            return ly
    raise UsageError("network has no convolutional layer")


def default_architecture(
    resolution: int = 32, classes: int = DEFAULT_CLASSES
) -> tuple[list[L.LayerSpec], tuple[int, int, int, int]]:
    """Demo layer chain: two conv/pool stages, then a two-layer dense head.

    Returns (layers, input_dims); weights are initialized by the training
    module. `classes` sets the output width (11 by default).
    """
    feat = 16 * (resolution // 4) ** 3
    layers = [
        L.Conv3d("conv1", 1, 8, (3, 3, 3), stride=1, padding="same"),
        L.Relu("relu1"),
        L.MaxPool3d("pool1", (2, 2, 2)),
        L.Conv3d("conv2", 8, 16, (3, 3, 3), stride=1, padding="same"),
        L.Relu("relu2"),
        L.MaxPool3d("pool2", (2, 2, 2)),
        L.Flatten("flatten"),
        L.Dense("fc1", feat, 64),
        L.Relu("relu3"),
        L.Dense("fc2", 64, classes),
    ]
    return layers, (1, resolution, resolution, resolution)
