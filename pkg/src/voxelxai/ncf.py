"""NCF weight container: a single portable file holding a layer graph and
its parameters.

Layout (little-endian throughout):
  * magic bytes "NCF1"
  * uint32 manifest byte length
  * UTF-8 JSON manifest: version=1, input_dims, layers array with
    kind/name/parameters and weight_offset/weight_len/bias_offset/bias_len
    (offsets and lengths counted in floats, not bytes)
  * blob of IEEE-754 float32 values, row-major per tensor

Weights are stored at 32-bit precision, so save->load quantizes once;
load->save is bit-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from . import layers as L
from .errors import FormatError
from .network import NetworkSpec, _expected_param_shapes

MAGIC = b"NCF1"

_SERIALIZABLE = ("conv3d", "maxpool3d", "global_avg_pool", "dense", "relu", "flatten")


def _layer_params(ly: L.LayerSpec) -> dict:
    if ly.kind == "conv3d":
        return {
            "in_channels": ly.in_channels,
            "out_channels": ly.out_channels,
            "kernel": list(ly.kernel),
            "stride": ly.stride,
            "padding": ly.padding,
        }
    if ly.kind == "maxpool3d":
        return {"window": list(ly.window)}
    if ly.kind == "dense":
        return {"in_features": ly.in_features, "out_features": ly.out_features}
    return {}


def _layer_from_manifest(entry: dict) -> L.LayerSpec:
    kind = entry.get("kind")
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise FormatError("layer entry is missing a name")
    p = entry.get("parameters", {})
    try:
        if kind == "conv3d":
            return L.Conv3d(
                name,
                int(p["in_channels"]),
                int(p["out_channels"]),
                tuple(int(k) for k in p["kernel"]),
                stride=int(p.get("stride", 1)),
                padding=str(p.get("padding", "same")),
            )
        if kind == "maxpool3d":
            return L.MaxPool3d(name, tuple(int(w) for w in p["window"]))
        if kind == "global_avg_pool":
            return L.GlobalAvgPool(name)
        if kind == "dense":
            return L.Dense(name, int(p["in_features"]), int(p["out_features"]))
        if kind == "relu":
            return L.Relu(name)
        if kind == "flatten":
            return L.Flatten(name)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad parameters for layer {name!r}: {exc}") from exc
    raise FormatError(f"unknown layer kind {kind!r}")


def save_ncf(net: NetworkSpec) -> bytes:
    """Serialize a network to NCF bytes."""
    entries = []
    blob_parts: list[np.ndarray] = []
    offset = 0
    for ly in net.layers:
        if ly.kind not in _SERIALIZABLE:
            raise FormatError(f"layer kind {ly.kind!r} cannot be serialized to NCF")
        entry = {"kind": ly.kind, "name": ly.name, "parameters": _layer_params(ly)}
        if L.has_params(ly):
            w = net.weights[ly.name]
            wf = np.ascontiguousarray(w.weight, dtype="<f4").reshape(-1)
            bf = np.ascontiguousarray(w.bias, dtype="<f4").reshape(-1)
            entry["weight_offset"], entry["weight_len"] = offset, wf.size
            offset += wf.size
            entry["bias_offset"], entry["bias_len"] = offset, bf.size
            offset += bf.size
            blob_parts.extend([wf, bf])
        else:
            entry["weight_offset"] = entry["weight_len"] = 0
            entry["bias_offset"] = entry["bias_len"] = 0
        entries.append(entry)
    manifest = {"version": 1, "input_dims": list(net.input_dims), "layers": entries}
    mbytes = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = np.concatenate(blob_parts) if blob_parts else np.zeros(0, dtype="<f4")
    return MAGIC + struct.pack("<I", len(mbytes)) + mbytes + blob.tobytes()


def load_ncf(data: bytes) -> NetworkSpec:
    """Parse NCF bytes back into a validated NetworkSpec."""
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError("not an NCF container (bad magic)")
    (mlen,) = struct.unpack_from("<I", data, 4)
    if 8 + mlen > len(data):
        raise FormatError("manifest length exceeds container size")
    try:
        manifest = json.loads(data[8 : 8 + mlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}") from exc
    if manifest.get("version") != 1:
        raise FormatError(f"unsupported container version {manifest.get('version')!r}")
    dims = manifest.get("input_dims")
    if not isinstance(dims, list) or len(dims) != 4:
        raise FormatError("input_dims must be a list of four extents")
    blob = np.frombuffer(data[8 + mlen :], dtype="<f4")

    layer_list: list[L.LayerSpec] = []
    weights: dict[str, L.LayerWeights] = {}
    for entry in manifest.get("layers", []):
        ly = _layer_from_manifest(entry)
        layer_list.append(ly)
        if L.has_params(ly):
            wshape, bshape = _expected_param_shapes(ly)
            w = _read_floats(blob, entry, "weight", int(np.prod(wshape)), ly.name)
            b = _read_floats(blob, entry, "bias", int(np.prod(bshape)), ly.name)
            weights[ly.name] = L.LayerWeights(
                w.astype(np.float64).reshape(wshape), b.astype(np.float64).reshape(bshape)
            )
    try:
        return NetworkSpec(layer_list, weights, tuple(int(d) for d in dims))
    except Exception as exc:
        raise FormatError(f"inconsistent network in container: {exc}") from exc


def _read_floats(blob: np.ndarray, entry: dict, field: str, expected: int, name: str):
    try:
        off = int(entry[f"{field}_offset"])
        ln = int(entry[f"{field}_len"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"layer {name!r} is missing {field} offsets") from exc
    if ln != expected:
        raise FormatError(f"layer {name!r} declares {field}_len {ln}, expected {expected}")
    if off < 0 or off + ln > blob.size:
        raise FormatError(f"layer {name!r} {field} range [{off}, {off + ln}) exceeds blob size {blob.size}")
    return blob[off : off + ln]


def write_ncf(net: NetworkSpec, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save_ncf(net))


def read_ncf(path) -> NetworkSpec:
    with open(path, "rb") as fh:
        return load_ncf(fh.read())
