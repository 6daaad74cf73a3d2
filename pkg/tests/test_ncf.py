import json
import struct

import numpy as np
import pytest

from voxelxai.errors import FormatError
from voxelxai.layers import Conv3d, Dense, Flatten, LayerWeights, Relu, Upsample3d
from voxelxai.ncf import MAGIC, load_ncf, read_ncf, save_ncf, write_ncf
from voxelxai.network import NetworkSpec, forward

from test_network import all_kinds_net


class TestRoundTrip:
    def test_save_load_preserves_structure_and_quantized_weights(self):
        net = all_kinds_net(seed=3)
        back = load_ncf(save_ncf(net))
        assert back.input_dims == net.input_dims
        assert [ly for ly in back.layers] == [ly for ly in net.layers]
        for name, w in net.weights.items():
            np.testing.assert_array_equal(back.weights[name].weight, w.weight.astype(np.float32))
            np.testing.assert_array_equal(back.weights[name].bias, w.bias.astype(np.float32))

    def test_load_save_is_bit_identical(self):
        data = save_ncf(all_kinds_net(seed=5))
        assert save_ncf(load_ncf(data)) == data

    def test_forward_agrees_after_roundtrip_of_f32_weights(self):
        # start from weights already at 32-bit precision so nothing is lost
        net = all_kinds_net(seed=8)
        for w in net.weights.values():
            w.weight = w.weight.astype(np.float32).astype(np.float64)
            w.bias = w.bias.astype(np.float32).astype(np.float64)
        back = load_ncf(save_ncf(net))
        x = np.random.default_rng(0).normal(size=(1, 4, 4, 4))
        np.testing.assert_array_equal(forward(net, x), forward(back, x))

    def test_file_helpers(self, tmp_path):
        net = all_kinds_net(seed=1)
        path = tmp_path / "net.ncf"
        write_ncf(net, path)
        assert path.read_bytes()[:4] == MAGIC
        back = read_ncf(path)
        assert back.input_dims == net.input_dims


def manifest_of(data):
    (mlen,) = struct.unpack_from("<I", data, 4)
    return json.loads(data[8 : 8 + mlen]), mlen


class TestManifestLayout:
    def test_header_and_blob_sizes(self):
        net = all_kinds_net(seed=2)
        data = save_ncf(net)
        manifest, mlen = manifest_of(data)
        assert manifest["version"] == 1
        assert manifest["input_dims"] == [1, 4, 4, 4]
        n_floats = sum(w.weight.size + w.bias.size for w in net.weights.values())
        assert len(data) == 8 + mlen + 4 * n_floats

    def test_offsets_count_floats(self):
        data = save_ncf(all_kinds_net(seed=2))
        manifest, _ = manifest_of(data)
        cursor = 0
        for entry in manifest["layers"]:
            if entry["weight_len"]:
                assert entry["weight_offset"] == cursor
                cursor += entry["weight_len"]
                assert entry["bias_offset"] == cursor
                cursor += entry["bias_len"]

    def test_canonical_bytes_are_deterministic(self):
        assert save_ncf(all_kinds_net(seed=4)) == save_ncf(all_kinds_net(seed=4))


class TestRejects:
    def test_bad_magic(self):
        data = save_ncf(all_kinds_net())
        with pytest.raises(FormatError):
            load_ncf(b"XXXX" + data[4:])

    def test_truncated_header(self):
        with pytest.raises(FormatError):
            load_ncf(b"NCF1\x01")

    def test_manifest_length_beyond_container(self):
        data = save_ncf(all_kinds_net())
        broken = data[:4] + struct.pack("<I", len(data)) + data[8:]
        with pytest.raises(FormatError):
            load_ncf(broken)

    def test_garbage_manifest(self):
        payload = b"{not json"
        data = MAGIC + struct.pack("<I", len(payload)) + payload
        with pytest.raises(FormatError):
            load_ncf(data)

    def test_unknown_version(self):
        payload = json.dumps({"version": 2, "input_dims": [1, 2, 2, 2], "layers": []}).encode()
        with pytest.raises(FormatError):
            load_ncf(MAGIC + struct.pack("<I", len(payload)) + payload)

    def test_unknown_layer_kind(self):
        payload = json.dumps(
            {
                "version": 1,
                "input_dims": [1, 2, 2, 2],
                "layers": [{"kind": "dropout", "name": "d", "parameters": {}}],
            }
        ).encode()
        with pytest.raises(FormatError):
            load_ncf(MAGIC + struct.pack("<I", len(payload)) + payload)

    def test_blob_too_short_for_declared_weights(self):
        data = save_ncf(all_kinds_net())
        with pytest.raises(FormatError):
            load_ncf(data[:-8])

    def test_wrong_weight_len(self):
        net = NetworkSpec(
            [Flatten("f"), Dense("d", 4, 2)],
            {"d": LayerWeights(np.zeros((2, 4)), np.zeros(2))},
            (1, 1, 2, 2),
        )
        data = save_ncf(net)
        manifest, mlen = manifest_of(data)
        manifest["layers"][1]["weight_len"] = 7
        mbytes = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
        with pytest.raises(FormatError):
            load_ncf(MAGIC + struct.pack("<I", len(mbytes)) + mbytes + data[8 + mlen :])

    def test_upsample_is_not_serializable(self):
        net = NetworkSpec([Upsample3d("u", 2)], {}, (1, 2, 2, 2))
        with pytest.raises(FormatError):
            save_ncf(net)

    def test_inconsistent_chain_reports_format_error(self):
        net = NetworkSpec(
            [Flatten("f"), Dense("d", 8, 2)],
            {"d": LayerWeights(np.zeros((2, 8)), np.zeros(2))},
            (1, 2, 2, 2),
        )
        data = save_ncf(net)
        manifest, mlen = manifest_of(data)
        manifest["input_dims"] = [1, 3, 3, 3]
        mbytes = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
        with pytest.raises(FormatError):
            load_ncf(MAGIC + struct.pack("<I", len(mbytes)) + mbytes + data[8 + mlen :])
