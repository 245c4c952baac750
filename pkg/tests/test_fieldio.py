"""Field files: bit-exact round-trips in binary and pure-JSON modes."""
import json

import numpy as np
import pytest

from g2calc.fields import (
    ALT3_TRIPLES,
    GridSpec,
    components_to_phi,
    generate_field,
    load_field,
    phi_to_components,
    save_field,
)


class TestComponents:
    def test_triples_are_lexicographic(self):
        assert len(ALT3_TRIPLES) == 35
        assert ALT3_TRIPLES[0] == (0, 1, 2)
        assert ALT3_TRIPLES[-1] == (4, 5, 6)
        assert list(ALT3_TRIPLES) == sorted(ALT3_TRIPLES)
        for i, j, k in ALT3_TRIPLES:
            assert i < j < k

    def test_involution(self, gauge16):
        comp = phi_to_components(gauge16.phi)
        assert comp.shape == gauge16.grid.shape + (35,)
        assert np.array_equal(components_to_phi(comp), gauge16.phi)

    def test_rebuild_is_alternating(self, rng):
        comp = rng.standard_normal((4, 35))
        phi = components_to_phi(comp)
        assert np.abs(phi + np.swapaxes(phi, -1, -2)).max() == 0.0

    def test_rejects_wrong_width(self):
        with pytest.raises(ValueError):
            components_to_phi(np.zeros((4, 34)))


class TestRoundTrip:
    def test_json_small_mode(self, tmp_path, gauge16):
        path = str(tmp_path / "f.g2f")
        assert save_field(gauge16, path) == "json"
        back = load_field(path)
        assert np.array_equal(back.phi, gauge16.phi)
        assert back.grid == gauge16.grid
        assert back.meta == gauge16.meta

    def test_binary_mode(self, tmp_path):
        g = GridSpec((0, 1), (24, 24))
        sf = generate_field("gauge_deform", {"amplitude": 0.02}, g, seed=3)
        path = str(tmp_path / "f.g2f")
        assert save_field(sf, path) == "binary"
        back = load_field(path)
        assert np.array_equal(back.phi, sf.phi)
        assert back.grid == sf.grid

    def test_resave_is_byte_identical(self, tmp_path, gauge16):
        p1, p2 = str(tmp_path / "a.g2f"), str(tmp_path / "b.g2f")
        save_field(gauge16, p1)
        save_field(load_field(p1), p2)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_forced_modes(self, tmp_path, gauge16):
        for mode in ("binary", "json"):
            path = str(tmp_path / f"f_{mode}.g2f")
            assert save_field(gauge16, path, mode=mode) == mode
            assert np.array_equal(load_field(path).phi, gauge16.phi)

    def test_rejects_unknown_mode(self, tmp_path, gauge16):
        with pytest.raises(ValueError):
            save_field(gauge16, str(tmp_path / "f"), mode="pickle")


class TestErrors:
    def test_bad_header(self, tmp_path):
        path = tmp_path / "junk.g2f"
        path.write_bytes(b"\x00\x01 not json\npayload")
        with pytest.raises(ValueError, match="header"):
            load_field(str(path))

    def test_wrong_format_name(self, tmp_path):
        path = tmp_path / "other.g2f"
        path.write_bytes(json.dumps({"format": "csv"}).encode() + b"\n")
        with pytest.raises(ValueError, match="format"):
            load_field(str(path))

    def test_unsupported_version(self, tmp_path, gauge16):
        path = str(tmp_path / "f.g2f")
        save_field(gauge16, path)
        raw = open(path, "rb").read()
        nl = raw.index(b"\n")
        header = json.loads(raw[:nl])
        header["version"] = 99
        open(path, "wb").write(json.dumps(header).encode() + b"\n" + raw[nl + 1 :])
        with pytest.raises(ValueError, match="version"):
            load_field(path)

    def test_truncated_payload(self, tmp_path):
        g = GridSpec((0, 1), (24, 24))
        sf = generate_field("flat", {}, g, seed=0)
        path = str(tmp_path / "f.g2f")
        save_field(sf, path, mode="binary")
        raw = open(path, "rb").read()
        open(path, "wb").write(raw[:-16])
        with pytest.raises(ValueError, match="payload"):
            load_field(path)

    def test_payload_bit_flip_loads_perturbed(self, tmp_path):
        # no checksum: corruption must surface later as verification failure
        g = GridSpec((0, 1), (24, 24))
        sf = generate_field("gauge_deform", {"amplitude": 0.02}, g, seed=3)
        path = str(tmp_path / "f.g2f")
        save_field(sf, path, mode="binary")
        raw = bytearray(open(path, "rb").read())
        raw[raw.index(b"\n") + 500] ^= 0x04
        open(path, "wb").write(bytes(raw))
        back = load_field(path)
        assert not np.array_equal(back.phi, sf.phi)
        assert back.min_eig_g() > 0.0
