"""Self-describing field files: a JSON header line plus a little-endian
binary payload, or a pure-JSON small mode.  The payload stores the 35
independent alternating components of phi per grid point, in lexicographic
index order i < j < k.  Round-trips are bit-exact in either mode."""
from __future__ import annotations

import json
import os
from itertools import combinations

import numpy as np

from .grid import GridSpec
from .structure import StructureField

__all__ = [
    "ALT3_TRIPLES",
    "FORMAT_NAME",
    "FORMAT_VERSION",
    "phi_to_components",
    "components_to_phi",
    "save_field",
    "load_field",
]

FORMAT_NAME = "g2field"
FORMAT_VERSION = 1

ALT3_TRIPLES: tuple = tuple(combinations(range(7), 3))

JSON_MODE_MAX_POINTS = 256

_EVEN = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
_ODD = ((1, 0, 2), (0, 2, 1), (2, 1, 0))


def phi_to_components(phi: np.ndarray) -> np.ndarray:
    """Extract the 35 independent components phi_ijk, i < j < k, as the
    trailing axis."""
    phi = np.asarray(phi, dtype=float)
    cols = [phi[..., i, j, k] for (i, j, k) in ALT3_TRIPLES]
    return np.stack(cols, axis=-1)


def components_to_phi(comp: np.ndarray) -> np.ndarray:
    """Rebuild the full alternating 3-tensor from its 35 components."""
    comp = np.asarray(comp, dtype=float)
    if comp.shape[-1] != 35:
        raise ValueError(f"expected 35 trailing components, got {comp.shape[-1]}")
    phi = np.zeros(comp.shape[:-1] + (7, 7, 7))
    for m, t in enumerate(ALT3_TRIPLES):
        c = comp[..., m]
        for p in _EVEN:
            phi[..., t[p[0]], t[p[1]], t[p[2]]] = c
        for p in _ODD:
            phi[..., t[p[0]], t[p[1]], t[p[2]]] = -c
    return phi


def save_field(sf: StructureField, path: str, mode: str = "auto") -> str:
    """Write the field to ``path``.  mode: "binary", "json", or "auto"
    (json for small grids, binary otherwise).  Returns the mode used."""
    if mode not in ("auto", "binary", "json"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "json" if sf.grid.npoints <= JSON_MODE_MAX_POINTS else "binary"

    comp = np.ascontiguousarray(phi_to_components(sf.phi), dtype="<f8")
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "mode": mode,
        "grid": sf.grid.to_dict(),
        "meta": sf.meta,
        "components": {
            "count": 35,
            "index_order": "lexicographic i<j<k",
            "dtype": "<f8",
            "shape": list(comp.shape),
        },
    }
    if mode == "json":
        header["data"] = comp.reshape(-1).tolist()
        blob = json.dumps(header).encode("ascii") + b"\n"
    else:
        blob = json.dumps(header).encode("ascii") + b"\n" + comp.tobytes(order="C")
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)
    return mode


def load_field(path: str) -> StructureField:
    """Read a field file written by :func:`save_field`."""
    with open(path, "rb") as fh:
        line = fh.readline()
        rest = fh.read()
    try:
        header = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ValueError(f"not a field file: bad header ({e})") from None
    if header.get("format") != FORMAT_NAME:
        raise ValueError(f"not a field file: format {header.get('format')!r}")
    if header.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported field file version {header.get('version')!r}")

    grid = GridSpec.from_dict(header["grid"])
    shape = tuple(header["components"]["shape"])
    if shape != grid.shape + (35,):
        raise ValueError(f"component shape {shape} does not match grid {grid.shape}")

    mode = header.get("mode")
    if mode == "json":
        comp = np.asarray(header["data"], dtype=float).reshape(shape)
    elif mode == "binary":
        expected = int(np.prod(shape)) * 8
        if len(rest) != expected:
            raise ValueError(
                f"payload size {len(rest)} does not match expected {expected}"
            )
        comp = np.frombuffer(rest, dtype="<f8").reshape(shape).astype(float)
    else:
        raise ValueError(f"unknown field file mode {mode!r}")

    return StructureField(grid, components_to_phi(comp), meta=header.get("meta", {}))
