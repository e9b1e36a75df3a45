"""Binary checkpoints of lattice states.

Layout::

    8 bytes   magic b"YMHCKPT1"
    4 bytes   header length L, unsigned little-endian
    L bytes   UTF-8 JSON header
    ...       arrays, little-endian float64, C order, in header order

The header holds ``group``, ``representation``, ``N``, ``a``, ``t``, ``dt``,
``mu``, ``v`` and ``arrays``, a list of ``[name, shape]``.  Complex U(1)
matter fields are stored with a trailing axis of length 2 (real, imaginary).
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .lattice import REPRESENTATIONS, HiggsPotential, LatticeGeometry, LatticeState

MAGIC = b"YMHCKPT1"
_ORDER = ("A", "D", "phi", "pi", "A0")


def _as_real(arr):
    if np.iscomplexobj(arr):
        return np.stack([arr.real, arr.imag], axis=-1)
    return np.asarray(arr, dtype=float)


def write_checkpoint(path, geom, state, potential=HiggsPotential(), dt=0.0):
    arrays = [(name, _as_real(getattr(state, name))) for name in _ORDER]
    header = {
        "group": state.group,
        "representation": REPRESENTATIONS[state.group],
        "N": geom.n,
        "a": geom.a,
        "t": float(state.t),
        "dt": float(dt),
        "mu": potential.mu,
        "v": potential.v,
        "arrays": [[name, list(arr.shape)] for name, arr in arrays],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_checkpoint(path):
    """Returns ``(geometry, state, potential, header)``."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: not a lattice checkpoint (bad magic)")
    (length,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12 : 12 + length].decode("utf-8"))
    offset = 12 + length
    fields = {}
    for name, shape in header["arrays"]:
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > len(data):
            raise ValueError(f"{path}: truncated while reading {name}")
        arr = np.frombuffer(data[offset:end], dtype="<f8").reshape(shape).astype(float)
        if header["group"] == "u1" and name in ("phi", "pi"):
            arr = arr[..., 0] + 1j * arr[..., 1]
        fields[name] = arr
        offset = end
    if offset != len(data):
        raise ValueError(f"{path}: {len(data) - offset} trailing bytes")
    geom = LatticeGeometry(int(header["N"]), float(header["a"]))
    state = LatticeState(group=header["group"], t=float(header["t"]), **fields)
    return geom, state, HiggsPotential(header["mu"], header["v"]), header
