"""Binary field snapshots (magic "EMLAB1").

Layout, all little-endian:

    bytes 0..5    magic b"EMLAB1"
    u8            format version (1)
    u8            reserved (0)
    u32           points per axis n
    f64           box length L
    f64           time
    u32           field count
    per field:    u8 name length, ascii name, u8 component count
    payload:      per field, components * n^3 float64 arrays in x-fastest
                  order (Fortran order over (x, y, z) indices)

Snapshots are self-describing and round-trip bit-exactly.
"""

import struct

import numpy as np

from .errors import SnapshotFormatError
from .model import EMState
from .spectral import Grid3

MAGIC = b"EMLAB1"
VERSION = 1
_HEADER = struct.Struct("<6sBBIdd I".replace(" ", ""))


def save_snapshot(state, path):
    """Write an EMState to disk (real-space float64 payload)."""
    if not isinstance(state, EMState):
        raise TypeError("snapshots store primitive EMStates; convert diagonal "
                        "states with reconstruct() first")
    g = state.grid
    fields = [("u", state.u), ("n", state.n), ("E", state.E), ("B", state.B)]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, 0, g.n, g.box_length,
                              state.time, len(fields)))
        for name, arr in fields:
            comps = 1 if arr.ndim == 3 else arr.shape[0]
            nb = name.encode("ascii")
            fh.write(struct.pack("<B", len(nb)) + nb + struct.pack("<B", comps))
        for _, arr in fields:
            comp_arrays = [arr] if arr.ndim == 3 else list(arr)
            for c in comp_arrays:
                fh.write(np.asarray(c, "<f8").tobytes(order="F"))


def load_snapshot(path, grid=None):
    """Read a snapshot; with ``grid`` given, its dimensions must match."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise SnapshotFormatError(f"{path}: truncated header")
        magic, version, _, n, L, time, nfields = _HEADER.unpack(head)
        if magic != MAGIC:
            raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise SnapshotFormatError(f"{path}: unsupported version {version}")
        roster = []
        for _ in range(nfields):
            raw = fh.read(1)
            if len(raw) < 1:
                raise SnapshotFormatError(f"{path}: truncated roster")
            (nlen,) = struct.unpack("<B", raw)
            nb = fh.read(nlen)
            raw = fh.read(1)
            if len(nb) < nlen or len(raw) < 1:
                raise SnapshotFormatError(f"{path}: truncated roster")
            (comps,) = struct.unpack("<B", raw)
            roster.append((nb.decode("ascii"), comps))
        if grid is not None and (grid.n != n or grid.box_length != L):
            raise SnapshotFormatError(
                f"{path}: snapshot grid n={n} L={L} does not match target "
                f"n={grid.n} L={grid.box_length}")
        g = grid or Grid3(L, n)
        per_comp = n**3 * 8
        payload = {}
        for name, comps in roster:
            arrays = []
            for _ in range(comps):
                raw = fh.read(per_comp)
                if len(raw) < per_comp:
                    raise SnapshotFormatError(f"{path}: truncated payload for {name}")
                arrays.append(np.frombuffer(raw, "<f8").reshape((n, n, n),
                                                                order="F").copy())
            payload[name] = arrays[0] if comps == 1 else np.stack(arrays)
        extra = fh.read(1)
        if extra:
            raise SnapshotFormatError(f"{path}: trailing bytes after payload")
    expected = {"u": 3, "n": 1, "E": 3, "B": 3}
    got = {name: (1 if payload[name].ndim == 3 else payload[name].shape[0])
           for name in payload}
    if got != expected:
        raise SnapshotFormatError(f"{path}: unexpected field roster {got}")
    return EMState(g, payload["u"], payload["n"], payload["E"], payload["B"],
                   time)
