"""Binary snapshot files.

Layout: one ASCII header line ``CQNLS1 J K a b c d t`` followed by
(J+1)(K+1) complex node values stored as little-endian float64
(real, imag) pairs, row-major in j then k. Floats in the header are written
with ``repr`` so the grid and time round-trip exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Tuple

import numpy as np

from ..grid import Field, make_grid

MAGIC = "CQNLS"
VERSION = 1


class SnapshotFormatError(IOError):
    pass


def encode_snapshot(u: Field, t: float) -> bytes:
    g = u.grid
    header = f"{MAGIC}{VERSION} {g.J} {g.K} {g.a!r} {g.b!r} {g.c!r} {g.d!r} {float(t)!r}\n"
    return header.encode("ascii") + np.ascontiguousarray(u.values, dtype="<c16").tobytes()


def decode_snapshot(data: bytes) -> Tuple[Field, float]:
    nl = data.find(b"\n")
    if nl < 0:
        raise SnapshotFormatError("missing header line")
    try:
        parts = data[:nl].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise SnapshotFormatError("header is not ASCII") from exc
    if not parts or not parts[0].startswith(MAGIC):
        raise SnapshotFormatError("bad magic")
    if parts[0] != f"{MAGIC}{VERSION}":
        raise SnapshotFormatError(f"unsupported version {parts[0][len(MAGIC):]!r}")
    if len(parts) != 8:
        raise SnapshotFormatError("header needs J K a b c d t")
    try:
        J, K = int(parts[1]), int(parts[2])
        a, b, c, d, t = (float(p) for p in parts[3:])
        grid = make_grid(a, b, c, d, J, K)
    except ValueError as exc:
        raise SnapshotFormatError(f"bad header: {exc}") from exc
    payload = data[nl + 1:]
    need = (J + 1) * (K + 1) * 16
    if len(payload) < need:
        raise SnapshotFormatError(
            f"truncated payload: {len(payload) // 16} values, {(J + 1) * (K + 1)} required")
    if len(payload) > need:
        raise SnapshotFormatError("payload longer than the header's dimensions")
    values = np.frombuffer(payload, dtype="<c16").reshape(J + 1, K + 1).astype(complex)
    try:
        return Field(grid, values), t
    except ValueError as exc:
        raise SnapshotFormatError(str(exc)) from exc


def write_snapshot(path, u: Field, t: float) -> None:
    Path(path).write_bytes(encode_snapshot(u, t))


def read_snapshot(path) -> Tuple[Field, float]:
    return decode_snapshot(Path(path).read_bytes())
