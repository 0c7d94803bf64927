"""Binary state snapshots, endianness-pinned and bit-exact.

Layout (little-endian regardless of host):

    magic   4 bytes  b"NSPS"
    version u32      1
    N1      u32
    N2      u32
    N3      u32
    L       f64
    t       f64
    fields  5 blocks of N1*N2*N3 f64: rho, m1, m2, m3, E
            C order, flat index (i1*N2 + i2)*N3 + i3

Header is 36 bytes, total size 36 + 5*8*N1*N2*N3 exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError

__all__ = ["Snapshot", "HEADER", "write_snapshot", "read_snapshot"]

MAGIC = b"NSPS"
VERSION = 1
HEADER = struct.Struct("<4sIIIIdd")


@dataclass(frozen=True)
class Snapshot:
    N1: int
    N2: int
    N3: int
    L: float
    t: float
    rho: np.ndarray
    m: np.ndarray  # (3, N1, N2, N3)
    E: np.ndarray


def write_snapshot(path, L: float, t: float, rho: np.ndarray, m: np.ndarray, E: np.ndarray):
    n1, n2, n3 = rho.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, n1, n2, n3, float(L), float(t)))
        for block in (rho, m[0], m[1], m[2], E):
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < HEADER.size:
        raise FormatError(len(data), f"truncated header ({len(data)} bytes)")
    magic, version, n1, n2, n3, L, t = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(0, f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(4, f"unsupported version {version}")
    npts = n1 * n2 * n3
    expect = HEADER.size + 5 * 8 * npts
    if len(data) != expect:
        raise FormatError(
            min(len(data), expect), f"size {len(data)} != expected {expect}"
        )
    flat = np.frombuffer(data, dtype="<f8", offset=HEADER.size).astype(np.float64)
    blocks = flat.reshape(5, n1, n2, n3)
    return Snapshot(
        N1=n1, N2=n2, N3=n3, L=L, t=t,
        rho=blocks[0].copy(),
        m=blocks[1:4].copy(),
        E=blocks[4].copy(),
    )
