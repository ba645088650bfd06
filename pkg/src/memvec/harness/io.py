"""Binary file formats.

fvecs/ivecs: per record a 4-byte little-endian int32 d followed by d
little-endian float32 / int32 values; all records share d.

MVIX index container: magic b"MVIX", version byte 1, little-endian uint32
fields {d, N, M, construction tag (0 = sum, 1 = pinv)}, then the M
representatives as d consecutive float32 each, then the M membership
lists as uint32 count + uint32 ids. Coefficients are widened to float64
on load.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..core import MemoryIndex, MemoryUnit
from ..errors import FormatError

__all__ = [
    "read_fvecs",
    "write_fvecs",
    "read_ivecs",
    "write_ivecs",
    "write_index",
    "read_index",
]

_MAGIC = b"MVIX"
_VERSION = 1
_TAGS = {"sum": 0, "pinv": 1}
_TAG_NAMES = {v: k for k, v in _TAGS.items()}


def _read_vecs(path, dtype) -> np.ndarray:
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0:
        raise FormatError(f"{path}: empty file", offset=0)
    if raw.size < 4:
        raise FormatError(f"{path}: truncated header", offset=0)
    d = int(np.frombuffer(raw[:4].tobytes(), dtype="<i4")[0])
    if d <= 0:
        raise FormatError(f"{path}: non-positive dimension {d}", offset=0)
    rec = 4 + 4 * d
    if raw.size % rec != 0:
        raise FormatError(f"{path}: truncated record", offset=raw.size - raw.size % rec)
    n = raw.size // rec
    flat = np.frombuffer(raw.tobytes(), dtype="<i4").reshape(n, 1 + d)
    bad = np.flatnonzero(flat[:, 0] != d)
    if bad.size:
        raise FormatError(f"{path}: inconsistent dimension {flat[bad[0], 0]} != {d}",
                          offset=int(bad[0]) * rec)
    return flat[:, 1:].copy().view(dtype)


def read_fvecs(path) -> np.ndarray:
    """Read an fvecs file into an (N, d) float64 array (widened from f32)."""
    return _read_vecs(path, "<f4").astype(np.float64)


def read_ivecs(path) -> np.ndarray:
    """Read an ivecs file into an (N, d) int32 array."""
    return _read_vecs(path, "<i4").astype(np.int32)


def _write_vecs(arr: np.ndarray, path, dtype):
    arr = np.ascontiguousarray(arr)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise FormatError("expected a non-empty (N, d) array")
    n, d = arr.shape
    body = arr.astype(dtype)
    header = np.full((n, 1), d, dtype="<i4")
    out = np.concatenate([header.view(dtype), body], axis=1)
    Path(path).write_bytes(out.tobytes())


def write_fvecs(arr: np.ndarray, path):
    """Write an (N, d) array as little-endian float32 fvecs."""
    _write_vecs(np.asarray(arr, dtype=np.float64), path, "<f4")


def write_ivecs(arr: np.ndarray, path):
    """Write an (N, d) integer array as little-endian int32 ivecs."""
    _write_vecs(np.asarray(arr, dtype=np.int64), path, "<i4")


def write_index(index: MemoryIndex, path):
    """Serialize a MemoryIndex into the MVIX container."""
    parts = [_MAGIC, bytes([_VERSION])]
    parts.append(struct.pack("<4I", index.dim, index.total, index.num_units,
                             _TAGS[index.construction]))
    reps = index.representatives().astype("<f4")
    parts.append(reps.tobytes())
    for u in index.units:
        parts.append(struct.pack("<I", u.size))
        parts.append(u.member_ids.astype("<u4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_index(path) -> MemoryIndex:
    """Load a MemoryIndex from an MVIX container (float32 widened)."""
    raw = Path(path).read_bytes()
    if len(raw) < 21:
        raise FormatError(f"{path}: truncated header", offset=0)
    if raw[:4] != _MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}", offset=0)
    if raw[4] != _VERSION:
        raise FormatError(f"{path}: unsupported version {raw[4]}", offset=4)
    d, n_total, m, tag = struct.unpack_from("<4I", raw, 5)
    if tag not in _TAG_NAMES:
        raise FormatError(f"{path}: unknown construction tag {tag}", offset=17)
    pos = 21
    need = 4 * d * m
    if len(raw) < pos + need:
        raise FormatError(f"{path}: truncated representatives", offset=len(raw))
    reps = np.frombuffer(raw, dtype="<f4", count=d * m, offset=pos)
    reps = reps.reshape(m, d).astype(np.float64)
    pos += need
    units = []
    for j in range(m):
        if len(raw) < pos + 4:
            raise FormatError(f"{path}: truncated membership list", offset=pos)
        (count,) = struct.unpack_from("<I", raw, pos)
        pos += 4
        if len(raw) < pos + 4 * count:
            raise FormatError(f"{path}: truncated membership ids", offset=pos)
        ids = np.frombuffer(raw, dtype="<u4", count=count, offset=pos).astype(np.int64)
        pos += 4 * count
        units.append(MemoryUnit(member_ids=ids, representative=reps[j]))
    if pos != len(raw):
        raise FormatError(f"{path}: trailing bytes", offset=pos)
    return MemoryIndex(units=tuple(units), construction=_TAG_NAMES[tag],
                       dim=d, total=n_total)
