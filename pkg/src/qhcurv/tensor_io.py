"""Binary tensor files and JSON reports.

Tensor file layout (little endian):

    magic   4 bytes  b"QHT1"
    rank    u8
    flags   u8       bit 0: curvature-certified claim (re-verified on load)
    reserved u16
    n       u32      quaternionic dimension
    dims    u32 * rank   (each must equal 4 n)
    payload f64 * prod(dims), row major

Reports are plain JSON objects {version, n, command, tolerances, results,
failures}; floats go through Python's shortest round-trip repr, so a report
written twice from the same data is byte-identical.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"QHT1"
FLAG_CERTIFIED = 1

REPORT_VERSION = 1


class TensorFileError(ValueError):
    """Malformed or inconsistent tensor file."""


@dataclass
class TensorFile:
    n: int
    data: np.ndarray
    certified_claim: bool = False

    @property
    def rank(self) -> int:
        return self.data.ndim


def write_tensor(path, n: int, data: np.ndarray, certified: bool = False) -> None:
    data = np.ascontiguousarray(data, dtype="<f8")
    rank = data.ndim
    if rank > 4:
        raise TensorFileError(f"rank {rank} unsupported")
    dim = 4 * n
    if any(s != dim for s in data.shape):
        raise TensorFileError(f"axes must all have length 4n = {dim}, got {data.shape}")
    flags = FLAG_CERTIFIED if certified else 0
    header = MAGIC + struct.pack("<BBHI", rank, flags, 0, n)
    header += struct.pack(f"<{rank}I", *data.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_tensor(path) -> TensorFile:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise TensorFileError(f"bad magic {raw[:4]!r}")
    rank, flags, _reserved, n = struct.unpack_from("<BBHI", raw, 4)
    if rank > 4:
        raise TensorFileError(f"rank {rank} unsupported")
    offset = 12
    dims = struct.unpack_from(f"<{rank}I", raw, offset)
    offset += 4 * rank
    dim = 4 * n
    if any(s != dim for s in dims):
        raise TensorFileError(f"dims {dims} inconsistent with n = {n}")
    count = 1
    for s in dims:
        count *= s
    if len(raw) - offset < 8 * count:
        raise TensorFileError("truncated payload")
    payload = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    data = payload.reshape(dims).astype(float)
    return TensorFile(n=int(n), data=data,
                      certified_claim=bool(flags & FLAG_CERTIFIED))


def write_report(path, n: int, command: str, tolerances: dict,
                 results, failures) -> dict:
    """Write the canonical report JSON; returns the report dict."""
    report = {
        "version": REPORT_VERSION,
        "n": n,
        "command": command,
        "tolerances": dict(tolerances),
        "results": results,
        "failures": failures,
    }
    if path is not None:
        with open(path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def jsonable(value):
    """Recursively convert numpy scalars/arrays for JSON serialization."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    return value
