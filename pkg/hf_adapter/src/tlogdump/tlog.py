"""TLOG writer/reader implementing the published byte contract.

Layout (integers little-endian unsigned 32-bit):

    magic "TLOG" | version=1 | n_steps | vocab | dtype_code=1 (float32)
    n_steps * vocab float32 logits, row-major, little-endian
    n_steps uint32 observed token ids, one per row

This is an independent implementation of the interchange format the
estimator consumes; it shares no code with the estimator package.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"TLOG"
VERSION = 1
DTYPE_F32 = 1
_HEADER = struct.Struct("<4sIIII")


def write_tlog(path, logits: np.ndarray, tokens: np.ndarray) -> None:
    """Write one dump: logits (n_steps, vocab) and the aligned token ids."""
    logits = np.asarray(logits)
    tokens = np.asarray(tokens)
    if logits.ndim != 2:
        raise ValueError(f"logits must be 2-d, got shape {logits.shape}")
    n_steps, vocab = logits.shape
    if tokens.shape != (n_steps,):
        raise ValueError(f"need {n_steps} token ids, got shape {tokens.shape}")
    if tokens.size and (tokens.min() < 0 or tokens.max() >= vocab):
        raise ValueError("token id out of range")
    payload = logits.astype("<f4")
    if not np.isfinite(payload).all():
        raise ValueError("logits must be finite at float32 precision")
    blob = _HEADER.pack(MAGIC, VERSION, n_steps, vocab, DTYPE_F32)
    blob += payload.tobytes() + tokens.astype("<u4").tobytes()
    Path(path).write_bytes(blob)


def read_tlog(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a dump back; used by the alignment self-check."""
    data = Path(path).read_bytes()
    magic, version, n_steps, vocab, dtype_code = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION or dtype_code != DTYPE_F32:
        raise ValueError("not a TLOG v1 float32 file")
    expected = _HEADER.size + 4 * n_steps * vocab + 4 * n_steps
    if len(data) != expected:
        raise ValueError("size does not match header")
    off = _HEADER.size
    logits = np.frombuffer(data, dtype="<f4", count=n_steps * vocab, offset=off)
    tokens = np.frombuffer(data, dtype="<u4", count=n_steps, offset=off + 4 * n_steps * vocab)
    return logits.reshape(n_steps, vocab).astype(np.float64), tokens.astype(np.int64)
