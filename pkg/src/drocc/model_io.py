"""Versioned binary model snapshots.

Layout (all little-endian):
    magic   4 bytes  b"DRO1"
    version u32      format version (1)
    act     u32      activation code (0 relu, 1 tanh)
    nlayers u32      number of weight layers
    dims    (nlayers+1) x u32
    payload per layer: weights row-major float64, then biases float64
"""

import os
import struct
import tempfile

import numpy as np

from .errors import ContractError
from .nn import ACTIVATIONS, MlpModel

MAGIC = b"DRO1"
FORMAT_VERSION = 1


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write then rename so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def save_model(model: MlpModel, path) -> None:
    parts = [MAGIC]
    parts.append(struct.pack("<III", FORMAT_VERSION, ACTIVATIONS.index(model.activation), model.n_layers))
    parts.append(struct.pack(f"<{len(model.layer_dims)}I", *model.layer_dims))
    for W, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(W, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    atomic_write_bytes(path, b"".join(parts))


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ContractError(f"{path}: not a model snapshot (bad magic)")
    version, act_code, n_layers = struct.unpack_from("<III", blob, 4)
    if version != FORMAT_VERSION:
        raise ContractError(f"{path}: unsupported snapshot version {version}")
    if act_code >= len(ACTIVATIONS):
        raise ContractError(f"{path}: unknown activation code {act_code}")
    off = 16
    dims = list(struct.unpack_from(f"<{n_layers + 1}I", blob, off))
    off += 4 * (n_layers + 1)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        cnt = fan_in * fan_out
        W = np.frombuffer(blob, dtype="<f8", count=cnt, offset=off).reshape(fan_in, fan_out)
        off += 8 * cnt
        b = np.frombuffer(blob, dtype="<f8", count=fan_out, offset=off)
        off += 8 * fan_out
        weights.append(W.astype(np.float64))
        biases.append(b.astype(np.float64))
    if off != len(blob):
        raise ContractError(f"{path}: trailing bytes in snapshot")
    return MlpModel(dims, ACTIVATIONS[act_code], weights, biases)
