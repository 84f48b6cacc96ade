"""Versioned binary model container.

Layout: 4-byte magic, little-endian uint32 format version, uint64 JSON
header length, the UTF-8 JSON header, then the raw parameter arrays
concatenated in declaration order as little-endian 32-bit floats. The
header records the architecture tag, layer configs, parameter shapes, the
sequence length, and the vocabulary, so a write/read round trip is exact.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from . import layers as L

MAGIC = b"OFNN"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """The file is not a valid model container."""


def _build_layer(config: dict, dtype=np.float32):
    kind = config.get("type")
    if kind == "embedding":
        matrix = np.zeros((config["vocab_size"], config["dim"]), dtype=dtype)
        return L.Embedding(matrix, config["word_dropout"])
    if kind == "dropout":
        return L.Dropout(config["rate"])
    if kind == "dense":
        return L.Dense(config["in_dim"], config["units"], config["activation"], rng=None, dtype=dtype)
    if kind == "conv1d":
        return L.Conv1D(config["in_dim"], config["filters"], config["width"], rng=None, dtype=dtype)
    if kind == "max_over_time":
        return L.MaxOverTime()
    if kind == "avg_over_time":
        return L.AvgOverTime()
    if kind == "attention":
        return L.AdditiveAttention(config["in_dim"], config["units"], rng=None, dtype=dtype)
    if kind == "bilstm":
        return L.BiLSTM(
            config["in_dim"], config["units"], config["dropout"], config["return_sequences"],
            rng=None, dtype=dtype,
        )
    if kind == "bigru":
        return L.BiGRU(config["in_dim"], config["units"], config["dropout"], rng=None, dtype=dtype)
    if kind == "parallel":
        return L.ParallelConcat(
            [[_build_layer(s, dtype) for s in branch] for branch in config["branches"]]
        )
    raise ModelFormatError(f"unknown layer type in model file: {kind!r}")


def save_model(path, model: L.ModelGraph, vocabulary: dict[str, int], max_len: int):
    """Write the model; parameters are stored as little-endian float32."""
    params = model.parameters()
    header = {
        "format_version": FORMAT_VERSION,
        "architecture": model.architecture,
        "max_len": int(max_len),
        "layers": [layer.config() for layer in model.layers],
        "parameters": [{"name": p.name, "shape": list(p.value.shape)} for p in params],
        "vocabulary": dict(vocabulary),
    }
    header_bytes = json.dumps(header, ensure_ascii=False).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for p in params:
            fh.write(np.ascontiguousarray(p.value, dtype="<f4").tobytes())


def load_model(path):
    """Read a model container; returns (model, vocabulary, max_len)."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ModelFormatError(f"{path}: bad magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"{path}: unsupported format version {version}")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        model = L.ModelGraph(
            header["architecture"], [_build_layer(c) for c in header["layers"]]
        )
        params = model.parameters()
        declared = header["parameters"]
        if len(declared) != len(params):
            raise ModelFormatError(f"{path}: parameter list does not match architecture")
        for p, meta in zip(params, declared):
            shape = tuple(meta["shape"])
            if p.value.shape != shape:
                raise ModelFormatError(
                    f"{path}: shape mismatch for {meta['name']}: "
                    f"{shape} in header vs {p.value.shape} in graph"
                )
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            raw = fh.read(count * 4)
            if len(raw) != count * 4:
                raise ModelFormatError(f"{path}: truncated parameter data")
            p.value[...] = np.frombuffer(raw, dtype="<f4").reshape(shape)
        trailing = fh.read(1)
        if trailing:
            raise ModelFormatError(f"{path}: trailing bytes after parameter data")
    vocabulary = {str(k): int(v) for k, v in header["vocabulary"].items()}
    return model, vocabulary, int(header["max_len"])
