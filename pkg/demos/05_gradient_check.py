#!/usr/bin/env python3
"""Verify every analytic gradient against central finite differences.

Each layer's backward pass is hand-derived; this script confirms them in
double precision against (f(x+h) - f(x-h)) / 2h with h = 1e-5, both layer
by layer and through each full architecture at reduced size. Stochastic
layers (dropout) are re-seeded per evaluation so the objective stays a
deterministic function of the parameters.
"""
import time

import numpy as np

from offlang.models import build_blstm_attention, build_blstm_bgru, build_cnn
from offlang.nn import (
    AdditiveAttention,
    AvgOverTime,
    BiGRU,
    BiLSTM,
    Conv1D,
    Dense,
    Dropout,
    Embedding,
    MaxOverTime,
    check_layer_gradients,
    check_model_gradients,
)

rng = np.random.default_rng(0)
x = rng.normal(size=(3, 12, 6))
lengths = np.array([12, 7, 0])  # includes a fully padded row on purpose

print("layer-by-layer (max relative error, tolerance 1e-5):")
cases = [
    ("dense/relu", Dense(6, 4, "relu", rng=np.random.default_rng(1), dtype=np.float64),
     x[:, 0, :], None),
    ("dense/sigmoid", Dense(6, 4, "sigmoid", rng=np.random.default_rng(2), dtype=np.float64),
     x[:, 0, :], None),
    ("conv1d w=3", Conv1D(6, 8, 3, rng=np.random.default_rng(3), dtype=np.float64), x, lengths),
    ("max-over-time", MaxOverTime(), x, lengths),
    ("avg-over-time", AvgOverTime(), x, lengths),
    ("attention", AdditiveAttention(6, 4, rng=np.random.default_rng(4), dtype=np.float64),
     x, lengths),
    ("bilstm d=0.2", BiLSTM(6, 4, 0.2, rng=np.random.default_rng(5), dtype=np.float64),
     x, lengths),
    ("bigru d=0.3", BiGRU(6, 4, 0.3, rng=np.random.default_rng(6), dtype=np.float64),
     x, lengths),
    ("dropout 0.3", Dropout(0.3), x, lengths),
    ("embedding+wd", Embedding(np.random.default_rng(7).normal(scale=0.3, size=(12, 6)), 0.3),
     np.random.default_rng(8).integers(0, 12, size=(3, 12)), lengths),
]
for name, layer, data, lens in cases:
    err = check_layer_gradients(layer, data, lens, rng_seed=17)
    print(f"  {name:<14} {err:.2e}")

print("\nfull architectures at reduced size (8 filters / 4 units, length 12):")
matrix = rng.normal(scale=0.3, size=(12, 6))
X = rng.integers(0, 12, size=(3, 12))
seq_lengths = np.array([12, 7, 3])
y = np.array([1.0, 0.0, 1.0])
for name, model in [
    ("cnn", build_cnn(matrix, filters=8, hidden=8, expected_dim=6, seed=21, dtype=np.float64)),
    ("blstm_att", build_blstm_attention(matrix, units=4, hidden=8, expected_dim=6, seed=22,
                                        dtype=np.float64)),
    ("blstm_bgru", build_blstm_bgru(matrix, units=4, hidden=8, expected_dim=6, seed=23,
                                    dtype=np.float64)),
]:
    params = sum(p.value.size for p in model.parameters())
    started = time.perf_counter()
    err = check_model_gradients(model, X, seq_lengths, y, rng_seed=29)
    print(f"  {name:<11} {params:>4} params  {err:.2e}  ({time.perf_counter() - started:.1f}s)")
