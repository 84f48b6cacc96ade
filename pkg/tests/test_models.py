import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from offlang.data import Dataset, DatasetRecord
from offlang.embeddings import Vocabulary
from offlang.models import (
    PredictionResult,
    build_blstm_attention,
    build_blstm_bgru,
    build_cnn,
    encode_dataset,
    ensemble_predict,
    ensemble_proba,
    label_for,
    predict,
)
from offlang.nn import AdditiveAttention, Dense, ParallelConcat, predict_proba


def test_builders_reject_wrong_dim(tiny_matrix):
    for builder in (build_cnn, build_blstm_attention, build_blstm_bgru):
        with pytest.raises(ValueError):
            builder(tiny_matrix)  # default expected_dim is 200, matrix is 16-wide


def test_cnn_feature_widths(tiny_matrix):
    model = build_cnn(tiny_matrix, expected_dim=16)
    concat = next(l for l in model.layers if isinstance(l, ParallelConcat))
    assert len(concat.branches) == 3
    dense = next(l for l in model.layers if isinstance(l, Dense))
    assert dense.in_dim == 3 * 256 == 768
    assert dense.units == 256


def test_blstm_attention_widths(tiny_matrix):
    model = build_blstm_attention(tiny_matrix, expected_dim=16)
    attention = next(l for l in model.layers if isinstance(l, AdditiveAttention))
    assert attention.in_dim == 2 * 64 == 128
    dense = next(l for l in model.layers if isinstance(l, Dense))
    assert dense.in_dim == 128 and dense.units == 128


def test_blstm_bgru_pooled_width(tiny_matrix):
    model = build_blstm_bgru(tiny_matrix, expected_dim=16)
    dense = next(l for l in model.layers if isinstance(l, Dense))
    assert dense.in_dim == 128 + 128 == 256


def test_forward_probabilities_and_determinism(tiny_matrix):
    model = build_cnn(tiny_matrix, filters=4, hidden=4, expected_dim=16, seed=0)
    X = np.random.default_rng(1).integers(0, 20, size=(6, 12)).astype(np.int32)
    lengths = np.array([12, 9, 5, 3, 1, 0], dtype=np.int32)
    p1 = predict_proba(model, X, lengths)
    p2 = predict_proba(model, X, lengths)
    assert np.array_equal(p1, p2)
    assert np.all((p1 > 0.0) & (p1 < 1.0))


def test_attention_model_handles_fully_padded_input(tiny_matrix):
    model = build_blstm_attention(tiny_matrix, units=3, hidden=4, expected_dim=16, seed=0)
    X = np.zeros((1, 12), dtype=np.int32)
    p = predict_proba(model, X, np.array([0], dtype=np.int32))
    assert 0.0 < p[0] < 1.0


def test_forward_shape_errors_name_the_layer(tiny_matrix):
    from offlang.nn import ShapeError

    model = build_cnn(tiny_matrix, filters=4, hidden=4, expected_dim=16, seed=0)
    with pytest.raises(ShapeError, match=r"layer 0 \(Embedding\)"):
        model.forward(np.array([[999]]), np.array([1]))
    with pytest.raises(ShapeError, match=r"layer 1 \(ParallelConcat\)"):
        # two timesteps cannot host a width-3 convolution window
        model.forward(np.array([[2, 3]]), np.array([2]))
    with pytest.raises(ShapeError):
        model.forward(np.zeros((0, 12), dtype=np.int32), np.zeros(0, dtype=np.int32))


def test_label_threshold():
    assert label_for(0.73) == "OFF"
    assert label_for(0.5) == "OFF"  # boundary belongs to OFF
    assert label_for(0.49) == "NOT"


def test_prediction_result_validation():
    with pytest.raises(ValueError):
        PredictionResult("1", 0.5, "MAYBE")
    with pytest.raises(ValueError):
        PredictionResult("1", 1.5, "OFF")


def records(texts):
    return Dataset(tuple(DatasetRecord(str(i), t) for i, t in enumerate(texts)))


def test_predict_and_singleton_ensemble_agree(tiny_matrix):
    vocab = Vocabulary({"you": 2, "are": 3, "bad": 4})
    model = build_cnn(tiny_matrix, filters=4, hidden=4, expected_dim=16, seed=1)
    ds = records(["you are bad", "totally fine"])
    single = predict(model, ds, vocab, max_len=12)
    triple = ensemble_predict([model, model, model], ds, vocab, max_len=12)
    assert [r.probability for r in single] == [r.probability for r in triple]
    assert [r.label for r in single] == [r.label for r in triple]


def test_ensemble_mean_and_boundary():
    probs = ensemble_proba([np.array([0.9]), np.array([0.2]), np.array([0.4])])
    assert probs[0] == pytest.approx(0.5)
    assert label_for(float(probs[0])) == "OFF"


def test_ensemble_rejects_empty():
    with pytest.raises(ValueError):
        ensemble_proba([])


def test_ensemble_order_invariance_bit_exact():
    members = [np.array([0.13, 0.99]), np.array([0.57, 0.2]), np.array([0.31, 0.44])]
    forward = ensemble_proba(members)
    backward = ensemble_proba(members[::-1])
    rotated = ensemble_proba(members[1:] + members[:1])
    assert np.array_equal(forward, backward)
    assert np.array_equal(forward, rotated)


@given(
    st.lists(
        st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=3, max_size=3),
        min_size=1,
        max_size=6,
    )
)
@settings(max_examples=200, deadline=None)
def test_ensemble_bounded_by_member_envelope(member_rows):
    members = [np.array(row) for row in member_rows]
    mean = ensemble_proba(members)
    stacked = np.stack(members)
    assert np.all(mean >= stacked.min(axis=0))
    assert np.all(mean <= stacked.max(axis=0))


def test_identical_members_bit_identical():
    p = np.array([0.123456789, 0.5, 0.99999], dtype=np.float32)
    for k in (1, 2, 3, 7):
        out = ensemble_proba([p] * k)
        assert np.array_equal(out, p.astype(np.float64))


def test_encode_dataset_labels(tiny_matrix):
    vocab = Vocabulary({"you": 2})
    ds = Dataset(
        (
            DatasetRecord("a", "you", "OFF", "TIN"),
            DatasetRecord("b", "you", "NOT"),
        )
    )
    encoded = encode_dataset(ds, vocab, max_len=4)
    assert encoded.y.tolist() == [1.0, 0.0]
    assert encoded.ids == ("a", "b")
    assert encoded.X.shape == (2, 4)
