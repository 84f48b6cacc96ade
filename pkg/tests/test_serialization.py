import numpy as np
import pytest

from offlang.models import build_blstm_attention, build_blstm_bgru, build_cnn
from offlang.nn import ModelFormatError, load_model, predict_proba, save_model


def small_models(tiny_matrix):
    return [
        build_cnn(tiny_matrix, filters=4, hidden=4, expected_dim=16, seed=1),
        build_blstm_attention(tiny_matrix, units=3, hidden=4, expected_dim=16, seed=2),
        build_blstm_bgru(tiny_matrix, units=3, hidden=4, expected_dim=16, seed=3),
    ]


@pytest.mark.parametrize("index", [0, 1, 2], ids=["cnn", "blstm_att", "blstm_bgru"])
def test_round_trip_is_bit_exact(tmp_path, tiny_matrix, index):
    model = small_models(tiny_matrix)[index]
    vocab = {"hello": 2, "world": 3}
    path = tmp_path / "model.bin"
    save_model(path, model, vocab, max_len=12)
    loaded, loaded_vocab, max_len = load_model(path)
    assert loaded_vocab == vocab
    assert max_len == 12
    assert loaded.architecture == model.architecture
    for original, restored in zip(model.parameters(), loaded.parameters()):
        assert original.name == restored.name
        assert np.array_equal(original.value, restored.value)
    # a second save byte-matches the first
    second = tmp_path / "model2.bin"
    save_model(second, loaded, loaded_vocab, max_len)
    assert path.read_bytes() == second.read_bytes()


def test_loaded_model_predicts_identically(tmp_path, tiny_matrix):
    model = build_cnn(tiny_matrix, filters=4, hidden=4, expected_dim=16, seed=4)
    X = np.random.default_rng(0).integers(0, 20, size=(5, 12)).astype(np.int32)
    lengths = np.array([12, 8, 4, 2, 0], dtype=np.int32)
    before = predict_proba(model, X, lengths)
    path = tmp_path / "m.bin"
    save_model(path, model, {"w": 2}, max_len=12)
    loaded, _, _ = load_model(path)
    after = predict_proba(loaded, X, lengths)
    assert np.array_equal(before, after)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(ModelFormatError, match="magic"):
        load_model(path)


def test_truncated_file_rejected(tmp_path, tiny_matrix):
    model = build_cnn(tiny_matrix, filters=4, hidden=4, expected_dim=16, seed=4)
    path = tmp_path / "m.bin"
    save_model(path, model, {"w": 2}, max_len=12)
    blob = path.read_bytes()
    path.write_bytes(blob[:-10])
    with pytest.raises(ModelFormatError, match="truncated"):
        load_model(path)
