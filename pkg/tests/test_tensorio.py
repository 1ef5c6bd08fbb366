import numpy as np
import pytest

from stereosync.tensorio import (
    MalformedHeaderError,
    TensorFileError,
    TruncatedPayloadError,
    UnsupportedDtypeError,
    load_tensor,
    save_tensor,
)


def test_round_trip_zeros(tmp_path):
    path = tmp_path / "t.sstf"
    save_tensor(path, np.zeros((2, 3), dtype=np.float32))
    out = load_tensor(path)
    assert out.shape == (2, 3)
    assert np.array_equal(out, np.zeros((2, 3), dtype=np.float32))


def test_round_trip_singleton(tmp_path):
    path = tmp_path / "t.sstf"
    save_tensor(path, np.array([7.5], dtype=np.float32))
    assert np.array_equal(load_tensor(path), np.array([7.5], dtype=np.float32))


def test_round_trip_bit_exact_random(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.normal(size=(4, 5, 6)).astype(np.float32)
    path = tmp_path / "t.sstf"
    save_tensor(path, arr)
    out = load_tensor(path)
    assert out.dtype == np.float32
    assert np.array_equal(out.view(np.uint32), arr.view(np.uint32))


def test_truncated_payload(tmp_path):
    path = tmp_path / "t.sstf"
    save_tensor(path, np.ones((2, 2), dtype=np.float32))
    blob = path.read_bytes()
    path.write_bytes(blob[:-4])  # drop one value: 3 remain for dims (2,2)
    with pytest.raises(TruncatedPayloadError):
        load_tensor(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "t.sstf"
    path.write_bytes(b"NOPE" + bytes(16))
    with pytest.raises(MalformedHeaderError):
        load_tensor(path)


def test_unsupported_dtype(tmp_path):
    path = tmp_path / "t.sstf"
    save_tensor(path, np.ones(2, dtype=np.float32))
    blob = bytearray(path.read_bytes())
    blob[5] = 9
    path.write_bytes(bytes(blob))
    with pytest.raises(UnsupportedDtypeError):
        load_tensor(path)


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "t.sstf"
    save_tensor(path, np.ones(2, dtype=np.float32))
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(TensorFileError):
        load_tensor(path)


def test_save_rejects_bad_payload(tmp_path):
    with pytest.raises(ValueError):
        save_tensor(tmp_path / "a.sstf", np.empty((0, 3)))
    with pytest.raises(ValueError):
        save_tensor(tmp_path / "b.sstf", np.array([np.nan]))
