"""DCGF container round trips."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcglab.frames import (FormatError, decode_codes, decode_mask,
                           encode_codes, encode_mask, load_codes,
                           load_rgb_sidecar, save_codes)


@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(1, 40))
@settings(max_examples=30, deadline=None)
def test_roundtrip(seed, h, w):
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, 64, size=(h, w)).astype(np.uint8)
    assert np.array_equal(decode_codes(encode_codes(codes)), codes)


def test_header_layout():
    codes = np.arange(6, dtype=np.uint8).reshape(2, 3)
    data = encode_codes(codes)
    assert data[:4] == b"DCGF"
    assert data[4:6] == (3).to_bytes(2, "big")   # width
    assert data[6:8] == (2).to_bytes(2, "big")   # height
    assert data[8:] == bytes(range(6))


def test_bad_container():
    with pytest.raises(FormatError):
        decode_codes(b"NOPE" + bytes(10))
    with pytest.raises(FormatError):
        decode_codes(encode_codes(np.zeros((2, 2), np.uint8))[:-1])


def test_mask_roundtrip():
    mask = np.eye(5, dtype=bool)
    assert np.array_equal(decode_mask(encode_mask(mask)), mask)


def test_file_io_with_rgb_sidecar(tmp_path):
    codes = np.random.default_rng(1).integers(0, 64, (13, 17)).astype(np.uint8)
    rgb = np.random.default_rng(2).integers(0, 256, (13, 17, 3)).astype(np.uint8)
    p = tmp_path / "frame.dcgf"
    save_codes(p, codes, rgb=rgb)
    assert np.array_equal(load_codes(p), codes)
    sidecar = p.with_suffix(p.suffix + ".rgb")
    assert sidecar.exists()
    assert np.array_equal(load_rgb_sidecar(sidecar, 17, 13), rgb)
