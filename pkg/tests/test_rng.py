"""Counter-addressed uniform and normal streams."""

import numpy as np
import pytest
from scipy.special import ndtri

from macrodim.errors import ConfigError
from macrodim.rng import check_key_word, standard_normals, uniforms


def test_uniforms_deterministic():
    a = uniforms(7, 3, 0, 64)
    b = uniforms(7, 3, 0, 64)
    assert np.array_equal(a, b)


def test_uniforms_offset_slices_match():
    # draws are addressed by counter: any chunking yields the same stream
    whole = uniforms(1, 2, 0, 100)
    parts = np.concatenate([uniforms(1, 2, 0, 37), uniforms(1, 2, 37, 63)])
    assert np.array_equal(whole, parts)


def test_uniforms_odd_offsets():
    # offsets that are not multiples of the generator word count still align
    whole = uniforms(5, 0, 0, 23)
    for off in (1, 2, 3, 5, 9):
        assert np.array_equal(whole[off:], uniforms(5, 0, off, 23 - off))


def test_streams_differ():
    a = uniforms(1, 0, 0, 32)
    b = uniforms(1, 1, 0, 32)
    c = uniforms(2, 0, 0, 32)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_uniforms_open_interval_and_lattice():
    u = uniforms(3, 0, 0, 4096)
    assert u.min() > 0.0
    assert u.max() < 1.0
    # values are (m + 1/2) * 2^-53 for integer m
    m = u * 2.0**53 - 0.5
    assert np.array_equal(m, np.round(m))


def test_normals_are_inverse_cdf_of_uniforms():
    u = uniforms(11, 4, 0, 128)
    z = standard_normals(11, 4, 0, 128)
    assert np.allclose(z, ndtri(u), rtol=0, atol=0)


def test_normals_offset_slices_match():
    whole = standard_normals(9, 1, 0, 50)
    assert np.array_equal(whole[5:], standard_normals(9, 1, 5, 45))


def test_normals_moments():
    # 10^6 draws: sample mean within 0.005, variance within 1 +- 0.01
    z = standard_normals(0, 0, 0, 1_000_000)
    assert np.isfinite(z).all()
    assert abs(z.mean()) < 0.005
    assert abs(z.var() - 1.0) < 0.01


def test_out_buffer_reused():
    buf = np.empty(16)
    z = standard_normals(1, 0, 0, 16, out=buf)
    assert z.base is buf or z is buf


def test_key_word_validation():
    assert check_key_word(2**64 - 1, "seed") == 2**64 - 1
    with pytest.raises(ConfigError):
        check_key_word(-1, "seed")
    with pytest.raises(ConfigError):
        check_key_word(2**64, "stream_id")
    with pytest.raises(ConfigError):
        uniforms(0, 0, -1, 4)
