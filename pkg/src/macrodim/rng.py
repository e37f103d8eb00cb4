"""Counter-based Gaussian streams.

Every random draw in this package is addressed by (seed, stream_id, counter):
uniforms come from a Philox counter generator keyed by (seed, stream_id), and
standard normals are their inverse-CDF images.  This makes any slice of a
stream reproducible without generating its prefix, so simulations can be
chunked or parallelized freely without changing a single output value.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

from .errors import ConfigError

_TWO64 = 1 << 64

# Philox-4x64 emits four 64-bit words per counter position; ``advance`` moves
# whole positions, so sub-position offsets are handled by discarding draws.
_WORDS_PER_COUNTER = 4


def check_key_word(value, name) -> int:
    value = int(value)
    if not 0 <= value < _TWO64:
        raise ConfigError(f"{name} must be a 64-bit unsigned integer, got {value}")
    return value


def _generator_at(seed: int, stream_id: int, offset: int) -> tuple[Generator, int]:
    """Generator positioned so the next draws are offsets ``offset``, ``offset+1``, ...

    Returns the generator and the number of leading draws to discard.
    """
    if offset < 0:
        raise ConfigError(f"stream offset must be nonnegative, got {offset}")
    key = np.array(
        [check_key_word(seed, "seed"), check_key_word(stream_id, "stream_id")],
        dtype=np.uint64,
    )
    bg = Philox(key=key)
    positions, skip = divmod(offset, _WORDS_PER_COUNTER)
    bg.advance(positions)
    return Generator(bg), skip


def uniforms(seed, stream_id, offset, count, out=None) -> np.ndarray:
    """``count`` uniforms on (0, 1) at draw offsets ``offset .. offset+count-1``.

    Values are (m + 1/2) * 2**-53 for a 53-bit integer m, so 0 and 1 are
    never produced and the inverse normal CDF below stays finite.
    """
    gen, skip = _generator_at(seed, stream_id, offset)
    if skip:
        gen.random(skip)
    if out is None:
        out = np.empty(count, dtype=np.float64)
    gen.random(out=out[:count])
    u = out[:count]
    u += 2.0**-54
    return u


def standard_normals(seed, stream_id, offset, count, out=None) -> np.ndarray:
    """Standard normals obtained by inverse CDF from :func:`uniforms`."""
    u = uniforms(seed, stream_id, offset, count, out=out)
    return ndtri(u, out=u)
