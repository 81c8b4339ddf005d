"""Counter-based random streams for reproducible parallel simulation.

Every simulated path owns an independent stream keyed by
``(master_seed, path_index)``, so estimates cannot depend on scheduling,
chunking, or worker count.  The generator is the ten-round Philox 4x64
block cipher.  Its raw 64-bit output is bit-identical to numpy's
``Philox`` bit generator for the same key, which pins this vectorized
implementation against an independently maintained reference; the
uniform mapping ``(word >> 11) * 2**-53`` matches numpy's as well.

The engine draws in fixed pairs: step ``s`` of a path consumes draws
``2s`` and ``2s + 1`` whether or not the second draw is used.  Keeping
the draw position a function of the step index alone lets the
vectorized engine and the event-logging reference walk identical
streams.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH11 = np.uint64(11)
_UNIT = 2.0**-53


def _mulhilo(a, mult):
    """Full 128-bit product of ``a`` with a constant, as (high, low) words."""
    lo = a * mult
    a_hi = a >> _SH32
    a_lo = a & _MASK32
    m_hi = mult >> _SH32
    m_lo = mult & _MASK32
    t = a_lo * m_lo
    w = a_hi * m_lo + (t >> _SH32)
    v = a_lo * m_hi + (w & _MASK32)
    hi = a_hi * m_hi + (w >> _SH32) + (v >> _SH32)
    return hi, lo


def philox_block(key0, key1, c0, c1=None, c2=None, c3=None):
    """Encrypt one 256-bit counter block per array row.

    Args:
        key0: First key word, uint64 array or scalar.
        key1: Second key word.
        c0: Counter word 0 (the block index in stream use).
        c1: Counter words 1..3; zero when omitted.
        c2: See ``c1``.
        c3: See ``c1``.

    Returns:
        Tuple of four uint64 arrays, the cipher output words in numpy's
        buffer order.
    """
    x0 = np.asarray(c0, dtype=np.uint64)
    zero = np.zeros_like(x0)
    x1 = zero if c1 is None else np.asarray(c1, dtype=np.uint64)
    x2 = zero if c2 is None else np.asarray(c2, dtype=np.uint64)
    x3 = zero if c3 is None else np.asarray(c3, dtype=np.uint64)
    k0 = np.asarray(key0, dtype=np.uint64)
    k1 = np.asarray(key1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for _ in range(10):
            hi0, lo0 = _mulhilo(x0, _M0)
            hi1, lo1 = _mulhilo(x2, _M1)
            x0 = hi1 ^ x1 ^ k0
            x1 = lo1
            x2 = hi0 ^ x3 ^ k1
            x3 = lo0
            k0 = k0 + _W0
            k1 = k1 + _W1
    return x0, x1, x2, x3


def raw_words(master_seed, path_index, n_words):
    """First ``n_words`` raw 64-bit outputs of one path's stream.

    Matches ``numpy.random.Philox(key=[master_seed, path_index])``:
    numpy advances the counter before encrypting, so stream block ``i``
    is the cipher applied to counter word ``i + 1``.
    """
    n_blocks = -(-n_words // 4)
    c0 = np.arange(1, n_blocks + 1, dtype=np.uint64)
    k0 = np.full(n_blocks, master_seed, dtype=np.uint64)
    k1 = np.full(n_blocks, path_index, dtype=np.uint64)
    words = np.stack(philox_block(k0, k1, c0), axis=1).ravel()
    return words[:n_words]


def uniforms_from_words(words):
    """Map raw 64-bit words to doubles in [0, 1) the way numpy does."""
    return (words >> _SH11) * _UNIT


class PathStreams:
    """Buffered per-path uniform streams advancing in lockstep.

    All live rows sit at the same draw position: they start at draw zero
    together and consume one pair per step, and rows that finish are
    dropped via :meth:`keep` rather than idled.  The buffer therefore
    refills on a shared schedule, block-aligned by construction.
    """

    def __init__(self, master_seed, path_indices, buffer_blocks=8):
        if buffer_blocks < 1:
            raise ValueError("buffer_blocks must be at least 1")
        self._seed = int(master_seed)
        self._k1 = np.asarray(path_indices, dtype=np.uint64).copy()
        self._span = 4 * int(buffer_blocks)
        self._buf = np.empty((self._k1.size, 0))
        self._next = 0
        self._base = 0

    @property
    def size(self):
        return self._k1.size

    def _refill(self):
        n = self._k1.size
        blocks = self._span // 4
        first = self._next // 4
        c0 = (np.arange(first + 1, first + blocks + 1, dtype=np.uint64)[None, :]
              * np.ones((n, 1), dtype=np.uint64)).ravel()
        k1 = np.repeat(self._k1, blocks)
        k0 = np.full(k1.size, self._seed, dtype=np.uint64)
        words = np.stack(philox_block(k0, k1, c0), axis=1)
        self._buf = uniforms_from_words(words.reshape(n, self._span))
        self._base = self._next

    def uniform_pair(self):
        """Two uniforms per live row, advancing every stream by two draws."""
        pos = self._next - self._base
        if self._buf.shape[1] == 0 or pos >= self._span:
            self._refill()
            pos = 0
        self._next += 2
        return self._buf[:, pos], self._buf[:, pos + 1]

    def keep(self, mask):
        """Drop finished rows; the survivors keep their stream positions."""
        self._k1 = self._k1[mask]
        if self._buf.shape[1]:
            self._buf = self._buf[mask]


def exponential_from_uniform(u):
    """Unit-exponential variates from uniforms in [0, 1)."""
    return -np.log1p(-u)
