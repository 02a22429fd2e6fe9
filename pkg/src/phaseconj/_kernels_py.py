"""Pure-numpy sampling kernels; fallback for the compiled ``_kernels`` module.

Both implementations share one contract:

* block ``j`` of stream ``(key0, key1)`` is Philox4x64-10 evaluated at counter
  ``j`` and yields four 64-bit words;
* each pair of words ``(w0, w1)`` becomes two standard normals by Box-Muller
  with ``u1 = ((w0 >> 11) + 1) / 2**53`` and ``u2 = (w1 >> 11) / 2**53``;
* shot ``s`` needing ``m`` normals owns blocks ``s*bps .. s*bps + bps - 1``
  with ``bps = ceil(m / 4)``.

Here the Philox bits come from :class:`numpy.random.Philox`, which makes this
module an independent check on the hand-written compiled generator.
"""

import numpy as np

_COUNTER_MOD = 1 << 256
_INV_2_53 = 1.0 / 9007199254740992.0


def philox_blocks(key0, key1, start, n):
    """Raw Philox4x64-10 output for counters ``start .. start + n - 1``, shape (n, 4)."""
    key = np.array([key0, key1], dtype=np.uint64)
    # numpy increments the counter before producing each block
    bg = np.random.Philox(key=key, counter=(int(start) - 1) % _COUNTER_MOD)
    return bg.random_raw(4 * int(n)).reshape(int(n), 4)


def _box_muller(words):
    w = words.reshape(-1, 2)
    u1 = ((w[:, 0] >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV_2_53
    u2 = (w[:, 1] >> np.uint64(11)).astype(np.float64) * _INV_2_53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)]).reshape(-1)


def standard_normals(key0, key1, start, n, m):
    """Standard normals for shots ``start .. start + n - 1``, shape (n, m)."""
    bps = (m + 3) // 4
    words = philox_blocks(key0, key1, int(start) * bps, int(n) * bps)
    z = _box_muller(words).reshape(int(n), 4 * bps)
    return np.ascontiguousarray(z[:, :m])


def affine_moments(key0, key1, start, n, offset, B):
    """Mean and scatter matrix of ``offset + B z`` over ``n`` shots.

    Returns ``(mean, m2)`` with ``m2 = sum_s (y_s - mean)(y_s - mean)^T``.
    """
    offset = np.asarray(offset, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    z = standard_normals(key0, key1, start, n, B.shape[1])
    y = z @ B.T + offset
    mean = y.mean(axis=0)
    d = y - mean
    return mean, d.T @ d
