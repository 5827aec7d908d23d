"""PAC encoding: data insertion, rate-1 convolution, polar transform.

All functions accept a single word or a batch with words along the last
axis, and return ``uint8`` arrays.
"""

import numpy as np


def _bits(x) -> np.ndarray:
    x = np.asarray(x)
    if x.size and not np.isin(x, (0, 1)).all():
        raise ValueError("expected binary symbols")
    return x.astype(np.uint8)


def _index_set(A) -> np.ndarray:
    """A boolean array is a membership mask; anything else lists indices."""
    A = np.asarray(A)
    if A.dtype == bool:
        return np.flatnonzero(A)
    return np.unique(A.astype(np.intp))


def insert_data(d, A, N: int) -> np.ndarray:
    """Place message bits on the data positions A (in increasing order)."""
    d = _bits(d)
    idx = _index_set(A)
    if d.shape[-1] != idx.size:
        raise ValueError(f"message length {d.shape[-1]} != |A| = {idx.size}")
    v = np.zeros(d.shape[:-1] + (N,), dtype=np.uint8)
    v[..., idx] = d
    return v


def extract_data(v, A) -> np.ndarray:
    v = _bits(v)
    return v[..., _index_set(A)]


def convolve(v, c) -> np.ndarray:
    """u_i = XOR_j c_j v_{i-j}, truncated at the block start (u = v G)."""
    v = _bits(v)
    c = tuple(int(x) for x in c)
    if not c or c[0] != 1:
        raise ValueError("c[0] must be 1")
    u = v.copy()
    N = v.shape[-1]
    for j, cj in enumerate(c[1:], 1):
        if cj and j < N:
            u[..., j:] ^= v[..., :-j]
    return u


def polar_transform(u) -> np.ndarray:
    """x = u F^{(x)n} with F = [[1, 0], [1, 1]], butterfly form."""
    x = _bits(u).copy()
    N = x.shape[-1]
    if N & (N - 1):
        raise ValueError(f"length {N} is not a power of two")
    lead = x.shape[:-1]
    half = 1
    while half < N:
        y = x.reshape(lead + (N // (2 * half), 2, half))
        y[..., 0, :] ^= y[..., 1, :]
        half *= 2
    return x


def encode(d, config) -> np.ndarray:
    v = insert_data(d, config.A.astype(bool), config.N)
    return polar_transform(convolve(v, config.c))
