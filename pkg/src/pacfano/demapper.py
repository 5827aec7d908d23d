"""Polar demapper: SC-style LLR computation driven by an external path.

The demapper never decides bits.  It is asked for the LLR ``z_i`` of bit
``i`` given the decoder's current estimates ``u_0 .. u_{i-1}`` and keeps all
intermediate LLRs so that requests may jump backwards when the sequential
decoder backtracks.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import QuantFormat
from .encoder import polar_transform


class DemapperError(RuntimeError):
    """A request the demapper cannot serve; indicates a decoder bug."""


def _sign(x):
    # s(l) = 0 for l >= 0, so zero counts as positive
    return np.where(np.asarray(x) < 0, -1, 1)


def f_min_sum(a, b, fmt: QuantFormat | None = None):
    r = _sign(a) * _sign(b) * np.minimum(np.abs(a), np.abs(b))
    if np.ndim(r) == 0:
        return int(r) if fmt is not None else r.item()
    return r


def boxplus(a, b):
    """Exact check-node LLR combination, 2 atanh(tanh(a/2) tanh(b/2))."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        r = (_sign(a) * _sign(b) * np.minimum(np.abs(a), np.abs(b))
             + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b))))
    return r


def _boxplus_libm(a: float, b: float) -> float:
    r = -min(abs(a), abs(b)) if (a < 0) != (b < 0) else min(abs(a), abs(b))
    return r + math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))


def boxplus_scalarwise(a, b):
    """:func:`boxplus` through libm, bit-identical to the compiled decoder."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.fromiter((_boxplus_libm(x, y) for x, y in zip(a.ravel().tolist(), b.ravel().tolist())),
                      dtype=np.float64, count=a.size)
    return out.reshape(a.shape)


def g_update(a, b, u, fmt: QuantFormat | None = None):
    """b + (1 - 2u) a, saturated to ``fmt`` when given."""
    r = np.asarray(b) + (1 - 2 * np.asarray(u, dtype=np.int64)) * np.asarray(a)
    if fmt is not None:
        return fmt.clamp(r)
    return r if np.ndim(r) else r.item()


class DemapperTree:
    """Staged intermediate-LLR store for one decoding session.

    ``stages[d]`` holds the LLRs of one node at depth ``d`` (``N >> d``
    values); depth 0 is the channel.  ``start[d]`` is the first leaf of the
    stored node.  A node starting at leaf ``s`` depends on ``u_0 .. u_{s-1}``
    only, so a change of ``u_p`` invalidates exactly the nodes (and cached
    ``z`` values) with start > p.

    ``fmt=None`` selects the floating-point reference: exact boxplus and no
    saturation.  Channel LLRs may carry leading batch axes; every frame of
    the batch then follows the same request sequence.
    """

    def __init__(self, N: int, fmt: QuantFormat | None = None):
        if N < 1 or N & (N - 1):
            raise ValueError(f"N must be a power of two, got {N}")
        self.N = N
        self.n = N.bit_length() - 1
        self.fmt = fmt
        self.activations = 0
        self._loaded = False

    def reset(self, l) -> DemapperTree:
        l = np.asarray(l)
        if l.ndim == 0 or l.shape[-1] != self.N:
            raise DemapperError(f"expected {self.N} channel LLRs, got shape {l.shape}")
        dtype = np.float64 if self.fmt is None else np.int64
        lead = l.shape[:-1]
        self.stages = [l.astype(dtype).copy()] + [np.zeros(lead + (self.N >> d,), dtype=dtype)
                                                 for d in range(1, self.n + 1)]
        self.start = [0] + [-1] * self.n
        self.valid = [True] + [False] * self.n
        self.zcache = np.zeros((self.N,) + lead, dtype=dtype)
        self.zvalid = np.zeros(self.N, dtype=bool)
        self.path = np.zeros(self.N, dtype=np.uint8)
        self.known = 0
        self.activations = 0
        self._loaded = True
        return self

    def _f(self, a, b):
        if self.fmt is None:
            return boxplus_scalarwise(a, b)
        return f_min_sum(a, b)

    def _g(self, a, b, p):
        return g_update(a, b, p, self.fmt)

    def _sync(self, i: int, u) -> None:
        m = min(i, self.known)
        diff = np.flatnonzero(self.path[:m] != u[:m])
        if diff.size:
            p = int(diff[0])
            for d in range(1, self.n + 1):
                if self.start[d] > p:
                    self.valid[d] = False
            self.zvalid[p + 1:] = False
        self.path[:i] = u[:i]
        self.known = max(self.known, i)

    def demap(self, i: int, u):
        """LLR of bit ``i`` under prefix ``u[:i]``; returns ``(z, cost)``.

        ``cost`` is the number of stage activations performed (0 on a cache
        hit).
        """
        if not self._loaded:
            raise DemapperError("demap before reset")
        if not 0 <= i < self.N:
            raise DemapperError(f"index {i} out of range for N={self.N}")
        u = np.asarray(u, dtype=np.uint8)
        if u.shape[0] < i:
            raise DemapperError(f"prefix of length {u.shape[0]} cannot condition bit {i}")
        self._sync(i, u)
        if self.zvalid[i]:
            return self._out(self.zcache[i]), 0
        cost = 0
        recompute = False
        for d in range(1, self.n + 1):
            size = self.N >> d
            s = i & ~(size - 1)
            if not recompute and self.valid[d] and self.start[d] == s:
                continue
            recompute = True
            parent = self.stages[d - 1]
            a, b = parent[..., :size], parent[..., size:]
            if s & size:
                ps = polar_transform(self.path[s - size:s])
                self.stages[d] = self._g(a, b, ps)
            else:
                self.stages[d] = self._f(a, b)
            self.start[d] = s
            self.valid[d] = True
            cost += 1
        z = self.stages[self.n][..., 0] if self.n else self.stages[0][..., i]
        self.zcache[i] = z
        self.zvalid[i] = True
        self.activations += cost
        return self._out(z), cost

    @staticmethod
    def _out(z):
        z = np.asarray(z)
        return z.item() if z.ndim == 0 else z.copy()

    def cached(self, i: int):
        if not self.zvalid[i]:
            raise DemapperError(f"z_{i} is not cached")
        return self._out(self.zcache[i])
