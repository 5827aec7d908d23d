"""Independent reference computations used by the tests.

Nothing here imports the package's encoder, demapper or decoder; each oracle
is written from the textbook definition.
"""

import numpy as np


# -- encoding ----------------------------------------------------------------

def kron_matrix(N):
    """F^{(x)n} as a dense 0/1 matrix, F = [[1, 0], [1, 1]]."""
    F = np.array([[1, 0], [1, 1]], dtype=np.int64)
    G = np.ones((1, 1), dtype=np.int64)
    while G.shape[0] < N:
        G = np.kron(G, F)
    return G


def toeplitz_matrix(c, N):
    """Upper-triangular Toeplitz matrix with first row c padded to N."""
    T = np.zeros((N, N), dtype=np.int64)
    for i in range(N):
        for j, cj in enumerate(c):
            if i + j < N:
                T[i, i + j] = cj
    return T


def dense_encode(d, A_idx, c, N):
    v = np.zeros(d.shape[:-1] + (N,), dtype=np.int64)
    v[..., A_idx] = d
    return (v @ toeplitz_matrix(c, N) @ kron_matrix(N)) % 2


# -- successive-cancellation LLRs --------------------------------------------

def _sgn(x):
    return np.where(x < 0, -1, 1)


def sc_llrs(l, u, i, lo=None, hi=None, exact=False):
    """z_i from scratch given the prefix u[:i], by the recursive SC rule.

    ``l`` may be batched over leading axes; ``lo``/``hi`` saturate the
    g-node output (fixed point).  Works on the natural-order tree: the left
    half of a node sees f(a, b), the right half g(a, b, partial sums).
    ``exact`` replaces min-sum by 2 atanh(tanh(a/2) tanh(b/2)).
    """
    l = np.asarray(l)
    N = l.shape[-1]
    if N == 1:
        return l[..., 0]
    half = N // 2
    a, b = l[..., :half], l[..., half:]
    if i < half:
        if exact:
            child = 2 * np.arctanh(np.tanh(a / 2) * np.tanh(b / 2))
        else:
            child = _sgn(a) * _sgn(b) * np.minimum(np.abs(a), np.abs(b))
        return sc_llrs(child, u, i, lo, hi, exact)
    left = np.asarray(u[:half], dtype=np.int64)
    ps = (left @ kron_matrix(half)) % 2
    child = b + (1 - 2 * ps) * a
    if lo is not None:
        child = np.clip(child, lo, hi)
    return sc_llrs(child, u[half:], i - half, lo, hi, exact)


# -- Fano decoder with absolute path metrics ---------------------------------

def table_metric(z, b, u, one, mlo, mhi):
    good = min(max(one - b * one, mlo), mhi)
    bad = min(max(one - b * one - abs(z), mlo), mhi)
    s = 1 if z < 0 else 0
    return good if u == s else bad


def absolute_fano(l, A, b, c, delta, one, lo, hi, mlo, mhi, max_steps=10**6):
    """Classical Fano search on cumulative metrics and an absolute threshold.

    Returns ``(v, steps)`` where ``steps`` lists ``(depth, rule)`` in firing
    order.  Novelty is the classical test: a node is entered for the first
    time iff its path metric lies below ``threshold + delta``.
    """
    N = len(l)
    h = len(c) - 1
    v = np.zeros(N, dtype=np.int64)
    u = np.zeros(N, dtype=np.int64)
    mu = [0] * (N + 1)  # mu[i] = metric of the path node at depth i
    took_ml = [True] * N
    T = 0
    depth, psi, t = 0, 0, 0
    steps = []
    while depth < N:
        i = depth
        if len(steps) >= max_steps:
            raise RuntimeError("absolute_fano did not terminate")
        fwd = None
        if psi == 0:
            z = sc_llrs(np.asarray(l), u, i, lo, hi)
            u0 = 0
            for j in range(1, h + 1):
                if i - j >= 0:
                    u0 ^= c[j] & v[i - j]
            ui = u0 if A[i] == 0 else ((1 if z < 0 else 0) ^ t)
            gamma = table_metric(z, b[i], ui, one, mlo, mhi)
            fwd = (mu[i] + gamma, ui, ui ^ u0)
        if fwd is not None and fwd[0] >= T:
            new = mu[i] < T + delta
            if new:
                # one tightening step per forward move, as in the hardware rule
                if fwd[0] >= T + delta:
                    T += delta
                rule = 0
            else:
                rule = 1
            mu[i + 1], u[i], v[i] = fwd
            took_ml[i] = A[i] == 1 and t == 0
            depth, psi, t = i + 1, 0, 0
        elif i == 0 or mu[i - 1] < T:
            T -= delta
            psi, t = 0, 0
            rule = 2
        elif took_ml[i - 1]:
            depth, psi, t = i - 1, 0, 1
            rule = 3
        else:
            depth, psi = i - 1, 1
            rule = 4
        steps.append((i, rule))
    return v.astype(np.uint8), steps
