"""Compiled twin of :class:`pacfano.fano.FanoDecoder`.

Same demapper schedule, same rules, same cycle accounting, in float64
arithmetic (integer-valued and therefore exact in fixed-point mode).  The
test-suite compares both engines step by step.

The demapper is written inline in the frame loop: a helper taking the
dozen work arrays as arguments costs more per call than the LLR updates.
"""

import math

import numba as nb
import numpy as np

from .channel import config_format
from .fano import BMU_CYCLES, FCU_CYCLES, DecodeResult

LN2 = math.log(2.0)
TRACE_COLS = 7  # depth, rule, T, M23, M1, psi, cc


@nb.njit(cache=True, inline="always")
def _clamp(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


@nb.njit(cache=True, inline="always")
def _metric(z, b, u, one, mlo, mhi, float_ref):
    if float_ref:
        x = -z if u == 0 else z
        # 1 - log2(1 + e^x) - b
        return 1.0 - (max(x, 0.0) + math.log1p(math.exp(-abs(x)))) / LN2 - b
    good = _clamp(one - b * one, mlo, mhi)
    bad = _clamp(one - b * one - abs(z), mlo, mhi)
    su = 1 if z < 0 else 0
    return good if u == su else bad


@nb.njit(cache=True)
def decode_kernel(l, a, b, c, delta, one, lo, hi, mlo, mhi, mc, float_ref, explicit,
                  literal, trace):
    """One frame.  ``mc < 0`` means no cycle budget.

    Returns (v, cc, timed_out, pd, fcu, bmu, steps, backward, ntrace).
    """
    N = l.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    h = c.shape[0] - 1

    # demapper storage
    stages = np.zeros((n + 1, N))
    for j in range(N):
        stages[0, j] = l[j]
    start = np.full(n + 1, -1, np.int64)
    start[0] = 0
    valid = np.zeros(n + 1, np.bool_)
    valid[0] = True
    zcache = np.zeros(N)
    zvalid = np.zeros(N, np.bool_)
    path = np.zeros(N, np.uint8)
    ps = np.zeros(N, np.uint8)
    known = 0  # prefix length recorded by the demapper
    dirty = N  # lowest path position rewritten since the last request

    # control unit registers
    vpath = np.zeros(N + h, np.uint8)
    upath = np.zeros(N, np.uint8)
    order = np.zeros(N, np.uint8)
    zstore = np.zeros(N)
    visited = np.zeros((N, 2), np.bool_)

    depth = 0
    T = 0.0
    psi = 0
    t = 0
    pd = 0
    fcu = 0
    bmu = 0
    steps = 0
    back = 0
    cc = 0
    timed_out = False
    tcap = trace.shape[0]
    while depth < N:
        i = depth
        M23 = 0.0
        v = 0
        u = 0
        if psi == 0:
            # -- demapper request for z_i under upath[:i]
            m = min(i, known)
            if dirty < m:
                for d in range(1, n + 1):
                    if start[d] > dirty:
                        valid[d] = False
                for j in range(dirty + 1, N):
                    zvalid[j] = False
                m = dirty
            for j in range(m, i):
                path[j] = upath[j]
            dirty = N
            if i > known:
                known = i
            if zvalid[i]:
                z = zcache[i]
            else:
                recompute = False
                for d in range(1, n + 1):
                    size = N >> d
                    s = i & ~(size - 1)
                    if not recompute and valid[d] and start[d] == s:
                        continue
                    recompute = True
                    if s & size:
                        for j in range(size):
                            ps[j] = path[s - size + j]
                        half = 1
                        while half < size:
                            for blk in range(0, size, 2 * half):
                                for j in range(blk, blk + half):
                                    ps[j] ^= ps[j + half]
                            half *= 2
                        for j in range(size):
                            x0 = stages[d - 1, j]
                            x1 = stages[d - 1, size + j]
                            r = x1 - x0 if ps[j] else x1 + x0
                            stages[d, j] = _clamp(r, lo, hi)
                    else:
                        for j in range(size):
                            x0 = stages[d - 1, j]
                            x1 = stages[d - 1, size + j]
                            mag = min(abs(x0), abs(x1))
                            r = -mag if (x0 < 0) != (x1 < 0) else mag
                            if float_ref:
                                r = (r + math.log1p(math.exp(-abs(x0 + x1)))
                                     - math.log1p(math.exp(-abs(x0 - x1))))
                            stages[d, j] = r
                    start[d] = s
                    valid[d] = True
                    pd += 1
                z = stages[n, 0] if n > 0 else stages[0, i]
                zcache[i] = z
                zvalid[i] = True
            zstore[i] = z

            # -- branch metric unit
            u0 = 0
            for j in range(1, h + 1):
                u0 ^= c[j] & vpath[h + i - j]
            if a[i] == 0:
                u = u0
            else:
                u = (1 if z < 0 else 0) ^ t
            v = u ^ u0
            M23 = _metric(z, b[i], u, one, mlo, mhi, float_ref)
            bmu += BMU_CYCLES
        M1 = 0.0
        if i > 0:
            M1 = _metric(zstore[i - 1], b[i - 1], upath[i - 1], one, mlo, mhi, float_ref)
        slot = t if a[i] else 0
        if explicit:
            new = not visited[i, slot]
        else:
            new = T + delta > 0

        # -- rule evaluation, mirrors fano.fano_step
        if psi == 0 and M23 >= T:
            if new:
                tight = T + delta - M23
                if literal or tight <= 0:
                    T = tight
                else:
                    T = T - M23
                rule = 0
            else:
                T = T - M23
                rule = 1
        elif i == 0 or M1 + T > 0:
            T = T - delta
            rule = 2
        elif a[i - 1] != 0 and order[i - 1] == 0:
            T = T + M1
            rule = 3
        else:
            T = T + M1
            rule = 4
        fcu += FCU_CYCLES
        steps += 1

        if rule <= 1:
            if explicit and vpath[h + i] != v:
                for j in range(i + 1, N):
                    visited[j, 0] = False
                    visited[j, 1] = False
            visited[i, slot] = True
            if i < known and u != path[i] and i < dirty:
                dirty = i
            vpath[h + i] = v
            upath[i] = u
            order[i] = t if a[i] else 2
            depth += 1
            t = 0
            psi = 0
        elif rule == 2:
            psi = 0
            t = 0
        elif rule == 3:
            depth -= 1
            psi = 0
            t = 1
            back += 1
        else:
            depth -= 1
            psi = 1
            back += 1
        cc = pd + fcu + bmu
        if steps <= tcap:
            row = steps - 1
            trace[row, 0] = i
            trace[row, 1] = rule
            trace[row, 2] = T
            trace[row, 3] = M23
            trace[row, 4] = M1
            trace[row, 5] = psi
            trace[row, 6] = cc
        if depth < N and mc >= 0 and cc > mc:
            timed_out = True
            break
    out = np.zeros(N, np.uint8)
    for j in range(depth if timed_out else N):
        out[j] = vpath[h + j]
    return out, cc, timed_out, pd, fcu, bmu, steps, back, min(steps, tcap)


@nb.njit(cache=True)
def decode_block_kernel(L, a, b, c, delta, one, lo, hi, mlo, mhi, mc, float_ref, explicit,
                        literal):
    F, N = L.shape
    V = np.zeros((F, N), np.uint8)
    counters = np.zeros((F, 7), np.int64)  # cc, timeout, pd, fcu, bmu, steps, backward
    empty = np.zeros((0, TRACE_COLS))
    for k in range(F):
        v, cc, to, pd, fcu, bm, steps, back, _ = decode_kernel(
            L[k], a, b, c, delta, one, lo, hi, mlo, mhi, mc, float_ref, explicit, literal, empty)
        V[k] = v
        counters[k, 0] = cc
        counters[k, 1] = to
        counters[k, 2] = pd
        counters[k, 3] = fcu
        counters[k, 4] = bm
        counters[k, 5] = steps
        counters[k, 6] = back
    return V, counters


def kernel_args(config):
    """Positional parameters shared by both kernel entry points."""
    if config.float_ref:
        delta, one = float(config.delta), 1.0
        lo, hi, mlo, mhi = -np.inf, np.inf, -np.inf, np.inf
    else:
        fmt = config_format(config)
        mfmt = fmt.widened(2)
        delta, one = float(config.delta_units), float(config.scale)
        lo, hi, mlo, mhi = float(fmt.lo), float(fmt.hi), float(mfmt.lo), float(mfmt.hi)
    mc = -1 if config.MC is None else int(config.MC)
    return (np.ascontiguousarray(config.A, dtype=np.uint8),
            np.ascontiguousarray(config.b, dtype=np.float64),
            np.ascontiguousarray(config.c, dtype=np.uint8),
            delta, one, lo, hi, mlo, mhi, mc, bool(config.float_ref),
            config.novelty == "explicit", bool(config.literal_rule0))


def decode_frame(l, config, trace_capacity: int = 0) -> DecodeResult:
    trace = np.zeros((trace_capacity, TRACE_COLS))
    v, cc, to, pd, fcu, bm, steps, back, nt = decode_kernel(
        np.ascontiguousarray(l, dtype=np.float64), *kernel_args(config), trace)
    res = DecodeResult(v=v, cc=int(cc), timed_out=bool(to), pd_cycles=int(pd),
                       fcu_cycles=int(fcu), bmu_cycles=int(bm), steps=int(steps),
                       backward_moves=int(back))
    res.trace = trace[:nt]
    return res


def decode_block(L, config):
    """Decode a (frames, N) array; returns ``(v_hat, counters)``."""
    return decode_block_kernel(np.ascontiguousarray(L, dtype=np.float64), *kernel_args(config))
