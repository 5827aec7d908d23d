"""Fano sequential decoder for PAC codes, modelled cycle by cycle.

This module is the readable reference: the branch metric unit, the rule
set of the Fano control unit and a step loop that drives the demapper.
:func:`decode` runs the compiled kernel in :mod:`pacfano._kernel` by
default, which is checked trace-for-trace against :class:`FanoDecoder`.

Metrics use the relative convention: the current node has metric 0 and the
threshold ``T``, the previous branch metric ``M1`` and the candidate branch
metric ``M23`` are offsets from it.  In fixed-point mode everything is in
integer units of ``1/scale``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import QuantFormat, config_format
from .demapper import DemapperTree

# cycle costs of one control-unit rule evaluation and one branch metric
FCU_CYCLES = 2
BMU_CYCLES = 1

ML, LL, ONLY = 0, 1, 2  # branch_order codes: most likely, least likely, frozen


class Action(enum.IntEnum):
    FORWARD_NEW = 0
    FORWARD_OLD = 1
    LOWER_THRESHOLD = 2
    BACK_TO_LATERAL = 3
    BACK_AGAIN = 4

    @property
    def rule(self) -> int:
        return int(self)


class BranchMetrics(NamedTuple):
    gamma0: float
    gamma1: float


def sign_bit(z) -> int:
    """s(z): 0 for z >= 0, 1 otherwise."""
    return 1 if z < 0 else 0


def metric_calc(z, b: int, one=1, fmt: QuantFormat | None = None) -> BranchMetrics:
    """Hardware-friendly Fano branch metrics for u = 0 and u = 1.

    ``one`` is the representation of 1.0 (``scale`` in fixed point).  The
    sign-matching hypothesis gets ``1 - b``, the other ``1 - |z| - b``.
    """
    good = one - b * one
    bad = good - abs(z)
    if fmt is not None:
        good, bad = fmt.clamp(good), fmt.clamp(bad)
    if sign_bit(z) == 0:
        return BranchMetrics(good, bad)
    return BranchMetrics(bad, good)


def _softplus(x: float) -> float:
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def exact_metric(z: float, b: int) -> BranchMetrics:
    """1 - log2(1 + exp(-(1 - 2u) z)) - b for u = 0, 1 (real valued)."""
    z = float(z)
    ln2 = math.log(2.0)
    return BranchMetrics(1.0 - _softplus(-z) / ln2 - b, 1.0 - _softplus(z) / ln2 - b)


def conv_bit(c, state) -> int:
    """Convolution output for v_i = 0; ``state`` is (v_{i-1}, ..., v_{i-h})."""
    acc = 0
    for cj, vj in zip(c[1:], state):
        acc ^= cj & vj
    return acc


def bmu(z, b: int, a: int, t: int, c, state, one=1, fmt=None, metrics=None):
    """Branch metric unit.

    Returns ``(M23, v, u)`` for the requested branch: the most likely one
    when ``t == 0``, the least likely when ``t == 1``; a frozen level
    (``a == 0``) always yields the ``v = 0`` branch.  Ordering comes from the
    sign of ``z`` alone.
    """
    g = metrics if metrics is not None else metric_calc(z, b, one, fmt)
    u0 = conv_bit(c, state)
    if a == 0:
        u = u0
    else:
        u = sign_bit(z) ^ t
    return g[u], u ^ u0, u


@dataclass
class FanoState:
    """Registers of the control unit (Vreg/Ureg analogues and friends)."""

    N: int
    h: int
    depth: int = 0
    T: float = 0
    psi: int = 0
    t: int = 0
    cc: int = 0
    timeout: bool = False
    vpath: np.ndarray = None
    upath: np.ndarray = None
    branch_order: np.ndarray = None
    zstore: np.ndarray = None
    visited: np.ndarray = None  # explicit novelty marks per (level, branch)
    zdtype: type = np.int64

    def __post_init__(self):
        self.vpath = np.zeros(self.N + self.h, dtype=np.uint8)
        self.upath = np.zeros(self.N, dtype=np.uint8)
        self.branch_order = np.zeros(self.N, dtype=np.uint8)
        self.zstore = np.zeros(self.N, dtype=self.zdtype)
        self.visited = np.zeros((self.N, 2), dtype=bool)

    def conv_state(self):
        """(v_{i-1}, ..., v_{i-h}); Vreg starts with h zeros before v_0."""
        return self.vpath[self.depth:self.depth + self.h][::-1]


def fano_step(depth: int, T, psi: int, M23, M1, delta, *, new_node: bool,
              parent_frozen: bool = False, parent_ml: bool = True,
              literal_rule0: bool = False):
    """One rule evaluation of the control unit; returns ``(Action, T')``.

    ``M23`` is ignored when ``psi == 1`` and ``M1`` when ``depth == 0``.
    ``parent_ml`` tells whether the current node is the most likely child
    of its parent.  The rule-0 tightening by ``delta`` is applied only when
    it keeps the new node at or above the threshold, unless
    ``literal_rule0`` asks for the unconditional form.
    """
    if psi == 0 and M23 >= T:
        if new_node:
            tight = T + delta - M23
            if literal_rule0 or tight <= 0:
                return Action.FORWARD_NEW, tight
            return Action.FORWARD_NEW, T - M23
        return Action.FORWARD_OLD, T - M23
    if depth == 0 or M1 + T > 0:
        return Action.LOWER_THRESHOLD, T - delta
    if not parent_frozen and parent_ml:
        return Action.BACK_TO_LATERAL, T + M1
    return Action.BACK_AGAIN, T + M1


@dataclass
class StepRecord:
    depth: int
    rule: int
    T: float
    M23: float
    M1: float
    psi: int
    cc: int

    def line(self) -> str:
        fmt = lambda x: "-" if x is None else (f"{x:g}" if isinstance(x, float) else str(x))
        return " ".join([f"depth={self.depth}", f"rule={self.rule}", f"T={fmt(self.T)}",
                         f"M23={fmt(self.M23)}", f"M1={fmt(self.M1)}", f"psi={self.psi}",
                         f"cc={self.cc}"])


@dataclass
class DecodeResult:
    v: np.ndarray
    cc: int
    timed_out: bool
    pd_cycles: int = 0
    fcu_cycles: int = 0
    bmu_cycles: int = 0
    steps: int = 0
    backward_moves: int = 0
    trace: list = field(default_factory=list)


class FanoDecoder:
    """Reference decoder: one Python object per session, one call per step.

    ``hook(decoder, record)`` is called after every rule firing, which the
    property tests use to inspect intermediate state.
    """

    def __init__(self, config, hook=None, max_steps: int | None = None):
        self.config = config
        self.fmt = None if config.float_ref else config_format(config)
        self.mfmt = None if self.fmt is None else self.fmt.widened(2)
        self.one = 1.0 if config.float_ref else config.scale
        self.delta = config.delta if config.float_ref else config.delta_units
        self.a = np.asarray(config.A, dtype=np.uint8)
        self.b = np.asarray(config.b, dtype=np.uint8)
        self.hook = hook
        self.max_steps = max_steps
        self.tree = DemapperTree(config.N, self.fmt)

    def _metrics(self, z, b):
        if self.config.float_ref:
            return exact_metric(z, b)
        return metric_calc(z, b, self.one, self.mfmt)

    def decode(self, l, trace: bool = False) -> DecodeResult:
        cfg = self.config
        N, h, c = cfg.N, cfg.h, cfg.c
        mc = math.inf if cfg.MC is None else cfg.MC
        self.tree.reset(l)
        st = self.state = FanoState(N, h, zdtype=np.float64 if cfg.float_ref else np.int64)
        res = DecodeResult(v=None, cc=0, timed_out=False)
        while st.depth < N:
            i = st.depth
            M23 = v = u = None
            if st.psi == 0:
                z, cost = self.tree.demap(i, st.upath)
                st.zstore[i] = z
                res.pd_cycles += cost
                M23, v, u = bmu(z, int(self.b[i]), int(self.a[i]), st.t, c, st.conv_state(),
                                metrics=self._metrics(z, int(self.b[i])))
                res.bmu_cycles += BMU_CYCLES
            M1 = None
            if i > 0:
                M1 = self._metrics(st.zstore[i - 1].item(), int(self.b[i - 1]))[st.upath[i - 1]]
            if cfg.novelty == "explicit":
                new = M23 is not None and not st.visited[i, st.t if self.a[i] else 0]
            else:
                new = st.T + self.delta > 0
            action, T = fano_step(
                i, st.T, st.psi, M23, M1, self.delta, new_node=new,
                parent_frozen=i > 0 and self.a[i - 1] == 0,
                parent_ml=i > 0 and st.branch_order[i - 1] == ML,
                literal_rule0=cfg.literal_rule0)
            res.fcu_cycles += FCU_CYCLES
            res.steps += 1
            st.T = T
            if action in (Action.FORWARD_NEW, Action.FORWARD_OLD):
                if st.vpath[h + i] != v:
                    st.visited[i + 1:] = False
                st.visited[i, st.t if self.a[i] else 0] = True
                st.vpath[h + i] = v
                st.upath[i] = u
                st.branch_order[i] = st.t if self.a[i] else ONLY
                st.depth += 1
                st.t = 0
                st.psi = 0
            elif action == Action.LOWER_THRESHOLD:
                st.psi = 0
                st.t = 0
            elif action == Action.BACK_TO_LATERAL:
                st.depth -= 1
                st.psi = 0
                st.t = 1
                res.backward_moves += 1
            else:
                st.depth -= 1
                st.psi = 1
                res.backward_moves += 1
            st.cc = res.pd_cycles + res.fcu_cycles + res.bmu_cycles
            if trace or self.hook is not None:
                rec = StepRecord(i, action.rule, T, M23, M1, st.psi, st.cc)
                if trace:
                    res.trace.append(rec)
                if self.hook is not None:
                    self.hook(self, rec)
            if st.depth < N and st.cc > mc:
                st.timeout = True
                break
            if self.max_steps is not None and res.steps >= self.max_steps:
                raise RuntimeError(f"no termination after {res.steps} steps")
        v_hat = st.vpath[h:].copy()
        if st.timeout:
            v_hat[st.depth:] = 0
        res.v = v_hat
        res.cc = st.cc
        res.timed_out = st.timeout
        return res


def decode(l, config, engine: str = "kernel", trace: bool = False) -> DecodeResult:
    """Decode one frame of channel LLRs (fixed-point units or floats).

    ``engine='reference'`` runs :class:`FanoDecoder`; ``'kernel'`` the
    compiled equivalent.  Traces are only produced by the reference engine.
    """
    if engine == "reference" or trace:
        return FanoDecoder(config).decode(l, trace=trace)
    if engine != "kernel":
        raise ValueError(f"unknown engine {engine!r}")
    from ._kernel import decode_frame

    return decode_frame(l, config)
