"""Monte-Carlo frame-error and complexity simulation.

Frames are processed in blocks of :data:`pacfano.channel.FRAME_BLOCK`.
Frame ``k`` of a run always sees the same message and noise for a given
seed, so statistics do not depend on how blocks are spread over workers.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .channel import FRAME_BLOCK, draw_block

BINS_PER_OCTAVE = 32

CSV_COLUMNS = ["ebn0_db", "mc", "frames", "frame_errors", "timeouts", "fer", "fer_ci_lo",
               "fer_ci_hi", "acc", "cc_p50", "cc_p99", "cc_p999", "tp_model_bps",
               "config_digest", "seed"]


def cc_bin(cc) -> np.ndarray:
    """Log-scale histogram bin of a cycle count (32 bins per octave)."""
    return np.floor(BINS_PER_OCTAVE * np.log2(np.maximum(cc, 1))).astype(np.int64)


def bin_floor(k: int) -> int:
    """Smallest cycle count that falls into bin ``k``."""
    lo = math.ceil(2.0 ** (k / BINS_PER_OCTAVE) - 1e-9)
    while cc_bin(lo) < k:
        lo += 1
    return lo


def wilson_interval(errors: int, n: int, confidence: float = 0.95):
    if n == 0:
        return 0.0, 1.0
    zq = norm.ppf(0.5 + confidence / 2)
    p = errors / n
    den = 1 + zq * zq / n
    mid = (p + zq * zq / (2 * n)) / den
    half = zq * math.sqrt(p * (1 - p) / n + zq * zq / (4 * n * n)) / den
    lo = 0.0 if errors == 0 else max(0.0, mid - half)
    hi = 1.0 if errors == n else min(1.0, mid + half)
    return float(lo), float(hi)


@dataclass
class SimStats:
    ebn0_db: float
    mc: int | None
    seed: int
    config_digest: str
    frames: int = 0
    frame_errors: int = 0
    timeouts: int = 0
    cc_sum: int = 0
    cc_hist: dict = field(default_factory=dict)
    pd_sum: int = 0
    fcu_sum: int = 0
    bmu_sum: int = 0
    success_cc_min: int | None = None

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def acc(self) -> float:
        return self.cc_sum / self.frames if self.frames else 0.0

    def fer_ci(self, confidence: float = 0.95):
        return wilson_interval(self.frame_errors, self.frames, confidence)

    def percentile(self, q: float) -> int:
        """Cycle count at quantile ``q`` (bin lower edge, within 2.2%)."""
        if not self.frames:
            return 0
        target = q * self.frames
        run = 0
        for k in sorted(self.cc_hist):
            run += self.cc_hist[k]
            if run >= target:
                return bin_floor(k)
        return bin_floor(max(self.cc_hist))

    def merge(self, other: SimStats) -> SimStats:
        self.frames += other.frames
        self.frame_errors += other.frame_errors
        self.timeouts += other.timeouts
        self.cc_sum += other.cc_sum
        self.pd_sum += other.pd_sum
        self.fcu_sum += other.fcu_sum
        self.bmu_sum += other.bmu_sum
        for k, v in other.cc_hist.items():
            self.cc_hist[k] = self.cc_hist.get(k, 0) + v
        if other.success_cc_min is not None:
            self.success_cc_min = (other.success_cc_min if self.success_cc_min is None
                                   else min(self.success_cc_min, other.success_cc_min))
        return self

    def row(self, f_clk: float = 500e6, K: int | None = None) -> dict:
        lo, hi = self.fer_ci()
        tp = throughput_model(f_clk, self.acc, K) if K and self.acc > 0 else float("nan")
        return {
            "ebn0_db": self.ebn0_db, "mc": "inf" if self.mc is None else self.mc,
            "frames": self.frames, "frame_errors": self.frame_errors,
            "timeouts": self.timeouts, "fer": self.fer, "fer_ci_lo": lo, "fer_ci_hi": hi,
            "acc": self.acc, "cc_p50": self.percentile(0.5), "cc_p99": self.percentile(0.99),
            "cc_p999": self.percentile(0.999), "tp_model_bps": tp,
            "config_digest": self.config_digest, "seed": self.seed,
        }


def _frame_outcomes(config, ebn0_db, seed, block, count, noise_free):
    """Decode the first ``count`` frames of one block; returns (errors, counters)."""
    from ._kernel import decode_block

    d, l = draw_block(config, ebn0_db, seed, block, noise_free)
    V, counters = decode_block(l[:count], config)
    errors = (V[:, config.A.astype(bool)] != d[:count]).any(axis=1)
    return errors, counters


def _run_blocks(config, ebn0_db, seed, frames, blocks, noise_free):
    st = SimStats(ebn0_db, config.MC, seed, config.digest())
    for blk in blocks:
        count = min(FRAME_BLOCK, frames - blk * FRAME_BLOCK)
        errors, cnt = _frame_outcomes(config, ebn0_db, seed, blk, count, noise_free)
        cc = cnt[:, 0]
        timeouts = cnt[:, 1].astype(bool)
        st.frames += count
        st.frame_errors += int((errors | timeouts).sum())
        st.timeouts += int(timeouts.sum())
        st.cc_sum += int(cc.sum())
        st.pd_sum += int(cnt[:, 2].sum())
        st.fcu_sum += int(cnt[:, 3].sum())
        st.bmu_sum += int(cnt[:, 4].sum())
        keys, counts = np.unique(cc_bin(cc), return_counts=True)
        for k, v in zip(keys.tolist(), counts.tolist()):
            st.cc_hist[k] = st.cc_hist.get(k, 0) + v
        ok = ~timeouts
        if ok.any():
            m = int(cc[ok].min())
            st.success_cc_min = m if st.success_cc_min is None else min(st.success_cc_min, m)
    return st


def run_point(config, ebn0_db: float, frames: int, seed: int = 0, workers: int = 1,
              noise_free: bool = False) -> SimStats:
    """Simulate ``frames`` frames at one Eb/N0 and aggregate statistics.

    Timed-out frames count as frame errors and are also reported separately.
    """
    if frames <= 0:
        raise ValueError("frames must be positive")
    nblocks = -(-frames // FRAME_BLOCK)
    if workers <= 1 or nblocks == 1:
        return _run_blocks(config, ebn0_db, seed, frames, range(nblocks), noise_free)
    shards = [range(w, nblocks, workers) for w in range(workers)]
    total = SimStats(ebn0_db, config.MC, seed, config.digest())
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(_run_blocks, config, ebn0_db, seed, frames, s, noise_free)
                for s in shards if len(s)]
        for f in futs:
            total.merge(f.result())
    return total


def sweep(config, ebn0_list, mc_list, frames: int, seed: int = 0, workers: int = 1,
          noise_free: bool = False, out=None, progress=None) -> list[SimStats]:
    """Every (MC, Eb/N0) pair via :func:`run_point`; rows appended to ``out``."""
    results = []
    for mc in mc_list:
        cfg = config.with_(MC=mc)
        for ebn0 in ebn0_list:
            st = run_point(cfg, ebn0, frames, seed, workers, noise_free)
            results.append(st)
            if out is not None:
                emit_csv([st], out, K=config.K)
            if progress is not None:
                progress(st)
    return results


def throughput_model(f_clk: float, acc: float, K: int) -> float:
    """Average information throughput in bit/s: (f_clk / ACC) * K."""
    if acc <= 0:
        raise ValueError("average cycle count must be positive")
    return f_clk / acc * K


def worst_case_throughput(f_clk: float, mc: int, K: int) -> float:
    return throughput_model(f_clk, mc, K)


def latency_seconds(cycles: float, f_clk: float) -> float:
    return cycles / f_clk


def emit_csv(stats, path, K: int | None = None, f_clk: float = 500e6) -> None:
    """Append one row per point; the header is written only to a new file."""
    path = os.fspath(path)
    try:
        fresh = not os.path.exists(path) or os.path.getsize(path) == 0
        with open(path, "a", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            if fresh:
                w.writeheader()
            for st in stats:
                w.writerow(st.row(f_clk, K))
    except OSError as exc:
        raise OSError(f"cannot write simulation CSV {path!r}: {exc}") from exc


_INT_COLS = {"frames", "frame_errors", "timeouts", "cc_p50", "cc_p99", "cc_p999", "seed"}
_STR_COLS = {"config_digest"}


def read_csv(path) -> list[dict]:
    """Parse a file written by :func:`emit_csv` back into typed rows."""
    rows = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for k, v in raw.items():
                if k in _STR_COLS:
                    row[k] = v
                elif k == "mc":
                    row[k] = None if v == "inf" else int(v)
                elif k in _INT_COLS:
                    row[k] = int(v)
                else:
                    row[k] = float(v)
            rows.append(row)
    return rows
