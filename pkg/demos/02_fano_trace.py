#!/usr/bin/env python3
"""Step-by-step trace of the Fano decoder on one noisy (32, 16) frame.

Each line is one rule firing of the control unit: the depth, the rule
(0/1 forward, 2 lower threshold, 3 back to lateral, 4 back again), the
relative threshold and branch metrics in fixed-point units, and the cycle
counter.  Run with a lower SNR to watch deeper backtracking.
"""

import sys

import numpy as np

from pacfano import FanoDecoder, make_config
from pacfano.channel import frame_channel

ebn0 = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
cfg = make_config(32, 16)
d, l = frame_channel(cfg, ebn0, seed=3, k=0)
res = FanoDecoder(cfg).decode(l, trace=True)

for rec in res.trace:
    print(rec.line())

ok = np.array_equal(res.v[cfg.A.astype(bool)], d)
print(f"\n{'decoded' if ok else 'decoding error'}: {res.steps} steps, "
      f"{res.backward_moves} backward moves, cc={res.cc} "
      f"(PD {res.pd_cycles} + FCU {res.fcu_cycles} + BMU {res.bmu_cycles}); "
      f"noise-free cost would be {5 * cfg.N - 2}")
