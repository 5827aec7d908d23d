#!/usr/bin/env python3
"""FER and average cycle count of the (128, 64) PAC code versus Eb/N0.

Two cycle budgets show the trade-off: a small MC caps the average cost
at low SNR and costs frame errors at high SNR.  Rows are appended to
fer_sweep.csv; raise FRAMES for smoother curves.
"""

from pacfano import baseline_config
from pacfano.harness import sweep

FRAMES = 8192
EBN0 = [1.0, 1.5, 2.0, 2.5, 3.0]
MC = [2**14, 2**18]


def show(st):
    lo, hi = st.fer_ci()
    print(f"MC=2^{st.mc.bit_length() - 1:<3d} Eb/N0={st.ebn0_db:3.1f} dB  FER={st.fer:.2e} "
          f"[{lo:.1e}, {hi:.1e}]  ACC={st.acc:8.1f}  p99={st.percentile(0.99)}")


points = sweep(baseline_config(), EBN0, MC, FRAMES, seed=1, out="fer_sweep.csv", progress=show)

print("\naverage cycle reduction from the smaller budget:")
by = {(p.mc, p.ebn0_db): p for p in points}
for e in EBN0:
    small, big = by[(MC[0], e)], by[(MC[1], e)]
    print(f"  {e:3.1f} dB: {100 * (1 - small.acc / big.acc):5.1f}%")
