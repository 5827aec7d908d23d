#!/usr/bin/env python3
"""From measured cycle counts to throughput and latency of a 500 MHz decoder.

Simulates the (128, 64) code at 3.5 dB and turns the average and the
worst-case cycle count into information throughput and latency.
"""

from pacfano import baseline_config
from pacfano.harness import latency_seconds, run_point, throughput_model, worst_case_throughput

F_CLK = 500e6
cfg = baseline_config()
st = run_point(cfg, 3.5, 50_000, seed=5)

print(f"frames {st.frames}, errors {st.frame_errors}, ACC {st.acc:.1f} cycles")
print(f"average throughput  {throughput_model(F_CLK, st.acc, cfg.K) / 1e6:6.2f} Mb/s")
print(f"average latency     {latency_seconds(st.acc, F_CLK) * 1e6:6.2f} us")
print(f"worst-case TP       {worst_case_throughput(F_CLK, cfg.MC, cfg.K) / 1e6:6.3f} Mb/s")
print(f"worst-case latency  {latency_seconds(cfg.MC, F_CLK) * 1e6:6.1f} us")
print(f"noise-free latency  {5 * cfg.N - 2} cycles = "
      f"{latency_seconds(5 * cfg.N - 2, F_CLK) * 1e6:.2f} us")
