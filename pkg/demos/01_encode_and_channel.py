#!/usr/bin/env python3
"""Walk one message through the PAC transmitter and the channel front end.

Prints the data carrier word, the convolution output, the codeword, the
noisy channel values and their 7-bit fixed-point LLRs for a (16, 8) code.
"""

import numpy as np

from pacfano import make_config
from pacfano.channel import awgn, bpsk_modulate, config_format, llr, quantize
from pacfano.codecfg import noise_variance
from pacfano.encoder import convolve, insert_data, polar_transform

cfg = make_config(16, 8)
print("data positions A:", cfg.data_indices.tolist())
print("bias b:          ", cfg.b.tolist())

rng = np.random.default_rng(1)
d = rng.integers(0, 2, cfg.K, dtype=np.uint8)
v = insert_data(d, cfg.A.astype(bool), cfg.N)
u = convolve(v, cfg.c)
x = polar_transform(u)
print("d:", d.tolist())
print("v:", v.tolist())
print("u:", u.tolist(), " (c =", "".join(map(str, cfg.c)) + ")")
print("x:", x.tolist())

ebn0 = 2.0
sigma2 = noise_variance(ebn0, cfg.rate)
y = awgn(bpsk_modulate(x), ebn0, cfg.rate, seed=7)
l = llr(y, sigma2)
q = quantize(l, config_format(cfg))
print(f"\nEb/N0 = {ebn0} dB, sigma^2 = {sigma2:.3f}")
for i in range(cfg.N):
    print(f"  x={x[i]}  y={y[i]:+.3f}  llr={l[i]:+7.3f}  units={q[i]:+4d}")
