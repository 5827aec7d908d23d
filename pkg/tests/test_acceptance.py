"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The long Monte-Carlo point (10^7 frames at 3.5 dB) runs once per session and
feeds both the FER and the average-cycle criteria.
"""

import os

import numpy as np
import pytest

from fuzzing import check_against_oracle
from oracles import dense_encode, kron_matrix
from pacfano import FanoDecoder, bmu, decode, encode, make_config, metric_calc, baseline_config
from pacfano.channel import QuantFormat, frame_channel
from pacfano.encoder import polar_transform
from pacfano.fano import FCU_CYCLES, sign_bit
from pacfano.harness import run_point, throughput_model, worst_case_throughput
from pacfano._kernel import decode_kernel, kernel_args

WORKERS = os.cpu_count() or 1
Q7 = QuantFormat(7, 4)
M9 = Q7.widened(2)


def test_noise_free_cycle_count(report):
    cfg = baseline_config()
    d, l = frame_channel(cfg, 0.0, 0, 0, noise_free=True)
    res = decode(l, cfg, engine="reference")
    split = (res.pd_cycles, res.fcu_cycles, res.bmu_cycles)
    ok = (res.cc == 638 == 5 * cfg.N - 2 and split == (254, 256, 128)
          and res.backward_moves == 0 and not res.timed_out
          and np.array_equal(res.v[cfg.A.astype(bool)], d))
    assert report(1, "noise-free cycles", ok, f"cc={res.cc} split={split} "
                  f"backward={res.backward_moves}")


def test_metric_table_exhaustive(report):
    rows = {(0, 0): lambda z: (1, 1 - z), (0, 1): lambda z: (0, -z),
            (1, 0): lambda z: (1 - z, 1), (1, 1): lambda z: (-z, 0)}
    checked = bad = 0
    for zu in range(Q7.lo, Q7.hi + 1):
        for b in (0, 1):
            want = rows[(sign_bit(zu), b)](abs(zu) / 4)
            got = metric_calc(zu, b, one=4, fmt=M9)
            checked += 1
            bad += (got.gamma0 / 4, got.gamma1 / 4) != want
    assert report(2, "metric table", bad == 0 and checked == 256,
                  f"{checked} (z, b) pairs, {bad} mismatches")


def test_demapper_oracle(report):
    checks = {N: check_against_oracle(N, 10**4, seed=1000 + N) for N in (2, 4, 8, 16, 32, 64)}
    assert report(3, "demapper oracle", True,
                  "10^4 vectors per N, z checks " + ", ".join(f"N={k}:{v}" for k, v in
                                                             checks.items()))


def test_encoder_oracle(report):
    rng = np.random.default_rng(44)
    ok = True
    for N in (8, 16, 32):
        cfg = make_config(N, N // 2)
        d = rng.integers(0, 2, (10**4, cfg.K), dtype=np.uint8)
        ok &= np.array_equal(encode(d, cfg), dense_encode(d, np.flatnonzero(cfg.A), cfg.c, N))
        U = rng.integers(0, 2, (10**4, N), dtype=np.uint8)
        ok &= np.array_equal(polar_transform(polar_transform(U)), U)
        ok &= np.array_equal(polar_transform(U), (U @ kron_matrix(N)) % 2)
    assert report(4, "encoder oracle", bool(ok), "N in {8,16,32}, 10^4 messages each")


@pytest.fixture(scope="module")
def high_snr_point():
    return run_point(baseline_config(), 3.5, 10**7, seed=2024, workers=WORKERS)


def test_fer_point(report, high_snr_point):
    st = high_snr_point
    lo, hi = 0.5 * 1.6e-5, 3 * 1.6e-5
    ok = st.frames >= 10**7 and lo <= st.fer <= hi
    ci = st.fer_ci()
    assert report(5, "FER at 3.5 dB", ok,
                  f"FER={st.fer:.3e} ({st.frame_errors}/{st.frames}, {st.timeouts} timeouts, "
                  f"95% CI [{ci[0]:.2e}, {ci[1]:.2e}]) band [{lo:.1e}, {hi:.1e}]")


def test_average_complexity_point(report, high_snr_point):
    acc = high_snr_point.acc
    ok = abs(acc - 839) <= 0.15 * 839
    assert report(6, "ACC at 3.5 dB", ok, f"ACC={acc:.1f} band [{0.85 * 839:.1f}, "
                  f"{1.15 * 839:.1f}]")


def test_mc_sensitivity(report):
    frames = 20480
    big = run_point(baseline_config(MC=2**18), 1.0, frames, seed=77, workers=WORKERS)
    small = run_point(baseline_config(MC=2**14), 1.0, frames, seed=77, workers=WORKERS)
    red = 1 - small.acc / big.acc
    ok = abs(red - 0.51) <= 0.15
    assert report(7, "MC sensitivity at 1 dB", ok,
                  f"ACC {big.acc:.0f} -> {small.acc:.0f}, reduction {100 * red:.1f}% "
                  f"(band 36-66%, {frames} frames)")


def test_throughput_arithmetic(report):
    avg = throughput_model(500e6, 839, 64) / 1e6
    worst = worst_case_throughput(500e6, 2**18, 64) / 1e6
    ok = float(f"{avg:.3g}") == 38.1 and float(f"{worst:.2g}") == 0.12
    assert report(8, "throughput model", ok, f"avg {avg:.3g} Mb/s, worst {worst:.3g} Mb/s")


def _fuzz_frames(rng, cfg, count):
    """Half pure noise, half noisy codewords at random SNR; integer LLR units."""
    for k in range(count):
        if k % 2:
            yield rng.integers(-64, 64, cfg.N).astype(np.float64)
        else:
            d = rng.integers(0, 2, cfg.K, dtype=np.uint8)
            s = 1.0 - 2.0 * encode(d, cfg)
            y = s + rng.normal(0, rng.uniform(0.3, 1.5), cfg.N)
            yield np.clip(np.round(8 * y), -64, 63).astype(np.float64)


def test_property_suite(report):
    notes = []
    ok = True

    # comparator-free ordering: t=0 takes the larger metric over the whole domain
    for zu in range(Q7.lo, Q7.hi + 1):
        for b in (0, 1):
            st = np.zeros(6, np.uint8)
            ml = bmu(zu, b, 1, 0, (1, 0, 1, 1, 0, 1, 1), st, one=4, fmt=M9)[0]
            ll = bmu(zu, b, 1, 1, (1, 0, 1, 1, 0, 1, 1), st, one=4, fmt=M9)[0]
            ok &= ml >= ll
    notes.append("ordering ok" if ok else "ordering broken")

    # backward legality and silent demapper on psi=1, 10^5 compiled decodes
    cfg = make_config(16, 8, MC=10**9)
    args = kernel_args(cfg)
    trace = np.zeros((1 << 16, 7))
    rng = np.random.default_rng(99)
    backs = psi_steps = bad = 0
    for l in _fuzz_frames(rng, cfg, 10**5):
        out = decode_kernel(l, *args, trace)
        nt = out[8]
        assert out[6] <= trace.shape[0] and not out[2]
        tr = trace[:nt]
        T_prev = np.concatenate([[0.0], tr[:-1, 2]])
        psi_prev = np.concatenate([[0.0], tr[:-1, 5]])
        cc_prev = np.concatenate([[0.0], tr[:-1, 6]])
        back = tr[:, 1] >= 3
        bad += int(np.sum(back & ((tr[:, 4] + T_prev > 0) | (tr[:, 2] != T_prev + tr[:, 4]))))
        quiet = psi_prev == 1
        bad += int(np.sum(quiet & (tr[:, 6] - cc_prev != FCU_CYCLES)))
        backs += int(back.sum())
        psi_steps += int(quiet.sum())
    ok &= bad == 0 and backs > 0 and psi_steps > 0
    notes.append(f"10^5 decodes: {backs} backward moves, {psi_steps} psi=1 steps, {bad} violations")

    # the reference engine, instrumented, agrees on the demapper side
    pd_bad = 0
    for l in _fuzz_frames(np.random.default_rng(5), cfg, 500):
        last = {"psi": 0, "pd": 0}

        def hook(dec, rec, last=last):
            nonlocal pd_bad
            if last["psi"] == 1 and dec.tree.activations != last["pd"]:
                pd_bad += 1
            last["psi"], last["pd"] = rec.psi, dec.tree.activations

        FanoDecoder(cfg, hook=hook).decode(l.astype(np.int64))
    ok &= pd_bad == 0
    notes.append(f"reference psi=1 PD activations: {pd_bad}")

    # worker-count invariance
    pc = baseline_config(MC=2**14)
    one = run_point(pc, 1.0, 3072, seed=8, workers=1)
    many = run_point(pc, 1.0, 3072, seed=8, workers=3)
    same = (one.frames, one.frame_errors, one.timeouts, one.cc_sum, one.cc_hist) == \
        (many.frames, many.frame_errors, many.timeouts, many.cc_sum, many.cc_hist)
    ok &= same
    notes.append("workers 1 vs 3 identical" if same else "worker counts disagree")

    # termination without a cycle budget, watchdog on the step count
    finished = 0
    for N in (2, 4, 8, 16):
        c = make_config(N, max(1, N // 2), c=(1, 0, 1, 1), MC=None)
        for l in _fuzz_frames(np.random.default_rng(N), c, 300):
            FanoDecoder(c, max_steps=10**6).decode(l.astype(np.int64))
            finished += 1
    notes.append(f"{finished} unbounded decodes terminated")

    assert report(9, "property suite", bool(ok), "; ".join(notes))
