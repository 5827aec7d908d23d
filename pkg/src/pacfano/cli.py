"""Command-line front end: ``pacfano --ebn0 1 2 3 --mc 16384 262144 --out fer.csv``."""

from __future__ import annotations

import argparse
import sys

from .channel import frame_channel
from .codecfg import DEFAULT_BIAS_SNR_DB, config_from_text, validate
from .fano import FanoDecoder
from .harness import sweep


def _mc(text: str):
    return None if text.lower() in ("inf", "none") else int(float(text))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pacfano",
        description="Monte-Carlo FER and cycle-count simulation of a Fano PAC decoder.")
    p.add_argument("--config", help="key=value config file; other flags override it")
    p.add_argument("--n", type=int, help="code length N (default 128)")
    p.add_argument("--k", type=int, help="message length K (default 64)")
    p.add_argument("--gen-poly", help="convolution polynomial, e.g. 1011011")
    p.add_argument("--ebn0", type=float, nargs="+", default=[3.5], help="Eb/N0 points in dB")
    p.add_argument("--mc", type=_mc, nargs="+", default=[2**18],
                   help="cycle budgets; 'inf' disables the timeout")
    p.add_argument("--frames", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--delta", type=float, help="threshold spacing (default 2)")
    p.add_argument("--quant-bits", type=int, help="LLR width Q (default 7)")
    p.add_argument("--quant-scale", type=int, help="fixed-point units per 1.0 (default 4)")
    p.add_argument("--bias-snr", type=float,
                   help=f"design Eb/N0 of the bias vector (default {DEFAULT_BIAS_SNR_DB})")
    p.add_argument("--novelty", choices=("threshold", "explicit"))
    p.add_argument("--literal-rule0", action="store_true",
                   help="tighten by delta on every first visit")
    p.add_argument("--noise-free", action="store_true", help="replace the channel by saturated LLRs")
    p.add_argument("--float-ref", action="store_true",
                   help="unquantized reference pipeline with exact metrics")
    p.add_argument("--trace", action="store_true",
                   help="print the step trace of frame 0 at every point")
    p.add_argument("--out", help="CSV file; rows are appended")
    return p


def config_from_args(args):
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read() + "\n"
    pairs = [("n_len", args.n), ("k", args.k), ("gen_poly", args.gen_poly),
             ("delta", args.delta), ("quant_bits", args.quant_bits),
             ("quant_scale", args.quant_scale), ("bias_snr", args.bias_snr),
             ("novelty", args.novelty)]
    text += "".join(f"{k}={v}\n" for k, v in pairs if v is not None)
    if args.literal_rule0:
        text += "literal_rule0=1\n"
    if args.float_ref:
        text += "float_ref=1\n"
    return config_from_text(text)


def _print_trace(cfg, ebn0, seed, noise_free, out):
    _, l = frame_channel(cfg, ebn0, seed, 0, noise_free)
    res = FanoDecoder(cfg).decode(l, trace=True)
    print(f"# trace ebn0={ebn0} mc={'inf' if cfg.MC is None else cfg.MC}", file=out)
    for rec in res.trace:
        print(rec.line(), file=out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (OSError, ValueError) as exc:
        print(f"pacfano: {exc}", file=sys.stderr)
        return 2
    errs = validate(cfg)
    if errs:
        for e in errs:
            print(f"pacfano: invalid config: {e}", file=sys.stderr)
        return 2
    if args.frames <= 0:
        print("pacfano: --frames must be positive", file=sys.stderr)
        return 2

    if args.trace:
        for mc in args.mc:
            for ebn0 in args.ebn0:
                _print_trace(cfg.with_(MC=mc), ebn0, args.seed, args.noise_free, sys.stdout)

    def progress(st):
        lo, hi = st.fer_ci()
        mc = "inf" if st.mc is None else st.mc
        print(f"ebn0={st.ebn0_db:g} mc={mc} frames={st.frames} errors={st.frame_errors} "
              f"timeouts={st.timeouts} fer={st.fer:.3e} [{lo:.2e}, {hi:.2e}] acc={st.acc:.1f}",
              flush=True)

    try:
        sweep(cfg, args.ebn0, args.mc, args.frames, args.seed, args.workers,
              args.noise_free, out=args.out, progress=progress)
    except OSError as exc:
        print(f"pacfano: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
