"""BPSK over AWGN, channel LLRs and their fixed-point quantization."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .codecfg import noise_variance

# Frames are generated in blocks; frame k draws from block k // FRAME_BLOCK.
FRAME_BLOCK = 1024


@dataclass(frozen=True)
class QuantFormat:
    """Two's-complement saturating format: ``bits`` wide, ``scale`` units per 1.0."""

    bits: int
    scale: int

    @property
    def lo(self) -> int:
        return -(1 << (self.bits - 1))

    @property
    def hi(self) -> int:
        return (1 << (self.bits - 1)) - 1

    def clamp(self, x):
        if np.isscalar(x):
            return int(min(max(int(x), self.lo), self.hi))
        return np.clip(np.asarray(x, dtype=np.int64), self.lo, self.hi)

    def widened(self, extra: int) -> QuantFormat:
        return QuantFormat(self.bits + extra, self.scale)

    def to_real(self, units):
        return np.asarray(units) / self.scale


def bpsk_modulate(x) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def awgn(s, ebn0_db: float, rate: float, seed=None) -> np.ndarray:
    """Add white Gaussian noise at Eb/N0 (dB) for a rate-``rate`` code.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    s = np.asarray(s, dtype=np.float64)
    if np.isinf(ebn0_db) and ebn0_db > 0:
        return s.copy()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sigma = np.sqrt(noise_variance(ebn0_db, rate))
    return s + sigma * rng.standard_normal(s.shape)


def llr(y, sigma2: float) -> np.ndarray:
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma2


def quantize(l, fmt: QuantFormat):
    """round-half-away-from-zero to ``fmt`` units, then saturate."""
    x = np.asarray(l, dtype=np.float64) * fmt.scale
    r = np.sign(x) * np.floor(np.abs(x) + 0.5)
    q = np.clip(r, fmt.lo, fmt.hi).astype(np.int64)
    return int(q) if q.ndim == 0 else q


def config_format(config) -> QuantFormat:
    return QuantFormat(config.Q, config.scale)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """PCG64 stream for one frame block, keyed on (seed, block)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))


def draw_block(config, ebn0_db: float, seed: int, block: int, noise_free: bool = False):
    """Messages and channel LLRs for the FRAME_BLOCK frames of one block.

    Returns ``(d, l)`` with ``d`` uint8 (B, K) and ``l`` the decoder input:
    int64 units for fixed-point configs, float64 LLRs for ``float_ref``.
    Noise-free frames carry saturated LLRs of the right sign.
    """
    from .encoder import encode

    rng = block_rng(seed, block)
    d = rng.integers(0, 2, size=(FRAME_BLOCK, config.K), dtype=np.uint8)
    noise = rng.standard_normal((FRAME_BLOCK, config.N))
    s = bpsk_modulate(encode(d, config))
    if noise_free:
        if config.float_ref:
            return d, s * 1e3
        fmt = config_format(config)
        return d, np.where(s > 0, fmt.hi, fmt.lo).astype(np.int64)
    sigma2 = noise_variance(ebn0_db, config.rate)
    l = llr(s + np.sqrt(sigma2) * noise, sigma2)
    if config.float_ref:
        return d, l
    return d, quantize(l, config_format(config))


def frame_channel(config, ebn0_db: float, seed: int, k: int, noise_free: bool = False):
    """(d, l) of frame ``k`` alone, identical to its slot in :func:`draw_block`."""
    d, l = draw_block(config, ebn0_db, seed, k // FRAME_BLOCK, noise_free)
    j = k % FRAME_BLOCK
    return d[j], l[j]


# -- replay traces ------------------------------------------------------------
# layout: 8-byte magic, then little-endian u32 N, u32 frames, u8 Q, u8 pad,
# u16 scale, then frames*N int8 LLR units row by row.

_MAGIC = b"PACLLR1\0"
_HEADER = struct.Struct("<IIBBH")


def write_llr_trace(path, llrs, fmt: QuantFormat) -> None:
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.int64))
    if fmt.bits > 8:
        raise ValueError("trace format stores int8 units; Q must be <= 8")
    if (llrs < fmt.lo).any() or (llrs > fmt.hi).any():
        raise ValueError("LLR units outside the declared format")
    frames, N = llrs.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(_HEADER.pack(N, frames, fmt.bits, 0, fmt.scale))
        fh.write(llrs.astype("<i1").tobytes())


def read_llr_trace(path):
    """Returns ``(llrs, fmt)`` with llrs int64 of shape (frames, N)."""
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path}: not an LLR trace file")
        N, frames, bits, _, scale = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(N * frames), dtype="<i1")
    if data.size != N * frames:
        raise ValueError(f"{path}: truncated trace ({data.size} of {N * frames} values)")
    return data.reshape(frames, N).astype(np.int64), QuantFormat(bits, scale)
