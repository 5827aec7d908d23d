"""Code construction and decoder parameters for PAC codes.

A :class:`CodeConfig` bundles everything the encoder, channel front end and
Fano decoder need: the rate profile, the convolution polynomial, the 1-bit
bias vector, the threshold spacing and the fixed-point format.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

DEFAULT_POLY = (1, 0, 1, 1, 0, 1, 1)
NOVELTY_MODES = ("threshold", "explicit")


class ConfigError(ValueError):
    """Raised for parameters that cannot describe a PAC code."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def build_rm_profile(N: int, K: int) -> np.ndarray:
    """Reed-Muller rate profile: the K indices of largest binary weight.

    Ties at the boundary weight class are broken towards larger indices.
    Returns a sorted integer array.
    """
    if not _is_pow2(N):
        raise ConfigError(f"N must be a power of two, got {N}")
    if not 0 < K <= N:
        raise ConfigError(f"need 0 < K <= N, got K={K}, N={N}")
    idx = np.arange(N)
    weight = np.array([bin(i).count("1") for i in idx])
    # lexsort: last key is primary
    order = np.lexsort((-idx, -weight))
    return np.sort(order[:K])


# -- Gaussian approximation of bit-channel LLR densities ---------------------

def _log_phi(x):
    """log of Chung's approximation of 1 - E[tanh(L/2)], L ~ N(x, 2x)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    small = (x > 0) & (x <= 10)
    big = x > 10
    out[small] = -0.4527 * x[small] ** 0.86 + 0.0218
    xb = x[big]
    out[big] = 0.5 * np.log(np.pi / xb) - xb / 4 + np.log1p(-10 / (7 * xb))
    return out


def _check_node_mean(m: float) -> float:
    lp = _log_phi(m)[0]
    if lp >= 0.0:
        return 0.0
    # phi_out = 1 - (1 - phi)^2, kept in the log domain
    target = lp + np.log(2.0 - np.exp(lp))
    if target >= 0.0:
        return 0.0
    g = lambda x: _log_phi(x)[0] - target
    hi = max(m, 1.0)
    while g(hi) > 0:
        hi *= 2
    return float(brentq(g, 0.0, hi, xtol=1e-13, rtol=1e-13))


def ga_means(N: int, sigma2: float) -> np.ndarray:
    """Mean LLR of every bit-channel under the Gaussian approximation.

    Index order is natural: bit i's most significant binary digit selects
    the check-node (0) or variable-node (1) branch at the first stage.
    """
    if not _is_pow2(N):
        raise ConfigError(f"N must be a power of two, got {N}")
    mus = np.array([2.0 / sigma2]) if sigma2 > 0 else np.array([np.inf])
    for _ in range(int(math.log2(N))):
        left = np.array([_check_node_mean(m) if np.isfinite(m) else np.inf for m in mus])
        mus = np.stack([left, 2.0 * mus], axis=1).ravel()
    return mus


_GH_T, _GH_W = np.polynomial.hermite.hermgauss(96)


def capacity_from_mean(mu) -> np.ndarray:
    """Symmetric capacity of a consistent Gaussian LLR channel N(mu, 2 mu)."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    out = np.zeros_like(mu)
    for k, m in enumerate(mu):
        if m <= 0:
            out[k] = 0.0
        elif not np.isfinite(m) or m > 2000:
            out[k] = 1.0
        else:
            x = m + 2.0 * np.sqrt(m) * _GH_T
            loss = np.logaddexp(0.0, -x) / np.log(2.0)
            out[k] = 1.0 - np.dot(_GH_W, loss) / np.sqrt(np.pi)
    return np.clip(out, 0.0, 1.0)


def noise_variance(ebn0_db: float, rate: float) -> float:
    """sigma^2 of unit-energy BPSK at the given Eb/N0 and code rate."""
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def bitchannel_capacities(N: int, sigma2: float) -> np.ndarray:
    return capacity_from_mean(ga_means(N, sigma2))


def genie_capacities(N: int, sigma2: float, trials: int, seed: int = 0) -> np.ndarray:
    """Monte-Carlo bit-channel capacities with a genie-aided SC decoder.

    Transmits the all-zero word (the channels are symmetric), runs exact
    LLR SC with the true (zero) prefix and averages 1 - log2(1 + e^-z).
    """
    rng = np.random.default_rng(seed)
    acc = np.zeros(N)
    done = 0
    while done < trials:
        batch = min(20000, trials - done)
        y = 1.0 + np.sqrt(sigma2) * rng.standard_normal((batch, N))
        z = _genie_zero_llrs(2.0 * y / sigma2)
        acc += (np.logaddexp(0.0, -z) / np.log(2.0)).sum(axis=0)
        done += batch
    return 1.0 - acc / trials


def _genie_zero_llrs(l: np.ndarray) -> np.ndarray:
    if l.shape[-1] == 1:
        return l
    h = l.shape[-1] // 2
    a, b = l[..., :h], l[..., h:]
    from .demapper import boxplus

    return np.concatenate([_genie_zero_llrs(boxplus(a, b)), _genie_zero_llrs(a + b)], axis=-1)


def build_bias(N: int, design_snr_db: float, trials: int = 0, rate: float = 0.5,
               seed: int = 0) -> np.ndarray:
    """1-bit quantized bit-channel capacities: b_i = 1 iff I_i >= 0.5.

    ``trials == 0`` selects the Gaussian-approximation estimator; a positive
    count runs the genie-aided Monte-Carlo estimator instead.
    ``design_snr_db`` is Eb/N0 at code rate ``rate``; +/-inf are accepted.
    """
    if trials < 0:
        raise ConfigError("trials must be >= 0")
    if design_snr_db == math.inf:
        return np.ones(N, dtype=np.uint8)
    if design_snr_db == -math.inf:
        return np.zeros(N, dtype=np.uint8)
    sigma2 = noise_variance(design_snr_db, rate)
    if trials == 0:
        cap = bitchannel_capacities(N, sigma2)
    else:
        cap = genie_capacities(N, sigma2, trials, seed)
    return (cap >= 0.5).astype(np.uint8)


# -- the config record ------------------------------------------------------

def mask_to_hex(mask) -> str:
    """Bit i of the integer is mask[i]; zero-padded to ceil(N/4) digits."""
    mask = np.asarray(mask).astype(bool)
    value = sum(1 << int(i) for i in np.flatnonzero(mask))
    return format(value, "0{}x".format(max(1, (len(mask) + 3) // 4)))


def hex_to_mask(text: str, N: int) -> np.ndarray:
    value = int(text, 16)
    if value >> N:
        raise ConfigError(f"hex mask {text!r} has bits beyond N={N}")
    return np.array([(value >> i) & 1 for i in range(N)], dtype=np.uint8)


@dataclass(frozen=True, eq=False)
class CodeConfig:
    """All code and decoder parameters.

    Metric-valued quantities (``delta``) are in LLR units; ``scale`` fixed-point
    units represent 1.0.  ``MC=None`` disables the cycle budget.
    """

    N: int
    K: int
    A: np.ndarray  # uint8 membership mask, length N
    c: tuple
    b: np.ndarray  # uint8, length N
    delta: float = 2.0
    Q: int = 7
    scale: int = 4
    MC: int | None = 2**18
    novelty: str = "threshold"
    literal_rule0: bool = False
    float_ref: bool = False
    bias_snr_db: float | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return int(round(math.log2(self.N))) if self.N > 0 else 0

    @property
    def h(self) -> int:
        return len(self.c) - 1

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def data_indices(self) -> np.ndarray:
        return np.flatnonzero(self.A)

    @property
    def delta_units(self) -> int:
        return int(round(self.delta * self.scale))

    def with_(self, **kw) -> CodeConfig:
        return replace(self, **kw)

    def to_text(self) -> str:
        """Flat ``key=value`` form; inverse of :func:`config_from_text`."""
        lines = [
            f"n_len={self.N}",
            f"k={self.K}",
            "gen_poly=" + "".join(str(int(x)) for x in self.c),
            f"delta={self.delta!r}",
            f"quant_bits={self.Q}",
            f"quant_scale={self.scale}",
            f"mc={'inf' if self.MC is None else self.MC}",
            f"novelty={self.novelty}",
            f"literal_rule0={int(self.literal_rule0)}",
            f"float_ref={int(self.float_ref)}",
            f"data_mask={mask_to_hex(self.A)}",
            f"bias_mask={mask_to_hex(self.b)}",
        ]
        if self.bias_snr_db is not None:
            lines.append(f"bias_snr={self.bias_snr_db!r}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        body = "\n".join(l for l in self.to_text().splitlines() if not l.startswith("bias_snr"))
        return hashlib.sha256(body.encode()).hexdigest()[:12]


# design Eb/N0 of the default bias vector
DEFAULT_BIAS_SNR_DB = 3.0


def make_config(N: int = 128, K: int = 64, c=DEFAULT_POLY, delta: float = 2.0, Q: int = 7,
                scale: int = 4, MC: int | None = 2**18, bias_snr_db: float = DEFAULT_BIAS_SNR_DB,
                A=None, b=None, **kw) -> CodeConfig:
    """Build a config, filling A from the RM profile and b from the GA bias."""
    if A is None:
        A = np.zeros(N, dtype=np.uint8)
        A[build_rm_profile(N, K)] = 1
    A = np.asarray(A, dtype=np.uint8)
    if b is None:
        b = build_bias(N, bias_snr_db, rate=K / N)
    return CodeConfig(N=N, K=K, A=A, c=tuple(int(x) for x in c), b=np.asarray(b, dtype=np.uint8),
                      delta=delta, Q=Q, scale=scale, MC=MC, bias_snr_db=bias_snr_db, **kw)


def baseline_config(**overrides) -> CodeConfig:
    """The (128, 64) setup used for the hardware measurements."""
    return make_config(**overrides)


def validate(cfg: CodeConfig) -> list[str]:
    """Return every violated invariant as a readable message (empty if ok)."""
    errs = []
    if not _is_pow2(cfg.N):
        errs.append(f"N={cfg.N} is not a power of two")
    A = np.asarray(cfg.A)
    if A.shape != (cfg.N,):
        errs.append(f"A has length {A.size}, expected N={cfg.N}")
    elif not np.isin(A, (0, 1)).all():
        errs.append("A must be a 0/1 mask")
    elif int(A.sum()) != cfg.K:
        errs.append(f"|A|={int(A.sum())} does not match K={cfg.K}")
    if not 0 < cfg.K <= cfg.N:
        errs.append(f"K={cfg.K} outside (0, N]")
    if len(cfg.c) == 0 or cfg.c[0] != 1:
        errs.append("c[0] must be 1")
    if any(x not in (0, 1) for x in cfg.c):
        errs.append("c must be binary")
    b = np.asarray(cfg.b)
    if b.shape != (cfg.N,):
        errs.append(f"b has length {b.size}, expected N={cfg.N}")
    elif not np.isin(b, (0, 1)).all():
        errs.append("b must be binary")
    if not cfg.delta > 0:
        errs.append(f"delta={cfg.delta} must be positive")
    elif not cfg.float_ref and abs(cfg.delta * cfg.scale - round(cfg.delta * cfg.scale)) > 1e-12:
        errs.append(f"delta={cfg.delta} not representable at scale={cfg.scale}")
    if cfg.Q < 2:
        errs.append(f"Q={cfg.Q} too small")
    if cfg.scale < 1:
        errs.append(f"scale={cfg.scale} must be >= 1")
    if cfg.MC is not None and cfg.MC < 1:
        errs.append(f"MC={cfg.MC} must be positive")
    if cfg.novelty not in NOVELTY_MODES:
        errs.append(f"novelty={cfg.novelty!r} not in {NOVELTY_MODES}")
    return errs


_KEYS = {
    "n_len": "N", "n": "N", "k": "K", "gen_poly": "c", "delta": "delta",
    "quant_bits": "Q", "quant_scale": "scale", "mc": "MC", "bias_snr": "bias_snr_db",
    "novelty": "novelty", "literal_rule0": "literal_rule0", "float_ref": "float_ref",
    "data_mask": "A", "bias_mask": "b",
}


def config_from_text(text: str) -> CodeConfig:
    """Parse the flat ``key=value`` format (``#`` starts a comment)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[_KEYS[key]] = value
    kw = {}
    N = int(raw.pop("N", 128))
    kw["N"] = N
    if "K" in raw:
        kw["K"] = int(raw.pop("K"))
    if "c" in raw:
        kw["c"] = tuple(int(ch) for ch in raw.pop("c").replace(",", "").replace(" ", ""))
    if "delta" in raw:
        kw["delta"] = float(raw.pop("delta"))
    for k in ("Q", "scale"):
        if k in raw:
            kw[k] = int(raw.pop(k))
    if "MC" in raw:
        v = raw.pop("MC").lower()
        kw["MC"] = None if v in ("inf", "none") else int(float(v))
    if "bias_snr_db" in raw:
        kw["bias_snr_db"] = float(raw.pop("bias_snr_db"))
    for k in ("literal_rule0", "float_ref"):
        if k in raw:
            kw[k] = raw.pop(k).lower() in ("1", "true", "yes")
    if "novelty" in raw:
        kw["novelty"] = raw.pop("novelty")
    if "A" in raw:
        kw["A"] = hex_to_mask(raw.pop("A"), N)
        kw.setdefault("K", int(kw["A"].sum()))
    if "b" in raw:
        kw["b"] = hex_to_mask(raw.pop("b"), N)
    return make_config(**kw)


def load_config(path) -> CodeConfig:
    with open(path) as fh:
        return config_from_text(fh.read())
