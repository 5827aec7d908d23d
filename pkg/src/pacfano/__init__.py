"""Bit-accurate model of a Fano sequential decoder for PAC codes."""

from .codecfg import (CodeConfig, ConfigError, build_bias, build_rm_profile, load_config,
                      make_config, baseline_config, validate)
from .channel import QuantFormat, awgn, bpsk_modulate, llr, quantize
from .demapper import DemapperTree, f_min_sum, g_update
from .encoder import convolve, encode, extract_data, insert_data, polar_transform
from .fano import Action, FanoDecoder, bmu, decode, fano_step, metric_calc

from .harness import SimStats, emit_csv, read_csv, run_point, sweep, throughput_model

__version__ = "0.1.0"
