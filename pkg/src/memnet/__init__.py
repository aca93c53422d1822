"""Exact ReLU networks that memorize separated labeled point sets."""
from .bits import BitString, BlockEncoding, bin_value, encode_blocks, gamma, to_bits
from .bounds import (
    BoundsReport,
    param_count,
    prop33_check,
    sample_sign_patterns,
    serra_bound,
    sign_pattern_ceilings,
    thm32_feasibility,
    warren_bound,
)
from .datasets import LabeledDataset, gen_dataset
from .estimator import MemorizingNetwork
from .extractor import ExtractorSpec, build_extractor, build_f3, build_gate, build_indicator
from .formats import read_dataset, read_network, write_dataset, write_network
from .memorizer import ConstructionParams, MemorizationReport, construct, derive_params, sweep, verify
from .network import AffineLayer, ReluNetwork, compose, concat, evaluate, evaluate_batch, forward_trace, pad_to, to_pwl
from .numerics import Rat, ceil_log2, format_rat, parse_rat, rat_arith
from .projector import ProjectionResult, compute_R, project
from .pwl import PwlFunction, pwl_eval
from .realize import BudgetError, build_f2, realize_pwl

__version__ = "0.1.0"
