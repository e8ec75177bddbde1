"""Scan-based compressive terahertz imaging and block sparse Bayesian recovery."""

from .acquisition import (
    SensingMatrix,
    acquire_kronecker,
    acquire_scan,
    add_awgn,
    compression_ratio_scan,
    gen_bernoulli_k,
    gen_gaussian_complex,
    m_for_cr,
)
from .bsbl import SolveOptions, SolveReport, solve_bmmv, solve_transform
from .core import EXACT, BlockPartition, frobenius_norm_sq, make_partition, snr_db

__version__ = "0.1.0"
