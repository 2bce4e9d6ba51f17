"""
Symbol-level precoding for low-resolution IRS transmitters.

Modules
-------
signals     PSK constellations, phase alphabets, channels, seeded streams
margin      constructive-interference margin, linear forms, PSK detection
rcg         Riemannian conjugate gradient on unit-modulus phase vectors
discrete    phase quantization and 1-bit branch-and-bound
codebook    per-symbol-vector precoder design for each scheme
mimo        alternating precoder/combiner design for multi-antenna users
simulation  Monte Carlo symbol error rate
sweep       SER sweeps written to CSV
oracles     brute-force references for testing
"""

from .codebook import PrecoderCodebook, Scheme, design_codebook, design_codebooks, parse_scheme
from .discrete import bnb_solve_1bit, build_onebit_instance, node_lower_bound, quantize_phases
from .margin import (
    LinearForm,
    detect_psk,
    margin_objective,
    realify,
    rotated_received,
    worst_user_margin,
)
from .mimo import alternating_design, effective_channel, solve_combiner
from .rcg import SmoothedProblem, rcg_minimize, solve_relaxed
from .signals import (
    INFINITE,
    ChannelSet,
    Constellation,
    PhaseAlphabet,
    awgn,
    enumerate_symbol_vectors,
    make_constellation,
    phase_alphabet,
    sample_channels,
    substream,
)
from .simulation import estimate_ser, estimate_ser_curve
from .sweep import SweepConfig, run_sweep

__version__ = "0.1.0"
