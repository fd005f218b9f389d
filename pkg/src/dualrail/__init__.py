"""Conclusive quantum state transfer through parallel spin-chain channels.

Reduced single-excitation simulation of the dual-rail repeated-measurement
protocol, schedule optimization, amplitude-damping noise, scaling-law fits,
and a full-Hilbert-space brute-force oracle for validation.
"""

from .chain_core import (
    ChainSpec,
    SectorHamiltonian,
    SpectralDecomposition,
    build_sector_hamiltonian,
    diagonalize,
    first_peak,
    propagator_matrix,
    transition_amplitude,
)
from .noise import NoiseParams
from .protocol import DualRailState, MeasurementRecord, ProtocolResult, run_schedule
from .scheduler import Schedule, ThresholdNotReached, greedy_optimize, uniform_schedule

__all__ = [
    "ChainSpec",
    "SectorHamiltonian",
    "SpectralDecomposition",
    "build_sector_hamiltonian",
    "diagonalize",
    "first_peak",
    "propagator_matrix",
    "transition_amplitude",
    "NoiseParams",
    "DualRailState",
    "MeasurementRecord",
    "ProtocolResult",
    "run_schedule",
    "Schedule",
    "ThresholdNotReached",
    "greedy_optimize",
    "uniform_schedule",
]

__version__ = "0.1.0"
