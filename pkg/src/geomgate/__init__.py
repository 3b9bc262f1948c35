"""Nonadiabatic geometric gate design and simulation toolkit."""

from .core import gate_fidelity, mat_exp, subspace_fidelity
from .evolution import ErrorModel, evolve, fidelity_sweep, first_order_fidelity
from .geometry import (
    PathSpec,
    bloch_trajectory,
    path_from_schedule,
    path_gate,
    robustness_integral,
)
from .pulses import (
    Envelope,
    PulseSchedule,
    PulseSegment,
    build_dynamical_gaussian,
    build_ngqg_reference,
    build_schedule,
    build_sr_ngqg,
    build_sssp,
    ideal_gate,
)
from .schedule_io import load, parse, save, serialize

__all__ = [
    "Envelope", "ErrorModel", "PathSpec", "PulseSchedule", "PulseSegment",
    "bloch_trajectory", "build_dynamical_gaussian", "build_ngqg_reference", "build_schedule",
    "build_sr_ngqg", "build_sssp", "evolve", "fidelity_sweep", "first_order_fidelity",
    "gate_fidelity", "ideal_gate", "load", "mat_exp", "parse", "path_from_schedule", "path_gate",
    "robustness_integral", "save", "serialize", "subspace_fidelity",
]
