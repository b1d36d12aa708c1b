"""Tensor-network simulation of time-bin interferometers built from fiber loops."""

__version__ = "0.1.0"

from .architecture import ArchitectureSpec
from .fock import CouplerSpec, annihilation, beam_splitter, tritter
from .mps import MPS, CanonicalMPS, build, build_sequential, build_single_loop, canonicalize
from .observables import (
    area_law_bound,
    entanglement_entropy,
    expectation_number,
    fit_correlation_length,
    loop_mean_occupation,
    schmidt_spectrum,
    two_point,
)
from .sampler import draw_samples, exact_joint_probability, marginal_distribution

__all__ = [
    "ArchitectureSpec",
    "CouplerSpec",
    "MPS",
    "CanonicalMPS",
    "annihilation",
    "area_law_bound",
    "beam_splitter",
    "build",
    "build_sequential",
    "build_single_loop",
    "canonicalize",
    "draw_samples",
    "entanglement_entropy",
    "exact_joint_probability",
    "expectation_number",
    "fit_correlation_length",
    "loop_mean_occupation",
    "marginal_distribution",
    "schmidt_spectrum",
    "tritter",
    "two_point",
]
