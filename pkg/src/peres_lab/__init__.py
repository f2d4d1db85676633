"""Quaternionic quantum scattering laboratory.

Checks, at desk scale, that standard quaternionic quantum mechanics yields a
complex S-matrix, hence a complex forward amplitude and refractive index, so
far-zone interferometric phase comparisons see no quaternionic signal; and measures
the near-zone closed-channel decay where such effects do live.
"""
from ._kernels import BACKEND
from .quaternion import Quaternion, SymplecticPair, quat_mul
from .qmatrix import (QuatMatrix, SpectralDecomposition, commutant_project,
                      diagonalize_antihermitian, embed_complex, expm_quat,
                      is_antihermitian, smatrix_complexity_check)
from .potentials import PiecewisePotential, SampledPotential, Segment
from .schro1d import (beta_decay_rate, composite_noncommutativity,
                      solve_scattering_1d, wave_profile_1d)
from .scatter3d import RadialPotential, forward_amplitude, phase_shift, quaternionic_residual
from .optics import (QuatPhase, RefractiveIndex, SlabSpec, compose_and_commutator,
                     peres_pipeline, rayleigh_index, serber_index, slab_phase)

Potential1D = PiecewisePotential

__all__ = [
    "BACKEND", "Quaternion", "SymplecticPair", "quat_mul", "QuatMatrix",
    "SpectralDecomposition", "commutant_project", "diagonalize_antihermitian",
    "embed_complex", "expm_quat", "is_antihermitian", "smatrix_complexity_check",
    "PiecewisePotential", "SampledPotential", "Segment", "Potential1D",
    "beta_decay_rate", "composite_noncommutativity", "solve_scattering_1d",
    "wave_profile_1d", "RadialPotential", "forward_amplitude", "phase_shift",
    "quaternionic_residual", "QuatPhase", "RefractiveIndex", "SlabSpec",
    "compose_and_commutator", "peres_pipeline", "rayleigh_index", "serber_index",
    "slab_phase",
]
