"""Numerical verification of entropy power and Fisher information inequalities
for single-mode bosonic states in a truncated Fock space."""

from .classical import ClassicalRV, cconv, finite, gaussian, point_mass, symmetric_cconv
from .convolution import beam_splitter_unitary, char_function, qcconv, qconv, symmetric_qconv
from .errors import *  # noqa: F401,F403
from .fockspace import (
    DensityMatrix,
    displace,
    displacement,
    make_state,
    mixture,
    partial_trace,
    tensor,
    thermal_entropy,
    trace_distance,
)
from .inequalities import (
    InequalityMargin,
    SubsetCollection,
    WeightDistribution,
    entropy_sum_form_check,
    epi_basic,
    gamma_distribution,
    guha_monotonicity,
    theorem1_check,
    theorem2_check,
    theorem3_check,
    theorem4_check,
)
from .information import KMB, InnerProductSpec, debruijn_check, entropy, fisher, heat_semigroup, score

__version__ = "0.1.0"
