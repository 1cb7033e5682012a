# -*- coding: utf-8 -*-
#
# The MIT License (MIT)
#
# Copyright (C) 2026 The quartic-dispersion contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of
# this software and associated documentation files (the "Software"), to deal in
# the Software without restriction, including without limitation the rights to
# use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of
# the Software, and to permit persons to whom the Software is furnished to do so,
# subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS
# FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR
# COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER
# IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN
# CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""quartic-dispersion library."""

from ._version import __version__
from .config import ScenarioConfig, load_config
from .exceptions import (
    ConfigError,
    ContractError,
    DiagonalSingularityError,
    DomainError,
    EmbeddedEigenvalueError,
    EvaluationError,
    ExtractionError,
    FitError,
    GridCapError,
    NearSingularError,
    NotFoundError,
    QuarticError,
)
from .kernels import (
    CONSTANTS,
    KernelValue,
    expansion_term,
    free_propagator_kernel,
    quartic_resolvent,
    remainder,
    schrodinger_resolvent,
)
from .oscillatory import (
    Cutoff,
    DecayFit,
    OscillatoryResult,
    cutoff_moment,
    fit_decay,
    stone_high_energy,
    stone_low_energy,
)
from .potential import (
    GridSpec,
    PotentialFormula,
    SampledPotential,
    build_potential,
    coupling_scan,
    tune_to_resonance,
)
from .propagator import (
    PropagatorKernel,
    ResolventSample,
    Scenario,
    born_series,
    decay_report,
    evolve_kernel,
    perturbed_resolvent,
    spectral_density,
    spectral_positivity,
    standard_points,
    weighted_sup,
)
from .threshold import (
    A_inverse,
    Classification,
    MInverse,
    ThresholdData,
    assemble_M,
    bound_state_scan,
    build_C_minus1,
    build_F_t,
    build_threshold,
    embedded_eigenvalue_scan,
    invert_M_direct,
    invert_M_jensen_nenciu,
    threshold_constant,
)

__all__ = [
    "__version__",
    "ScenarioConfig",
    "load_config",
    "ConfigError",
    "ContractError",
    "DiagonalSingularityError",
    "DomainError",
    "EmbeddedEigenvalueError",
    "EvaluationError",
    "ExtractionError",
    "FitError",
    "GridCapError",
    "NearSingularError",
    "NotFoundError",
    "QuarticError",
    "CONSTANTS",
    "KernelValue",
    "expansion_term",
    "free_propagator_kernel",
    "quartic_resolvent",
    "remainder",
    "schrodinger_resolvent",
    "Cutoff",
    "DecayFit",
    "OscillatoryResult",
    "cutoff_moment",
    "fit_decay",
    "stone_high_energy",
    "stone_low_energy",
    "GridSpec",
    "PotentialFormula",
    "SampledPotential",
    "build_potential",
    "coupling_scan",
    "tune_to_resonance",
    "PropagatorKernel",
    "ResolventSample",
    "Scenario",
    "born_series",
    "decay_report",
    "evolve_kernel",
    "perturbed_resolvent",
    "spectral_density",
    "spectral_positivity",
    "standard_points",
    "weighted_sup",
    "A_inverse",
    "Classification",
    "MInverse",
    "ThresholdData",
    "assemble_M",
    "bound_state_scan",
    "build_C_minus1",
    "build_F_t",
    "build_threshold",
    "embedded_eigenvalue_scan",
    "invert_M_direct",
    "invert_M_jensen_nenciu",
    "threshold_constant",
]
