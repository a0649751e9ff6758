#####################################################################
#                                                                   #
# /partition/__init__.py                                            #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from .decomposition import (
    DecomposedState,
    SubthroughflowEval,
    decomposition_factors,
    decomposed_rhs,
    subthroughflows,
    flow_intensity_matrix,
    outward_intensity,
    residence_diagonal,
    storage_tolerance,
    flow_tolerance,
    input_bound,
)
from .trajectory import (
    AuxiliaryBlock,
    BlockContext,
    ExposureBlock,
    SystemTotalsBlock,
    DecomposedTrajectory,
    sample_index,
    solve_decomposed,
)
