#####################################################################
#                                                                   #
# /indicators/__init__.py                                           #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from .stencils import efficiency, difference_quotients, rate_of_change, uniform_spacing
from .effects import (
    FLOW,
    STORAGE,
    BASES,
    EffectReport,
    AverageIndices,
    check_basis,
    effect_indices,
    with_efficiency,
    average_indices,
    system_totals,
    normalize,
)
from .utilities import UtilityReport, utility_indices
from .exposures import ExposureReport, exposures, diact_exposures, transient_exposures
from .residence import ResidenceReport, residence_times
from .resilience import RecoveryDiagnostic, recovery_diagnostic
