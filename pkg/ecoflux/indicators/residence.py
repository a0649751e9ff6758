#####################################################################
#                                                                   #
# /indicators/residence.py                                          #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from dataclasses import dataclass

import numpy as np

from .stencils import rate_of_change


@dataclass
class ResidenceReport:
    """Diagonal of the residence time matrix per sample, NaN where a compartment is
    empty or has no outward throughflow, and its time derivative, the reverse
    activity rate"""

    grid: np.ndarray
    R: np.ndarray
    reverse_activity_rate: np.ndarray


def residence_times(system):
    R = system.subthroughflows.R
    return ResidenceReport(system.grid, R, rate_of_change(system, R))
