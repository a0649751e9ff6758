#####################################################################
#                                                                   #
# /indicators/utilities.py                                          #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
import logging
from dataclasses import dataclass

import numpy as np

from .stencils import rate_of_change

logger = logging.getLogger(__name__)


@dataclass
class UtilityReport:
    """Utility indices: the net benefit U = E - E^T of each compartment from each
    other, for one effect report. U is skew-symmetric by construction."""

    effects: object
    matrix: np.ndarray
    efficiency: np.ndarray = None

    @property
    def grid(self):
        return self.effects.grid

    @property
    def label(self):
        return self.effects.label

    @property
    def receivers(self):
        return self.matrix.sum(axis=-1)

    @property
    def donors(self):
        return self.matrix.sum(axis=-2)

    @property
    def total(self):
        """System utility, the sum of all entries of U: zero at every defined
        sample to within rounding"""
        return self.matrix.sum(axis=(-2, -1))


def utility_indices(effects, system=None):
    """Utility indices of an :class:`EffectReport`. With `system`, the utility
    efficiencies (time derivatives) are attached too."""
    E = effects.matrix
    report = UtilityReport(effects=effects, matrix=E - np.swapaxes(E, -2, -1))
    if system is not None:
        report.efficiency = rate_of_change(system, report.matrix)
    return report
