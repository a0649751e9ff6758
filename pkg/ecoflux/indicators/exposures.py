#####################################################################
#                                                                   #
# /indicators/exposures.py                                          #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Exposures: time integrals of substorages, diact storages and transient storages.

Exposure e_ik(t1, t) is the integral of substorage X_ik over [t1, t], the cumulative
contact of compartment i with the input into k. All integrals are running integrals
from auxiliary states, so any window between two sample times is a difference of two
samples.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..diact import COMPOSITE

logger = logging.getLogger(__name__)


@dataclass
class ExposureReport:
    """Exposures over [t_start, t_end].

    `matrix[i, k - 1]` is the exposure of compartment i to the input into k; the
    initial subsystem is reported separately as `initial`. `running` holds
    E(t_start, t) for every sample t, NaN before t_start.
    """

    t_start: float
    t_end: float
    matrix: np.ndarray
    initial: np.ndarray
    running: np.ndarray

    @property
    def receivers(self):
        return self.matrix.sum(axis=-1)

    @property
    def sources(self):
        return self.matrix.sum(axis=-2)

    @property
    def total(self):
        return float(self.matrix.sum())


def exposures(system, t_start, t_end):
    """Substorage exposures between two sample times, from the 'exposure' block"""
    n = system.n
    running = system.aux['exposure'].reshape(-1, n, n + 1)
    start = system.sample_index(t_start)
    end = system.sample_index(t_end)
    window = running[end] - running[start]
    since = np.full_like(running, np.nan)
    since[start:] = running[start:] - running[start]
    return ExposureReport(
        t_start=t_start,
        t_end=t_end,
        matrix=window[:, 1:],
        initial=window[:, 0],
        running=since[:, :, 1:],
    )


def diact_exposures(field, system, variant, t_start, t_end, kind=COMPOSITE):
    """Integral of the tracked diact storages of `variant` over [t_start, t_end]:
    unnormalized average storage-based diact effects"""
    integrals = field.storage_integral(variant, kind)
    start = system.sample_index(t_start)
    end = system.sample_index(t_end)
    return integrals[end] - integrals[start]


def transient_exposures(trace, t_start, t_end):
    """Integral of each traced node's transient storage over [t_start, t_end]"""
    start = trace.sample_index(t_start)
    end = trace.sample_index(t_end)
    return trace.exposure[end] - trace.exposure[start]
