#####################################################################
#                                                                   #
# /indicators/resilience.py                                         #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Restoration time after a disturbance.

The system state at a reference time before the disturbance is taken as the
undisturbed state. A substorage is within its band while it differs from its
reference value by at most `band` times that value, with a floor of the storage
tolerance. The disturbance peaks at the largest deviation of the inputs from their
reference values, and sets in when that deviation first reaches half its peak. The
recovery interval runs from the onset to the last time all substorages re-enter
their bands.
"""
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecoveryDiagnostic:
    reference: float
    band: float
    disturbance: float
    onset: float
    departure: float
    recovery: float
    recovered: bool

    @property
    def interval(self):
        """Time from the onset of the disturbance until the substorages are back in
        their bands. Zero if they never left, NaN if they have not returned by the
        end. Without an input disturbance it is measured from the departure."""
        if not self.recovered:
            return float('nan')
        if np.isnan(self.departure):
            return 0.0
        start = self.departure if np.isnan(self.onset) else self.onset
        return self.recovery - start


def recovery_diagnostic(system, reference=10.0, band=0.01):
    """Departure from and return to the pre-disturbance substorages.

    Args:
        system: A solved trajectory. `reference` must be one of its sample times.
        reference (float): Time at which the system is taken to be undisturbed.
        band (float): Relative half-width of the band around each substorage.
    """
    if not band > 0:
        raise ValueError(f"band must be positive, got {band!r}")
    ref = system.sample_index(reference)
    grid = system.grid
    X = system.X[:, :, 1:]
    tolerance = np.maximum(band * np.abs(X[ref]), system.eps_storage)
    inside = np.all(np.abs(X - X[ref]) <= tolerance, axis=(-2, -1))

    after = np.arange(len(grid)) > ref
    deviation = np.max(np.abs(system.z - system.z[ref]), axis=-1)
    disturbance = onset = float('nan')
    if np.any(after):
        candidates = np.where(after, deviation, -np.inf)
        peak = int(np.argmax(candidates))
        if deviation[peak] > 0:
            disturbance = float(grid[peak])
            # half maximum
            rising = np.flatnonzero(after & (deviation >= deviation[peak] / 2))
            onset = float(grid[rising[0]])

    outside = np.flatnonzero(after & ~inside)
    if len(outside) == 0:
        departure = recovery = float('nan')
        recovered = True
    else:
        departure = float(grid[outside[0]])
        last = outside[-1]
        recovered = last < len(grid) - 1
        recovery = float(grid[last + 1]) if recovered else float('nan')
    result = RecoveryDiagnostic(
        reference=float(grid[ref]),
        band=band,
        disturbance=disturbance,
        onset=onset,
        departure=departure,
        recovery=recovery,
        recovered=recovered,
    )
    logger.info(
        "recovery: disturbance from %r peaking at %r, left band at %r, back at %r",
        onset,
        disturbance,
        departure,
        recovery,
    )
    return result
