#####################################################################
#                                                                   #
# /indicators/stencils.py                                           #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Numerical time derivatives of sampled index series (efficiencies)."""
import numpy as np
from labscript_utils import dedent

MIN_SAMPLES = 5

# Fourth order one-sided stencils for the first two samples, in units of 1 / (12 h).
# The last two samples use the mirrored stencils with the sign flipped.
_FIRST = np.array([-25, 48, -36, 16, -3])
_SECOND = np.array([-3, -10, 18, -6, 1])


def uniform_spacing(grid, rtol=1e-9):
    """The spacing of a uniform grid, or ValueError"""
    grid = np.asarray(grid, dtype=float)
    if len(grid) < MIN_SAMPLES:
        msg = f"""at least {MIN_SAMPLES} samples are needed for a fourth order
            derivative, got {len(grid)}"""
        raise ValueError(dedent(msg))
    steps = np.diff(grid)
    h = (grid[-1] - grid[0]) / (len(grid) - 1)
    if np.any(np.abs(steps - h) > rtol * max(abs(h), np.max(np.abs(grid)))):
        raise ValueError("derivative stencils require a uniformly spaced grid")
    return h


def efficiency(values, grid):
    """d/dt of `values` (samples along axis 0) by fourth order finite differences:
    central in the interior, one-sided at the two samples at each end"""
    values = np.asarray(values, dtype=float)
    h = uniform_spacing(grid)
    out = np.empty_like(values)
    f = values
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    head = f[:5]
    tail = f[-5:][::-1]
    out[0] = np.tensordot(_FIRST, head, axes=1) / (12 * h)
    out[1] = np.tensordot(_SECOND, head, axes=1) / (12 * h)
    out[-1] = -np.tensordot(_FIRST, tail, axes=1) / (12 * h)
    out[-2] = -np.tensordot(_SECOND, tail, axes=1) / (12 * h)
    return out


def difference_quotients(values, grid):
    """Forward difference quotients between consecutive samples. The last sample has
    no successor and is NaN."""
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    out = np.full_like(values, np.nan)
    if len(grid) < 2:
        return out
    dt = np.diff(grid).reshape((-1,) + (1,) * (values.ndim - 1))
    out[:-1] = np.diff(values, axis=0) / dt
    return out


def rate_of_change(system, values):
    """Efficiency of an index series of `system`: stencil derivatives for solved
    trajectories, difference quotients for sequences of steady snapshots"""
    if getattr(system, 'discrete', False):
        return difference_quotients(values, system.grid)
    return efficiency(values, system.grid)
