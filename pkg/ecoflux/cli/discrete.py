#####################################################################
#                                                                   #
# /cli/discrete.py                                                  #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Sequences of steady states read from snapshot tables.

A snapshot table has a time column `t` and, per compartment name, columns `x_<name>`
(storage), `z_<name>` (environmental input) and `y_<name>` (environmental output),
plus `f_<receiver>_<donor>` for every flow. Missing input, output and flow columns are
zero. Each snapshot is treated as a steady state: intensities are flows over donor
storages and the substorages solve

    (diag(rho) - Q) X[:, 1:] = diag(z),    X[:, 0] = 0

Integrals (exposures, averaging windows) are cumulative sums of value times the time
to the next snapshot, and efficiencies are difference quotients.
"""
import logging
from functools import cached_property

import numpy as np
from labscript_utils import dedent

from ..diact import (
    COMPOSITE,
    SIMPLE,
    VARIANTS,
    DiactFlowIntegralBlock,
    diact_flows,
    diact_matrices,
)
from ..errors import EvaluationError
from ..partition import (
    ExposureBlock,
    SystemTotalsBlock,
    flow_tolerance,
    outward_intensity,
    storage_tolerance,
)
from ..partition.decomposition import subthroughflow_arrays
from .export import read_csv

logger = logging.getLogger(__name__)

# Relative mismatch between tabulated and steady storages that is reported
STEADY_MISMATCH = 1e-6


def running_sum(values, grid):
    """Left Riemann sums: entry s is the sum over r < s of values[r] (t[r+1] - t[r])"""
    values = np.asarray(values, dtype=float)
    dt = np.diff(np.asarray(grid, dtype=float))
    dt = dt.reshape((-1,) + (1,) * (values.ndim - 1))
    out = np.zeros_like(values)
    out[1:] = np.cumsum(values[:-1] * dt, axis=0)
    return out


def _intensity(numerator, storage):
    out = np.zeros(np.broadcast(numerator, storage).shape)
    np.divide(numerator, storage, out=out, where=np.broadcast_to(storage > 0, out.shape))
    return out


class SteadySnapshots(object):
    """Snapshot sequence exposing the same quantities as a DecomposedTrajectory"""

    discrete = True

    def __init__(self, names, grid, x, z, y, F):
        grid = np.asarray(grid, dtype=float)
        if len(grid) < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("snapshot times must be strictly increasing, at least two")
        self.names = tuple(names)
        self.grid = grid
        self.tabulated = np.asarray(x, dtype=float)
        n = len(self.names)
        # Q[s, i, j] = f_ij / x_j, w_i = y_i / x_i; empty compartments get zero
        self.Q = _intensity(F, self.tabulated[:, np.newaxis, :])
        self.w = _intensity(y, self.tabulated)
        self.z = np.asarray(z, dtype=float)
        bound = float(np.max(np.abs(self.z))) if self.z.size else 0.0
        self.eps_storage = storage_tolerance(self.tabulated[0], bound)
        self.eps_flow = flow_tolerance(bound)

        rho = outward_intensity(self.Q, self.w)
        M = rho[:, :, np.newaxis] * np.eye(n) - self.Q
        self.X = np.zeros((len(grid), n, n + 1))
        for s, t in enumerate(grid):
            try:
                self.X[s, :, 1:] = np.linalg.solve(M[s], np.diag(self.z[s]))
            except np.linalg.LinAlgError:
                msg = """the flow intensity matrix is singular: some storage never
                    leaves the system, so there is no steady state"""
                raise EvaluationError(dedent(msg), entry='snapshot', t=float(t)) from None
        steady = self.X.sum(axis=-1)
        scale = np.maximum(np.abs(self.tabulated), self.eps_storage)
        mismatch = float(np.max(np.abs(steady - self.tabulated) / scale))
        if mismatch > STEADY_MISMATCH:
            logger.warning(
                "snapshots are not steady: storages differ from the balance by up to "
                "%.3g relative; the steady storages are used",
                mismatch,
            )

        self.blocks = {
            'exposure': ExposureBlock(n),
            'system_totals': SystemTotalsBlock(),
            'diact_flow_integrals': DiactFlowIntegralBlock(
                n, VARIANTS, (COMPOSITE, SIMPLE)
            ),
        }
        self.aux = {
            'exposure': running_sum(self.X.reshape(len(grid), -1), grid),
            'system_totals': running_sum(
                np.stack(
                    [
                        self.tau_in.sum(axis=-1),
                        self.tau_out.sum(axis=-1),
                        self.x.sum(axis=-1),
                    ],
                    axis=-1,
                ),
                grid,
            ),
        }
        dm = diact_matrices(self)
        block = self.blocks['diact_flow_integrals']
        flows = [diact_flows(dm, *key).reshape(len(grid), -1) for key in block.keys]
        flows = np.concatenate(flows, axis=-1)
        self.aux['diact_flow_integrals'] = running_sum(flows, grid)
        logger.info("%d steady snapshot(s) of %d compartment(s)", len(grid), n)

    @classmethod
    def from_columns(cls, columns, names):
        """Build from a mapping of column label to values, e.g. from read_csv"""
        if 't' not in columns:
            raise ValueError("snapshot table has no time column 't'")
        grid = columns['t']
        samples = len(grid)
        n = len(names)
        zero = np.zeros(samples)
        x = np.empty((samples, n))
        z = np.empty((samples, n))
        y = np.empty((samples, n))
        F = np.zeros((samples, n, n))
        known = {'t'}
        for i, name in enumerate(names):
            label = f'x_{name}'
            if label not in columns:
                raise ValueError(f"snapshot table has no storage column {label!r}")
            x[:, i] = columns[label]
            z[:, i] = columns.get(f'z_{name}', zero)
            y[:, i] = columns.get(f'y_{name}', zero)
            known.update({label, f'z_{name}', f'y_{name}'})
            for j, donor in enumerate(names):
                label = f'f_{name}_{donor}'
                if label in columns:
                    F[:, i, j] = columns[label]
                    known.add(label)
        unknown = sorted(set(columns) - known)
        if unknown:
            msg = f"""snapshot table has columns that match no compartment:
                {', '.join(unknown)}"""
            raise ValueError(dedent(msg))
        for label, values in (('x', x), ('z', z), ('y', y), ('f', F)):
            if not np.all(np.isfinite(values)):
                raise ValueError(f"snapshot table has empty or non-finite {label} values")
            if np.any(values < 0):
                raise ValueError(f"snapshot table has negative {label} values")
        return cls(names, grid, x, z, y, F)

    @classmethod
    def from_table(cls, path, names):
        return cls.from_columns(read_csv(path), names)

    @property
    def n(self):
        return len(self.names)

    @property
    def x(self):
        return self.X.sum(axis=-1)

    @property
    def rho(self):
        return outward_intensity(self.Q, self.w)

    @property
    def F(self):
        return self.Q * self.x[:, np.newaxis, :]

    @property
    def tau_in(self):
        return self.z + (self.Q @ self.x[..., np.newaxis])[..., 0]

    @property
    def tau_out(self):
        return self.rho * self.x

    @cached_property
    def subthroughflows(self):
        return subthroughflow_arrays(self.X, self.Q, self.w, self.z, self.eps_flow)

    def sample_index(self, t):
        index = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[index] - t) > 1e-9 * max(1.0, float(np.max(np.abs(self.grid)))):
            raise ValueError(f"time {t!r} is not a snapshot time")
        return index

    def window(self, name, t_start, t_end):
        values = self.aux[name]
        return values[self.sample_index(t_end)] - values[self.sample_index(t_start)]

    def steady_storages(self, field):
        """Diact storages of every computed diact flow, each the flow over the
        receiver's outward intensity, with their running sums"""
        rho = self.rho[:, :, np.newaxis]
        storages = {}
        integrals = {}
        for key, flow in field.flows.items():
            storage = np.full_like(flow, np.nan)
            np.divide(flow, rho, out=storage, where=np.broadcast_to(rho > 0, flow.shape))
            storages[key] = storage
            integrals[key] = running_sum(storage, self.grid)
        return storages, integrals
