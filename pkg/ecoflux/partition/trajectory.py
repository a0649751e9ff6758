#####################################################################
#                                                                   #
# /partition/trajectory.py                                          #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Solving the decomposed system, optionally together with auxiliary states.

Auxiliary blocks are extra ODE states integrated in the same pass as the substorages:
time integrals (exposures, averages) and the linear storage equations of diact and
transient analysis. Each block sees the substorages, intensities and inputs at the
current stage through a :class:`BlockContext`. A block starting after t0 has zero
state until its start time; the run is split into segments at block start times so
that no step straddles a switch-on.
"""
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from labscript_utils import dedent

from ..solver import TrajectoryStats, integrate
from .decomposition import (
    DecomposedState,
    decomposed_derivative,
    flow_tolerance,
    input_bound,
    outward_intensity,
    storage_tolerance,
    subthroughflow_arrays,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockContext:
    """The decomposed system at one stage of the integration"""

    t: float
    X: np.ndarray
    x: np.ndarray
    Q: np.ndarray
    w: np.ndarray
    z: np.ndarray
    rho: np.ndarray
    eps_storage: float
    eps_flow: float


class AuxiliaryBlock(object):
    """Base class of auxiliary state blocks.

    Subclasses set `name` and `size` and implement derivative(ctx, y), returning an
    array of shape (size,). `labels` names each component for export.
    """

    name = None
    size = 0
    start = None

    def derivative(self, ctx, y):
        raise NotImplementedError

    @property
    def labels(self):
        return [f'{self.name}_{i}' for i in range(self.size)]


class ExposureBlock(AuxiliaryBlock):
    """Running integrals of every substorage, the exposures e_ik"""

    name = 'exposure'

    def __init__(self, n, start=None):
        self.n = n
        self.size = n * (n + 1)
        self.start = start

    def derivative(self, ctx, y):
        return ctx.X.ravel()


class SystemTotalsBlock(AuxiliaryBlock):
    """Running integrals of total system inward throughflow, outward throughflow and
    storage, the normalizers of average indices"""

    name = 'system_totals'
    size = 3

    def __init__(self, start=None):
        self.start = start

    def derivative(self, ctx, y):
        inward = ctx.z.sum() + (ctx.Q @ ctx.x).sum()
        outward = (ctx.rho * ctx.x).sum()
        return np.array([inward, outward, ctx.x.sum()])

    @property
    def labels(self):
        return ['inward', 'outward', 'storage']


@dataclass
class DecomposedTrajectory:
    """Substorages sampled on a grid, with the intensities and inputs at each sample.

    X has shape (samples, n, n+1); Q (samples, n, n); w and z (samples, n). `aux` maps
    block names to arrays of shape (samples, block size).
    """

    model: object
    grid: np.ndarray
    X: np.ndarray
    Q: np.ndarray
    w: np.ndarray
    z: np.ndarray
    eps_storage: float
    eps_flow: float
    aux: dict = field(default_factory=dict)
    blocks: dict = field(default_factory=dict)
    stats: TrajectoryStats = field(default_factory=TrajectoryStats)

    @property
    def n(self):
        return self.X.shape[1]

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

    def state(self, index):
        return DecomposedState(self.grid[index], self.X[index])

    def sample_index(self, t):
        return sample_index(self.grid, t)

    def window(self, name, t_start, t_end):
        """Integral over [t_start, t_end] of an integrating auxiliary block, from the
        difference of its running integral at the two (grid) times"""
        values = self.aux[name]
        return values[self.sample_index(t_end)] - values[self.sample_index(t_start)]


def sample_index(grid, t):
    """Index of the grid point equal to t, to within rounding"""
    index = int(np.argmin(np.abs(grid - t)))
    spacing = np.max(np.abs(grid)) if len(grid) else 1.0
    if abs(grid[index] - t) > 1e-9 * max(1.0, spacing):
        msg = f"""time {t!r} is not a sample time; choose a number of samples
            that places it on the grid"""
        raise ValueError(dedent(msg))
    return index


def _segments(t0, t1, starts):
    inner = sorted({start for start in starts if t0 < start < t1})
    bounds = [t0, *inner, t1]
    return list(zip(bounds[:-1], bounds[1:]))


def solve_decomposed(model, spec, blocks=()):
    """Integrate the decomposed system of `model` and any auxiliary blocks.

    Args:
        model (CompartmentalModel): A validated model.
        spec (IntegrationSpec): Interval, tolerances and sample grid.
        blocks (sequence of AuxiliaryBlock): Extra states to integrate in the same
            pass. Names must be unique.

    Returns:
        DecomposedTrajectory
    """
    n = model.n
    t0, t1 = spec.t0, spec.t1
    names = [b.name for b in blocks]
    if len(set(names)) != len(names):
        raise ValueError(f"auxiliary block names are not unique: {names}")
    starts = {block.name: t0 if block.start is None else block.start for block in blocks}
    for block in blocks:
        if not t0 <= starts[block.name] <= t1:
            msg = f"""block {block.name!r} starts at {starts[block.name]!r}, outside the
                integration interval [{t0!r}, {t1!r}]"""
            raise ValueError(dedent(msg))

    bound = input_bound(model, spec.sample_grid)
    eps_storage = storage_tolerance(model.x0, bound)
    eps_flow = flow_tolerance(bound)
    logger.debug(
        "input bound %r: storage tolerance %r, flow tolerance %r",
        bound,
        eps_storage,
        eps_flow,
    )

    m = n * (n + 1)
    slices = {}
    offset = m
    for block in blocks:
        slices[block.name] = slice(offset, offset + block.size)
        offset += block.size

    def make_rhs(active):
        def rhs(t, y):
            X = y[:m].reshape(n, n + 1)
            x = X.sum(axis=1)
            Q, w, z = model.intensities(t, x)
            dy = np.zeros_like(y)
            dy[:m] = decomposed_derivative(X, Q, w, z).ravel()
            if active:
                rho = outward_intensity(Q, w)
                ctx = BlockContext(t, X, x, Q, w, z, rho, eps_storage, eps_flow)
                for block in active:
                    sl = slices[block.name]
                    dy[sl] = block.derivative(ctx, y[sl])
            return dy

        return rhs

    y = np.zeros(offset)
    y[:m] = DecomposedState.initial(t0, model.x0).X.ravel()
    grid = spec.sample_grid
    values = np.empty((len(grid), offset))
    stats = TrajectoryStats()
    for a, b in _segments(t0, t1, starts.values()):
        active = [block for block in blocks if starts[block.name] <= a]
        logger.debug("segment [%r, %r] with %d active block(s)", a, b, len(active))
        inside = (grid >= a) & (grid <= b)
        # Segment ends are always sampled so the next segment can start from them:
        segment_grid = np.union1d(grid[inside], [a, b])
        segment_spec = replace(spec.restricted(a, b), sample_grid=segment_grid)
        segment = integrate(make_rhs(active), y, segment_spec)
        stats += segment.stats
        values[inside] = segment.values[np.isin(segment_grid, grid[inside])]
        y = segment.values[-1]

    X = values[:, :m].reshape(len(grid), n, n + 1)
    Q = np.empty((len(grid), n, n))
    w = np.empty((len(grid), n))
    z = np.empty((len(grid), n))
    for s, t in enumerate(grid):
        Q[s], w[s], z[s] = model.intensities(t, X[s].sum(axis=1))
    aux = {block.name: values[:, slices[block.name]] for block in blocks}
    logger.info(
        "solved %d-compartment decomposed system over [%r, %r]: %d steps",
        n,
        t0,
        t1,
        stats.steps,
    )
    return DecomposedTrajectory(
        model=model,
        grid=grid,
        X=X,
        Q=Q,
        w=w,
        z=z,
        eps_storage=eps_storage,
        eps_flow=eps_flow,
        aux=aux,
        blocks={block.name: block for block in blocks},
        stats=stats,
    )
