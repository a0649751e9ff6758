#####################################################################
#                                                                   #
# /solver/dormand_prince.py                                         #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Adaptive Dormand-Prince 5(4) integrator with dense output onto a sample grid.

The fifth order solution is propagated (local extrapolation). Step sizes follow a PI
controller on the max-norm of the embedded error estimate, and samples between steps
come from the method's fourth order continuous extension, so the sample grid never
constrains the step size.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from labscript_utils import dedent

from ..errors import SolverError

logger = logging.getLogger(__name__)

# Butcher tableau. The seventh stage is evaluated at the new point and reused as the
# first stage of the next step.
C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# Difference between the fifth and fourth order weights, over all seven stages:
E = np.array(
    [71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Continuous extension: y(t + s*h) = y + h * (K.T @ P) @ [s, s^2, s^3, s^4]
P = np.array(
    [
        [
            1,
            -8048581381 / 2820520608,
            8663915743 / 2820520608,
            -12715105075 / 11282082432,
        ],
        [0, 0, 0, 0],
        [
            0,
            131558114200 / 32700410799,
            -68118460800 / 10900136933,
            87487479700 / 32700410799,
        ],
        [
            0,
            -1754552775 / 470086768,
            14199869525 / 1410260304,
            -10690763975 / 1880347072,
        ],
        [
            0,
            127303824393 / 49829197408,
            -318862633887 / 49829197408,
            701980252875 / 199316789632,
        ],
        [
            0,
            -282668133 / 205662961,
            2019193451 / 616988883,
            -1453857185 / 822651844,
        ],
        [
            0,
            40617522 / 29380423,
            -110615467 / 29380423,
            69997945 / 29380423,
        ],
    ]
)

ORDER = 5
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
# PI controller exponents on the current and previous error norms:
ALPHA = 0.2 - 0.75 * 0.04
BETA = 0.04


@dataclass(frozen=True)
class IntegrationSpec:
    """Time span, tolerances and sample grid of one integration.

    `sample_grid` must be strictly increasing and lie within [t0, t1]. If it is None,
    only the end points are sampled. With `nonneg_clip`, state components in
    [-atol, 0) are set to zero after every accepted step and in every sample.
    """

    t0: float
    t1: float
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = math.inf
    sample_grid: np.ndarray = None
    nonneg_clip: bool = False
    max_steps: int = 1_000_000
    first_step: float = None

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)):
            raise ValueError("integration bounds must be finite")
        if not self.t1 > self.t0:
            msg = f"""end time t1={self.t1!r} must be greater than start time
                t0={self.t0!r}"""
            raise ValueError(dedent(msg))
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must both be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.sample_grid is None:
            grid = np.array([self.t0, self.t1], dtype=float)
        else:
            grid = np.array(self.sample_grid, dtype=float)
        if grid.ndim != 1 or len(grid) == 0:
            raise ValueError("sample grid must be a non-empty 1D sequence of times")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("sample grid must be strictly increasing")
        if grid[0] < self.t0 or grid[-1] > self.t1:
            msg = f"""sample grid [{grid[0]!r}, {grid[-1]!r}] is not within the
                integration interval [{self.t0!r}, {self.t1!r}]"""
            raise ValueError(dedent(msg))
        grid.setflags(write=False)
        object.__setattr__(self, 'sample_grid', grid)

    @classmethod
    def uniform(cls, t0, t1, samples, **kwargs):
        """Spec sampling `samples` equally spaced times from t0 to t1 inclusive"""
        if samples < 2:
            raise ValueError(f"at least 2 samples are required, got {samples}")
        return cls(t0, t1, sample_grid=np.linspace(t0, t1, samples), **kwargs)

    def restricted(self, t0, t1):
        """The same settings over the sub-interval [t0, t1], keeping the grid points
        inside it"""
        grid = self.sample_grid
        grid = grid[(grid >= t0) & (grid <= t1)]
        return IntegrationSpec(
            t0,
            t1,
            rtol=self.rtol,
            atol=self.atol,
            max_step=self.max_step,
            sample_grid=grid if len(grid) else None,
            nonneg_clip=self.nonneg_clip,
            max_steps=self.max_steps,
        )


@dataclass
class TrajectoryStats:
    steps: int = 0
    rejected: int = 0
    rhs_evaluations: int = 0

    def __iadd__(self, other):
        self.steps += other.steps
        self.rejected += other.rejected
        self.rhs_evaluations += other.rhs_evaluations
        return self


@dataclass
class Trajectory:
    """Solution values on the requested sample grid. `values[s]` is the state at
    `grid[s]`."""

    grid: np.ndarray
    values: np.ndarray
    stats: TrajectoryStats = field(default_factory=TrajectoryStats)


def _rms(v):
    return float(np.linalg.norm(v) / math.sqrt(v.size)) if v.size else 0.0


def _initial_step(rhs, t0, y0, f0, spec, stats):
    """Starting step size from the usual estimate of the solution's second
    derivative"""
    interval = spec.t1 - spec.t0
    scale = spec.atol + np.abs(y0) * spec.rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, interval)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    stats.rhs_evaluations += 1
    if not np.all(np.isfinite(f1)):
        return min(h0, spec.max_step)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / ORDER)
    return min(100 * h0, h1, interval, spec.max_step)


def _clip(y, atol):
    clipped = (y < 0) & (y >= -atol)
    if np.any(clipped):
        y = y.copy()
        y[clipped] = 0.0
    return y


def integrate(rhs, y0, spec):
    """Integrate dy/dt = rhs(t, y) from spec.t0 to spec.t1.

    Args:
        rhs (callable): Function of (t, y) returning dy/dt as an array shaped like y.
        y0 (array_like): Initial state, 1D.
        spec (IntegrationSpec): Interval, tolerances and sample grid.

    Returns:
        Trajectory: Values at exactly the times in spec.sample_grid.

    Raises:
        SolverError: If the step size underflows, the right-hand side is not finite,
            or more than spec.max_steps steps are taken.
    """
    y = np.array(y0, dtype=float)
    if y.ndim != 1:
        raise ValueError(f"initial state must be 1D, got shape {y.shape}")
    grid = spec.sample_grid
    values = np.empty((len(grid), y.size))
    stats = TrajectoryStats()
    t = float(spec.t0)
    t1 = float(spec.t1)
    if spec.nonneg_clip:
        y = _clip(y, spec.atol)

    def evaluate(t, y):
        dy = np.asarray(rhs(t, y), dtype=float)
        stats.rhs_evaluations += 1
        if dy.shape != y.shape:
            msg = f"""right-hand side returned shape {dy.shape}, expected
                {y.shape}"""
            raise ValueError(dedent(msg))
        return dy

    f = evaluate(t, y)
    if not np.all(np.isfinite(f)):
        raise SolverError("non-finite right-hand side at the initial state", t)

    index = 0
    while index < len(grid) and grid[index] == t:
        values[index] = y
        index += 1

    if y.size == 0:
        values[index:] = y
        return Trajectory(grid, values, stats)

    h = spec.first_step or _initial_step(evaluate, t, y, f, spec, stats)
    K = np.empty((7, y.size))
    previous_norm = 1e-4
    rejected_last = False

    while t < t1:
        if stats.steps + stats.rejected >= spec.max_steps:
            raise SolverError(f"exceeded the limit of {spec.max_steps} steps", t)
        h = min(h, spec.max_step)
        if h >= t1 - t:
            h = t1 - t
            t_new = t1
        else:
            t_new = t + h
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise SolverError(f"step size {h!r} underflowed", t)

        K[0] = f
        for stage in range(1, 6):
            dy = h * (A[stage] @ K[:stage])
            K[stage] = evaluate(t + C[stage] * h, y + dy)
        y_new = y + h * (B @ K[:6])
        f_new = evaluate(t_new, y_new)
        K[6] = f_new
        if not (np.all(np.isfinite(K)) and np.all(np.isfinite(y_new))):
            raise SolverError("non-finite right-hand side", t)

        scale = spec.atol + spec.rtol * np.maximum(np.abs(y), np.abs(y_new))
        norm = float(np.max(np.abs(h * (E @ K)) / scale))

        if norm > 1:
            stats.rejected += 1
            factor = max(MIN_FACTOR, SAFETY * norm ** -ALPHA)
            h *= factor
            rejected_last = True
            continue

        # Accepted. Sample grid points in (t, t_new]:
        if index < len(grid) and grid[index] <= t_new:
            coefficients = K.T @ P
            while index < len(grid) and grid[index] <= t_new:
                if grid[index] == t_new:
                    sample = y_new
                else:
                    s = (grid[index] - t) / h
                    sample = y + h * (coefficients @ np.array([s, s**2, s**3, s**4]))
                if spec.nonneg_clip:
                    sample = _clip(sample, spec.atol)
                values[index] = sample
                index += 1

        if spec.nonneg_clip:
            clipped = _clip(y_new, spec.atol)
            if clipped is not y_new:
                y_new = clipped
                f_new = evaluate(t_new, y_new)

        stats.steps += 1
        if norm == 0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * norm ** -ALPHA * previous_norm**BETA
            factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
        if rejected_last:
            factor = min(1.0, factor)
        rejected_last = False
        previous_norm = max(norm, 1e-4)
        h *= factor
        t, y, f = t_new, y_new, f_new

    logger.debug(
        "integrated [%r, %r]: %d steps, %d rejected, %d rhs evaluations",
        spec.t0,
        spec.t1,
        stats.steps,
        stats.rejected,
        stats.rhs_evaluations,
    )
    return Trajectory(grid, values, stats)
