#####################################################################
#                                                                   #
# /partition/decomposition.py                                       #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Pointwise algebra of the decomposed system.

The substorage matrix X is n x (n+1). Column 0 holds the initial subsystem, the part
of each compartment's storage that derives from the initial stocks, and column k >= 1
the part derived from the environmental input into compartment k. Row sums of X give
the aggregate storages.

Everything is computed from the intensities Q, w and the inputs z, never from flows
divided by storages. With rho the outward throughflow intensities, rho_j = w_j +
sum_i q_ij, the flow intensity matrix is A = Q - diag(rho) and

    dX/dt = A X + [0 | diag(z)]

The functions here broadcast over any leading axes, so the same code evaluates one
state or every sample of a trajectory at once.
"""
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

EPS_SCALE = 1e-12


def storage_tolerance(x0, input_bound):
    """Storages at or below this are treated as empty"""
    x0 = np.asarray(x0, dtype=float)
    x_max = float(np.max(np.abs(x0))) if x0.size else 0.0
    return EPS_SCALE * max(1.0, x_max, input_bound)


def flow_tolerance(input_bound):
    """Input-receiving outward subthroughflows at or below this mask their column of
    the diact distribution matrices"""
    return EPS_SCALE * (1.0 + input_bound)


def input_bound(model, grid):
    """Estimate of sup |z| over the sample grid, with inputs evaluated at the initial
    stocks"""
    bound = 0.0
    x0 = np.asarray(model.x0, dtype=float)
    for t in grid:
        _, _, z = model.intensities(t, x0)
        if z.size:
            bound = max(bound, float(np.max(np.abs(z))))
    return bound


@dataclass(frozen=True)
class DecomposedState:
    """Substorages at one time"""

    t: float
    X: np.ndarray

    @property
    def x(self):
        return self.X.sum(axis=-1)

    @classmethod
    def initial(cls, t0, x0):
        """The state at the start of a run: all storage is in the initial subsystem"""
        x0 = np.asarray(x0, dtype=float)
        X = np.zeros((len(x0), len(x0) + 1))
        X[:, 0] = x0
        return cls(t0, X)


def outward_intensity(Q, w):
    """rho_j = w_j + sum_i q_ij"""
    return w + Q.sum(axis=-2)


def _diag(v):
    """Diagonal matrices from the last axis of v"""
    n = v.shape[-1]
    return v[..., :, np.newaxis] * np.eye(n)


def flow_intensity_matrix(Q, w):
    return Q - _diag(outward_intensity(Q, w))


def decomposition_factors(s, eps_storage=0.0):
    """d_jk = X_jk / x_j, with the whole row zero for donors at or below
    eps_storage"""
    X = np.asarray(s.X, dtype=float)
    x = X.sum(axis=-1)
    nonempty = x > eps_storage
    safe = np.where(nonempty, x, 1.0)
    return np.where(nonempty[..., np.newaxis], X / safe[..., np.newaxis], 0.0)


def decomposed_derivative(X, Q, w, z):
    """dX/dt = A X + [0 | diag(z)] from evaluated intensities and inputs"""
    rho = outward_intensity(Q, w)
    dX = Q @ X - rho[..., :, np.newaxis] * X
    dX[..., 1:] += _diag(z)
    return dX


def decomposed_rhs(model, s):
    """Right-hand side of the decomposed system at state `s`, shape n x (n+1)"""
    Q, w, z = model.intensities(s.t, s.x)
    return decomposed_derivative(np.asarray(s.X, dtype=float), Q, w, z)


@dataclass(frozen=True)
class SubthroughflowEval:
    """Subthroughflows of the input subsystems and of the initial subsystem.

    T_in[i, k] and T_out[i, k] are the inward and outward throughflows of
    subcompartment i_k for k = 1..n (column index k - 1). `R` is the diagonal of the
    residence time matrix, NaN where undefined.
    """

    T_in: np.ndarray
    T_out: np.ndarray
    tau0_in: np.ndarray
    tau0_out: np.ndarray
    A: np.ndarray
    R: np.ndarray


def residence_diagonal(x, rho, eps_flow):
    """x_i / tau_out_i, computed as 1 / rho_i. NaN where the outward throughflow
    tau_out_i = rho_i x_i is at most eps_flow."""
    defined = rho * x > eps_flow
    R = np.full(np.shape(rho), np.nan)
    np.divide(1.0, rho, out=R, where=defined)
    return R


def subthroughflow_arrays(X, Q, w, z, eps_flow):
    X = np.asarray(X, dtype=float)
    rho = outward_intensity(Q, w)
    X_input = X[..., 1:]
    T_in = Q @ X_input + _diag(z)
    T_out = rho[..., :, np.newaxis] * X_input
    tau0_in = (Q @ X[..., :1])[..., 0]
    tau0_out = rho * X[..., 0]
    A = Q - _diag(rho)
    R = residence_diagonal(X.sum(axis=-1), rho, eps_flow)
    return SubthroughflowEval(T_in, T_out, tau0_in, tau0_out, A, R)


def subthroughflows(model, s, eps_flow=0.0):
    """Subthroughflow matrices, flow intensity matrix and residence times at state
    `s`"""
    Q, w, z = model.intensities(s.t, s.x)
    return subthroughflow_arrays(s.X, Q, w, z, eps_flow)
