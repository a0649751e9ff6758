#####################################################################
#                                                                   #
# /diact/matrices.py                                                #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Diact distribution matrices and the flows they generate.

For every ordered pair of compartments the flow between them is split five ways:
direct (d), indirect (i), acyclic (a), cycling (c) and transfer (t), with
transfer = direct + indirect = acyclic + cycling. Each variant is a distribution
matrix N that, multiplied by a diagonal of outward subthroughflows, yields flows:

    composite flows     N diag(tau_out - tau0_out)      all environmental inputs
    simple flows        N diag(diag(T_out))             each input at its own entry
    subflows of l       N diag(rho * X[:, l])            one subsystem, l = 0..n

Column k of every N is masked to zero while the input-receiving outward
subthroughflow tau_out of subcompartment k_k is at or below the flow tolerance, which
is always the case at the initial time.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..partition import outward_intensity

logger = logging.getLogger(__name__)

VARIANTS = ('d', 'i', 'a', 'c', 't')
VARIANT_NAMES = {
    'd': 'direct',
    'i': 'indirect',
    'a': 'acyclic',
    'c': 'cycling',
    't': 'transfer',
}
COMPOSITE = 'composite'
SIMPLE = 'simple'


def check_variant(variant):
    if variant not in VARIANTS:
        choices = ', '.join(VARIANTS)
        raise ValueError(f"unknown diact variant {variant!r}, expected one of {choices}")
    return variant


def check_kind(kind, n):
    """A flow kind is 'composite', 'simple' or a subsystem index 0..n"""
    if kind in (COMPOSITE, SIMPLE):
        return kind
    if isinstance(kind, (int, np.integer)) and not isinstance(kind, bool):
        if 0 <= kind <= n:
            return int(kind)
        raise ValueError(f"subsystem {kind} out of range 0..{n}")
    raise ValueError(f"unknown flow kind {kind!r}")


def kind_label(kind):
    return kind if isinstance(kind, str) else f'subsystem_{kind}'


@dataclass(frozen=True)
class DiactMatrices:
    """Distribution matrices and the subthroughflow quantities they are built from.

    All arrays may carry leading sample axes. `N` maps each variant to its n x n
    distribution matrix. `T_tilde` is the inward subthroughflow matrix less inputs and
    `T_hat` the outward subthroughflow matrix, both over the input subsystems.
    `subsystem_outflows[..., k, l]` is rho_k * X_kl for l = 0..n, so column 0 is the
    diagonal of the initial subsystem's outward subthroughflows. `masked` flags the
    columns set to zero.
    """

    N: dict
    T_tilde: np.ndarray
    T_hat: np.ndarray
    tau_hat_s: np.ndarray
    tau_tilde_s: np.ndarray
    subsystem_outflows: np.ndarray
    masked: np.ndarray

    @property
    def n(self):
        return self.T_hat.shape[-1]

    @property
    def tau_hat_0(self):
        return self.subsystem_outflows[..., 0]


def _safe_divide(a, b, defined):
    out = np.zeros(np.broadcast(a, b).shape)
    np.divide(a, b, out=out, where=np.broadcast_to(defined, out.shape))
    return out


def distribution_matrices(X, Q, w, z, eps_flow):
    """Diact distribution matrices from substorages, intensities and inputs"""
    X = np.asarray(X, dtype=float)
    rho = outward_intensity(Q, w)
    X_input = X[..., 1:]
    T_tilde = Q @ X_input
    T_hat = rho[..., :, np.newaxis] * X_input
    tau_hat_s = np.diagonal(T_hat, axis1=-2, axis2=-1).copy()
    tau_tilde_s = np.diagonal(T_tilde, axis1=-2, axis2=-1).copy()
    masked = tau_hat_s <= eps_flow
    active = ~masked
    columns = active[..., np.newaxis, :]

    rho_columns = rho[..., np.newaxis, :]
    N_d = _safe_divide(Q, rho_columns, columns & (rho_columns > 0))
    N_t = _safe_divide(T_tilde, tau_hat_s[..., np.newaxis, :], columns)
    # Row factor of the cycling matrix, zero on masked rows:
    cycling_rows = _safe_divide(tau_tilde_s, tau_hat_s, active)
    returning = _normalized_columns(T_hat, tau_hat_s, columns)
    N_c = cycling_rows[..., :, np.newaxis] * returning
    N = {
        'd': N_d,
        'i': N_t - N_d,
        'a': N_t - N_c,
        'c': N_c,
        't': N_t,
    }
    count = int(np.count_nonzero(masked))
    if count:
        logger.debug("masked %d distribution matrix column(s)", count)
    return DiactMatrices(
        N=N,
        T_tilde=T_tilde,
        T_hat=T_hat,
        tau_hat_s=tau_hat_s,
        tau_tilde_s=tau_tilde_s,
        subsystem_outflows=rho[..., :, np.newaxis] * X,
        masked=masked,
    )


def _normalized_columns(T_hat, tau_hat_s, columns):
    """T_hat with each column k divided by tau_hat_s[k], masked columns zero"""
    return _safe_divide(T_hat, tau_hat_s[..., np.newaxis, :], columns)


def diact_matrices(system):
    """Distribution matrices at every sample of a trajectory or snapshot sequence.
    `system` provides X, Q, w, z and eps_flow."""
    return distribution_matrices(system.X, system.Q, system.w, system.z, system.eps_flow)


def _scale_columns(N, v):
    return N * v[..., np.newaxis, :]


def diact_subflows(dm, subsystem, variant):
    """Subflows tau*_{i_l k_l} = N*_ik rho_k X_kl of subsystem `subsystem` (0..n)"""
    if isinstance(subsystem, str):
        raise ValueError(f"subsystem must be an index 0..{dm.n}, not {subsystem!r}")
    subsystem = check_kind(subsystem, dm.n)
    N = dm.N[check_variant(variant)]
    return _scale_columns(N, dm.subsystem_outflows[..., subsystem])


def diact_flows(dm, variant, kind=COMPOSITE):
    """Composite flows (all input subsystems), simple flows (each input at its point
    of entry) or the subflows of one subsystem"""
    kind = check_kind(kind, dm.n)
    N = dm.N[check_variant(variant)]
    if kind == COMPOSITE:
        return _scale_columns(N, dm.subsystem_outflows[..., 1:].sum(axis=-1))
    if kind == SIMPLE:
        return _scale_columns(N, dm.tau_hat_s)
    return _scale_columns(N, dm.subsystem_outflows[..., kind])
