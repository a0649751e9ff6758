#####################################################################
#                                                                   #
# /diact/storages.py                                                #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Diact storages and running integrals of diact flows, as auxiliary states.

A diact storage x*_ik accumulates the diact flow tau*_ik into compartment i from its
start time and drains at i's outward throughflow intensity:

    dx*_ik/dt = tau*_ik - rho_i x*_ik,    x*_ik(start) = 0

Storages and their time integrals (diact exposures) are integrated with the main
system so they inherit its accuracy.
"""
import logging

import numpy as np
from labscript_utils import dedent

from ..partition import AuxiliaryBlock, solve_decomposed
from .matrices import (
    COMPOSITE,
    VARIANTS,
    check_kind,
    check_variant,
    diact_flows,
    distribution_matrices,
    kind_label,
)

logger = logging.getLogger(__name__)


def _keys(variants, kinds, n):
    keys = []
    for variant in variants:
        for kind in kinds:
            keys.append((check_variant(variant), check_kind(kind, n)))
    if len(set(keys)) != len(keys):
        raise ValueError("repeated variant or flow kind")
    return keys


def _flows_at(ctx, keys):
    dm = distribution_matrices(ctx.X, ctx.Q, ctx.w, ctx.z, ctx.eps_flow)
    return {key: diact_flows(dm, *key) for key in keys}


class DiactFlowIntegralBlock(AuxiliaryBlock):
    """Running integrals of whole diact flow matrices"""

    name = 'diact_flow_integrals'

    def __init__(self, n, variants=VARIANTS, kinds=(COMPOSITE,), start=None):
        self.n = n
        self.keys = _keys(variants, kinds, n)
        self.size = len(self.keys) * n * n
        self.start = start

    def derivative(self, ctx, y):
        if not self.keys:
            return np.zeros(0)
        flows = _flows_at(ctx, self.keys)
        return np.concatenate([flows[key].ravel() for key in self.keys])

    @property
    def labels(self):
        n = self.n
        return [
            f'{variant}_{kind_label(kind)}_{i + 1}_{k + 1}'
            for variant, kind in self.keys
            for i in range(n)
            for k in range(n)
        ]

    def unpack(self, values):
        """{(variant, kind): array (samples, n, n)}"""
        samples = values.shape[0]
        parts = values.reshape(samples, len(self.keys), self.n, self.n)
        return {key: parts[:, index] for index, key in enumerate(self.keys)}


class DiactStorageBlock(AuxiliaryBlock):
    """Diact storages of selected (receiver, donor) pairs, with their integrals.

    `pairs` holds 0-based (i, k) index pairs; None tracks all n^2 pairs of every
    requested variant and kind.
    """

    name = 'diact_storages'

    def __init__(self, n, variants=VARIANTS, kinds=(COMPOSITE,), pairs=None, start=None):
        self.n = n
        self.keys = _keys(variants, kinds, n)
        if pairs is None:
            pairs = [(i, k) for i in range(n) for k in range(n)]
        pairs = [(int(i), int(k)) for i, k in pairs]
        for i, k in pairs:
            if not (0 <= i < n and 0 <= k < n):
                msg = f"""pair ({i + 1},{k + 1}) indexes a compartment out of range
                    1..{n}"""
                raise ValueError(dedent(msg))
        if len(set(pairs)) != len(pairs):
            raise ValueError("repeated compartment pair")
        self.pairs = pairs
        self.rows = np.array([i for i, _ in pairs], dtype=int)
        self.columns = np.array([k for _, k in pairs], dtype=int)
        self.half = len(self.keys) * len(pairs)
        self.size = 2 * self.half
        self.start = start

    def derivative(self, ctx, y):
        flows = _flows_at(ctx, self.keys)
        inflow = np.stack([flows[key][self.rows, self.columns] for key in self.keys])
        storage = y[: self.half].reshape(inflow.shape)
        dstorage = inflow - ctx.rho[self.rows] * storage
        return np.concatenate([dstorage.ravel(), storage.ravel()])

    @property
    def labels(self):
        labels = []
        for quantity in ('storage', 'exposure'):
            for variant, kind in self.keys:
                for i, k in self.pairs:
                    label = f'{quantity}_{variant}_{kind_label(kind)}_{i + 1}_{k + 1}'
                    labels.append(label)
        return labels

    def unpack(self, values):
        """Returns ({(variant, kind): storages}, {(variant, kind): integrals}), each an
        array (samples, n, n) that is NaN at untracked pairs"""
        samples = values.shape[0]
        storages = {}
        integrals = {}
        blocks = values.reshape(samples, 2, len(self.keys), len(self.pairs))
        for index, key in enumerate(self.keys):
            for target, part in ((storages, 0), (integrals, 1)):
                full = np.full((samples, self.n, self.n), np.nan)
                full[:, self.rows, self.columns] = blocks[:, part, index]
                target[key] = full
        return storages, integrals


def diact_storages(
    model,
    spec,
    variants=VARIANTS,
    kinds=(COMPOSITE,),
    pairs=None,
    start=None,
    blocks=(),
):
    """Solve the decomposed system together with diact storages of the requested
    variants, kinds and pairs, accumulating from `start` (default t0).

    Returns the DecomposedTrajectory; the storages are in its auxiliary block
    'diact_storages' and are picked up by :func:`diact_field`.
    """
    block = DiactStorageBlock(model.n, variants, kinds, pairs, start)
    logger.info(
        "tracking %d diact storage state(s) from t=%r",
        block.half,
        spec.t0 if start is None else start,
    )
    return solve_decomposed(model, spec, [block, *blocks])
