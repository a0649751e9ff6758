#####################################################################
#                                                                   #
# /diact/field.py                                                   #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
import logging
from dataclasses import dataclass, field

import numpy as np
from labscript_utils import dedent

from .matrices import (
    COMPOSITE,
    SIMPLE,
    VARIANTS,
    check_kind,
    check_variant,
    diact_flows,
    diact_matrices,
    kind_label,
)

logger = logging.getLogger(__name__)


@dataclass
class DiactField:
    """Diact flows and storages over a sample grid.

    `flows` and `storages` map (variant, kind) to arrays of shape (samples, n, n),
    where kind is 'composite', 'simple' or a subsystem index. Storages are present only
    for the variants and kinds that were tracked; untracked pairs are NaN.
    `storage_integrals` holds the running integrals of the tracked storages.
    """

    grid: np.ndarray
    matrices: object
    flows: dict = field(default_factory=dict)
    storages: dict = field(default_factory=dict)
    storage_integrals: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.matrices.n

    def flow(self, variant, kind=COMPOSITE):
        key = (check_variant(variant), check_kind(kind, self.n))
        if key not in self.flows:
            self.flows[key] = diact_flows(self.matrices, *key)
        return self.flows[key]

    def storage(self, variant, kind=COMPOSITE):
        key = (check_variant(variant), check_kind(kind, self.n))
        try:
            return self.storages[key]
        except KeyError:
            msg = f"""{kind_label(key[1])} {variant} diact storages were not tracked;
                solve with a DiactStorageBlock that includes them"""
            raise KeyError(dedent(msg)) from None

    def storage_integral(self, variant, kind=COMPOSITE):
        key = (check_variant(variant), check_kind(kind, self.n))
        try:
            return self.storage_integrals[key]
        except KeyError:
            msg = f"""{kind_label(key[1])} {variant} diact storages were not tracked"""
            raise KeyError(dedent(msg)) from None

    def has_storage(self, variant, kind=COMPOSITE):
        return (variant, kind) in self.storages


def diact_field(system, variants=VARIANTS, kinds=(COMPOSITE, SIMPLE)):
    """Diact flows of the requested variants and kinds at every sample of `system`,
    together with any diact storages integrated alongside it"""
    dm = diact_matrices(system)
    result = DiactField(grid=system.grid, matrices=dm)
    for variant in variants:
        for kind in kinds:
            result.flow(variant, kind)
    block = getattr(system, 'blocks', {}).get('diact_storages')
    if block is not None:
        storages, integrals = block.unpack(system.aux['diact_storages'])
        result.storages.update(storages)
        result.storage_integrals.update(integrals)
    steady = getattr(system, 'steady_storages', None)
    if steady is not None:
        storages, integrals = steady(result)
        result.storages.update(storages)
        result.storage_integrals.update(integrals)
    logger.debug(
        "diact field: %d flow and %d storage series",
        len(result.flows),
        len(result.storages),
    )
    return result
