#####################################################################
#                                                                   #
# /indicators/effects.py                                            #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Diact effect indices: diact flows normalized by total system throughflow, and diact
storages normalized by total system storage.

An effect matrix E has entry (i, k) equal to the diact flow (or storage) from k to i
over the system total. Its row sums are the receiver vector, its column sums the donor
vector and the sum of all entries the system-wide index.
"""
import logging
from dataclasses import dataclass

import numpy as np
from labscript_utils import dedent

from ..diact import COMPOSITE, check_kind, check_variant, kind_label
from .stencils import rate_of_change

logger = logging.getLogger(__name__)

FLOW = 'flow'
STORAGE = 'storage'
BASES = (FLOW, STORAGE)


def check_basis(basis):
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}, expected 'flow' or 'storage'")
    return basis


def system_totals(system):
    """Total system inward throughflow, outward throughflow and storage per sample"""
    inward = system.tau_in.sum(axis=-1)
    outward = system.tau_out.sum(axis=-1)
    return inward, outward, system.x.sum(axis=-1)


def normalize(values, normalizer):
    """values / normalizer broadcast over trailing axes, NaN where the normalizer is
    not positive"""
    values = np.asarray(values, dtype=float)
    normalizer = np.asarray(normalizer, dtype=float)
    shape = normalizer.shape + (1,) * (values.ndim - normalizer.ndim)
    normalizer = normalizer.reshape(shape)
    out = np.full(np.broadcast(values, normalizer).shape, np.nan)
    defined = np.broadcast_to(normalizer > 0, out.shape)
    np.divide(values, normalizer, out=out, where=defined)
    return out


def _subset(I, n):
    if I is None:
        return np.arange(n)
    I = np.array(sorted(set(int(i) for i in I)), dtype=int)
    if len(I) == 0 or I[0] < 0 or I[-1] >= n:
        raise ValueError(f"compartment subset must be non-empty and within 1..{n}")
    return I


@dataclass
class EffectReport:
    """Effect indices of one variant, kind and basis over a sample grid.

    `matrix` has shape (samples, n, n). `receivers` and `donors` are its row and column
    sums, `total` the sum of all entries and `subset` the sum over rows I and columns
    K. `normalizer` is the system total used. Undefined samples are NaN.
    """

    variant: str
    kind: object
    basis: str
    grid: np.ndarray
    matrix: np.ndarray
    normalizer: np.ndarray
    subset: np.ndarray
    I: np.ndarray
    K: np.ndarray
    efficiency: np.ndarray = None

    @property
    def receivers(self):
        return self.matrix.sum(axis=-1)

    @property
    def donors(self):
        return self.matrix.sum(axis=-2)

    @property
    def total(self):
        return self.matrix.sum(axis=(-2, -1))

    @property
    def label(self):
        return f'{self.variant}_{kind_label(self.kind)}_{self.basis}'

    @property
    def is_stress(self):
        """The cycling flow efficiency is the system stress"""
        return self.variant == 'c' and self.basis == FLOW


def effect_indices(field, system, variant, kind=COMPOSITE, basis=FLOW, I=None, K=None):
    """Effect indices of `variant` flows (or storages) of the given kind.

    Args:
        field (DiactField): Diact flows and, for the storage basis, tracked storages.
        system: The trajectory or snapshot sequence the field was computed from.
        variant (str): One of 'd', 'i', 'a', 'c', 't'.
        kind: 'composite', 'simple' or a subsystem index (0 for initial stocks).
        basis (str): 'flow' normalizes by total system inward throughflow, 'storage'
            by total system storage.
        I, K (sequence of int, optional): 0-based receiver and donor subsets for the
            subset index. Default all compartments.
    """
    variant = check_variant(variant)
    kind = check_kind(kind, field.n)
    basis = check_basis(basis)
    inward, _, storage = system_totals(system)
    if basis == FLOW:
        values, normalizer = field.flow(variant, kind), inward
    else:
        values, normalizer = field.storage(variant, kind), storage
    matrix = normalize(values, normalizer)
    I = _subset(I, field.n)
    K = _subset(K, field.n)
    subset = matrix[:, I][:, :, K].sum(axis=(-2, -1))
    undefined = int(np.count_nonzero(~(normalizer > 0)))
    if undefined:
        logger.debug("%d sample(s) with zero %s normalizer", undefined, basis)
    return EffectReport(
        variant=variant,
        kind=kind,
        basis=basis,
        grid=system.grid,
        matrix=matrix,
        normalizer=normalizer,
        subset=subset,
        I=I,
        K=K,
    )


def with_efficiency(report, system):
    """Attach the efficiency (time derivative) of the effect matrix"""
    report.efficiency = rate_of_change(system, report.matrix)
    return report


@dataclass
class AverageIndices:
    """Non-local effect indices over [t_start, t_end]: the integral of the diact
    flows (or storages) over the integral of the system total"""

    variant: str
    kind: object
    basis: str
    t_start: float
    t_end: float
    matrix: np.ndarray
    subset: float

    @property
    def total(self):
        return float(self.matrix.sum())

    @property
    def utility(self):
        """Average utility matrix, exactly skew-symmetric"""
        return self.matrix - self.matrix.T

    @property
    def utility_total(self):
        return float(self.utility.sum())


def average_indices(
    field,
    system,
    variant,
    t_start,
    t_end,
    kind=COMPOSITE,
    basis=FLOW,
    I=None,
    K=None,
):
    """Average effect indices between two sample times.

    Needs the running integrals of the system totals ('system_totals' block) and, for
    the flow basis, of the diact flows ('diact_flow_integrals' block); for the storage
    basis the diact storages must have been tracked.
    """
    variant = check_variant(variant)
    kind = check_kind(kind, field.n)
    basis = check_basis(basis)
    if not t_end > t_start:
        msg = f"averaging window end {t_end!r} must follow its start {t_start!r}"
        raise ValueError(msg)
    totals = system.window('system_totals', t_start, t_end)
    if basis == FLOW:
        block = system.blocks.get('diact_flow_integrals')
        if block is None or (variant, kind) not in block.keys:
            msg = f"""integrals of {kind_label(kind)} {variant} diact flows were not
                computed; solve with a DiactFlowIntegralBlock that includes them"""
            raise KeyError(dedent(msg))
        integrals = block.unpack(system.aux['diact_flow_integrals'])[(variant, kind)]
        denominator = totals[0]
    else:
        integrals = field.storage_integral(variant, kind)
        denominator = totals[2]
    start, end = system.sample_index(t_start), system.sample_index(t_end)
    numerator = integrals[end] - integrals[start]
    if denominator > 0:
        matrix = numerator / denominator
    else:
        matrix = np.full_like(numerator, np.nan)
    I = _subset(I, field.n)
    K = _subset(K, field.n)
    return AverageIndices(
        variant=variant,
        kind=kind,
        basis=basis,
        t_start=t_start,
        t_end=t_end,
        matrix=matrix,
        subset=float(matrix[np.ix_(I, K)].sum()),
    )
