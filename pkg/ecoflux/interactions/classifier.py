#####################################################################
#                                                                   #
# /interactions/classifier.py                                       #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Sign, strength and type of the interactions between pairs of compartments.

Interactions are read off the diact flows (or, on the storage basis, the diact
storages) between two compartments i and j and their shared donors k:

    neutralism      no net direct flow, no shared donor, no net indirect flow
    mutualism       no net direct flow, no shared donor, net indirect flow
    commensalism    no net direct flow, a shared donor feeding i and j unequally
    competition     no net direct flow, a shared donor feeding i and j about equally
    exploitation    direct flow from j to i and none back (or the reverse)

Zero tests use a tolerance relative to the system total at each sample. When no row
applies, the pair is in net exploitation: direct flows both ways with a nonzero net.
"""
import logging
from dataclasses import dataclass

import numpy as np
from labscript_utils import dedent

from ..diact import COMPOSITE, SIMPLE, VARIANTS, check_kind, check_variant
from ..indicators import FLOW, check_basis, effect_indices, normalize, system_totals

logger = logging.getLogger(__name__)

EPS_CLASS = 1e-9

PAIRWISE = 'pairwise'
TRANSFER = 'transfer'
THROUGHFLOW = 'throughflow'
GLOBAL = 'global'
SCALES = (PAIRWISE, TRANSFER, THROUGHFLOW, GLOBAL)

INDUCTIONS = {
    'all-inputs': COMPOSITE,
    'initial-stocks': 0,
    'single-input': SIMPLE,
}

NEUTRALISM = 'neutralism'
MUTUALISM = 'mutualism'
COMMENSALISM = 'commensalism'
COMPETITION = 'competition'
MIXED = 'mixed'
EXPLOITATION = 'exploitation'
NET_EXPLOITATION = 'net exploitation'
AMBIGUOUS = 'ambiguous'


@dataclass(frozen=True)
class Thresholds:
    """Cut-offs on the donor asymmetry mu^c of a shared donor. At or above
    `commensalism` the pair is commensal, at or below `competition` competing, and
    in between the verdict is 'mixed'."""

    commensalism: float = 0.75
    competition: float = 0.25

    def __post_init__(self):
        if not 0 <= self.competition < self.commensalism <= 1:
            msg = f"""thresholds must satisfy 0 <= competition < commensalism <= 1, got
                competition={self.competition!r}, commensalism={self.commensalism!r}"""
            raise ValueError(dedent(msg))


def _check_pair(pair, n):
    i, j = (int(v) for v in pair)
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"pair ({i + 1},{j + 1}) out of range 1..{n}")
    if i == j:
        raise ValueError("an interaction needs two distinct compartments")
    return i, j


def resolve_induction(induction):
    try:
        return INDUCTIONS[induction]
    except KeyError:
        choices = ', '.join(INDUCTIONS)
        msg = f"unknown induction {induction!r}, expected one of {choices}"
        raise ValueError(msg) from None


def _ratio(a, b):
    return a / b if b > 0 else 0.0


def _values(field, variant, kind, basis):
    if basis == FLOW:
        return field.flow(variant, kind)
    return field.storage(variant, kind)


def _totals(system, basis):
    inward, _, storage = system_totals(system)
    return inward if basis == FLOW else storage


def _compartment_totals(system, basis):
    return system.tau_in if basis == FLOW else system.x


@dataclass
class SignStrength:
    """Per-sample sign (+1, 0, -1) and strength of one diact interaction"""

    variant: str
    scale: str
    sign: np.ndarray
    strength: np.ndarray


def diact_sign_strength(
    field, system, pair, variant, scale=THROUGHFLOW, kind=COMPOSITE, basis=FLOW
):
    """Sign and strength of the `variant` interaction of compartment i with j.

    The sign is that of tau*_ij - tau*_ji, zero within the classification tolerance.
    The strength is |tau*_ij - tau*_ji| over the scale's normalizer: tau*_ij + tau*_ji
    (pairwise), the transfer flows between i and j (transfer), the inward throughflows
    of i and j (throughflow) or total system throughflow (global). On the storage basis
    storages replace flows and storage totals replace throughflows. A zero normalizer
    gives zero strength.
    """
    variant = check_variant(variant)
    kind = check_kind(kind, field.n)
    basis = check_basis(basis)
    i, j = _check_pair(pair, field.n)
    values = _values(field, variant, kind, basis)
    a, b = values[:, i, j], values[:, j, i]
    difference = a - b
    eps = EPS_CLASS * _totals(system, basis)
    sign = np.where(difference > eps, 1, np.where(difference < -eps, -1, 0))
    if scale == PAIRWISE:
        normalizer = a + b
    elif scale == TRANSFER:
        transfer = _values(field, 't', kind, basis)
        normalizer = transfer[:, i, j] + transfer[:, j, i]
    elif scale == THROUGHFLOW:
        totals = _compartment_totals(system, basis)
        normalizer = totals[:, i] + totals[:, j]
    elif scale == GLOBAL:
        normalizer = _totals(system, basis)
    else:
        choices = ', '.join(SCALES)
        raise ValueError(f"unknown scale {scale!r}, expected one of {choices}")
    strength = np.zeros_like(difference)
    np.divide(np.abs(difference), normalizer, out=strength, where=normalizer > 0)
    return SignStrength(variant, scale, sign, strength)


@dataclass
class InteractionVerdict:
    """Classification of the interaction between compartments i and j per sample.

    `verdict[s]` is the interaction type, `strength[s]` its strength and `fired[s]`
    the types whose conditions held (several only for an 'ambiguous' verdict). For
    exploitation `exploiter` is the receiving compartment of the one-way direct flow;
    for commensalism, competition and mixed verdicts `donor` is the dominant shared
    donor. Both are -1 where not applicable. `signs` holds the throughflow-scale sign
    and strength of every variant.
    """

    pair: tuple
    basis: str
    induction: str
    grid: np.ndarray
    verdict: np.ndarray
    strength: np.ndarray
    exploiter: np.ndarray
    donor: np.ndarray
    fired: list
    signs: dict = None

    def verdicts(self):
        """Distinct verdict labels over all samples, in order of first appearance"""
        seen = []
        for v, e in zip(self.verdict, self.exploiter):
            label = self._label(v, e)
            if label not in seen:
                seen.append(label)
        return seen

    def _label(self, verdict, exploiter):
        i, j = self.pair
        if verdict in (EXPLOITATION, NET_EXPLOITATION) and exploiter >= 0:
            victim = j if exploiter == i else i
            return f'{verdict}({exploiter + 1},{victim + 1})'
        return f'{verdict}({i + 1},{j + 1})'

    def labels(self):
        return [self._label(v, e) for v, e in zip(self.verdict, self.exploiter)]


def classify_pair(
    field, system, pair, thresholds=Thresholds(), induction='all-inputs', basis=FLOW
):
    """Classify the interaction of compartments i and j at every sample"""
    kind = resolve_induction(induction)
    basis = check_basis(basis)
    i, j = _check_pair(pair, field.n)
    n = field.n
    d = _values(field, 'd', kind, basis)
    ind = _values(field, 'i', kind, basis)
    eps = EPS_CLASS * _totals(system, basis)
    totals = _compartment_totals(system, basis)
    outward = system.tau_out if basis == FLOW else system.x

    samples = len(system.grid)
    verdict = np.empty(samples, dtype=object)
    strength = np.zeros(samples)
    exploiter = np.full(samples, -1, dtype=int)
    donor = np.full(samples, -1, dtype=int)
    fired = []
    others = [k for k in range(n) if k not in (i, j)]

    for s in range(samples):
        e = eps[s]
        d_ij, d_ji = d[s, i, j], d[s, j, i]
        net_direct = abs(d_ij - d_ji) > e
        net_indirect = abs(ind[s, i, j] - ind[s, j, i]) > e
        shared = [k for k in others if d[s, i, k] > e and d[s, j, k] > e]
        rows = []
        values = {}
        if not net_direct and not shared:
            if net_indirect:
                rows.append(MUTUALISM)
                mutual = ind[s, i, j] + ind[s, j, i]
                values[MUTUALISM] = _ratio(mutual, totals[s, i] + totals[s, j])
            else:
                rows.append(NEUTRALISM)
                values[NEUTRALISM] = 0.0
        if not net_direct and shared:
            k = max(shared, key=lambda k: d[s, i, k] + d[s, j, k])
            donor[s] = k
            mu_c = abs(d[s, i, k] - d[s, j, k]) / (d[s, i, k] + d[s, j, k])
            if mu_c >= thresholds.commensalism:
                label = COMMENSALISM
            elif mu_c <= thresholds.competition:
                label = COMPETITION
            else:
                label = MIXED
            rows.append(label)
            values[label] = mu_c
        for a, b in ((i, j), (j, i)):
            if d[s, a, b] > e and d[s, b, a] <= e:
                rows.append(EXPLOITATION)
                exploiter[s] = a
                values[EXPLOITATION] = _ratio(d[s, a, b], outward[s, b])
        if not rows and net_direct:
            a, b = (i, j) if d_ij > d_ji else (j, i)
            exploiter[s] = a
            rows.append(NET_EXPLOITATION)
            net = abs(d_ij - d_ji)
            values[NET_EXPLOITATION] = _ratio(net, totals[s, i] + totals[s, j])
        fired.append(tuple(rows))
        if len(rows) == 1:
            verdict[s] = rows[0]
            strength[s] = values[rows[0]]
        else:
            verdict[s] = AMBIGUOUS
            strength[s] = np.nan

    ambiguous = int(np.count_nonzero(verdict == AMBIGUOUS))
    if ambiguous:
        logger.warning(
            "pair (%d,%d): %d ambiguous sample(s)", i + 1, j + 1, ambiguous
        )
    signs = {
        variant: diact_sign_strength(
            field, system, (i, j), variant, THROUGHFLOW, kind, basis
        )
        for variant in VARIANTS
    }
    return InteractionVerdict(
        pair=(i, j),
        basis=basis,
        induction=induction,
        grid=system.grid,
        verdict=verdict,
        strength=strength,
        exploiter=exploiter,
        donor=donor,
        fired=fired,
        signs=signs,
    )


@dataclass
class GlobalStrengths:
    """Global-scale strengths for pair (i, j): mutualism i_ij + i_ji over total system
    inward throughflow, and exploitation of j by i normalized by total system outward
    throughflow and by total system inward throughflow"""

    pair: tuple
    mutualism: np.ndarray
    exploitation_outward: np.ndarray
    exploitation_inward: np.ndarray


def global_scale_strengths(field, system, pair, kind=COMPOSITE):
    i, j = _check_pair(pair, field.n)
    indirect = effect_indices(field, system, 'i', kind).matrix
    direct = effect_indices(field, system, 'd', kind).matrix
    _, outward, _ = system_totals(system)
    return GlobalStrengths(
        pair=(i, j),
        mutualism=indirect[:, i, j] + indirect[:, j, i],
        exploitation_outward=normalize(field.flow('d', kind)[:, i, j], outward),
        exploitation_inward=direct[:, i, j],
    )
