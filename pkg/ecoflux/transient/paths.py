#####################################################################
#                                                                   #
# /transient/paths.py                                               #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Transient flows and storages along a single subflow path.

A path "k: i -> j -> l" follows the part of subsystem k's flow that leaves
subcompartment i_k for j_k and then moves on to l_k. Each node after the first holds a
transient storage x^w that receives its upstream inflow and drains at the node's
outward throughflow intensity:

    dx^w/dt = inflow - rho_node x^w,     x^w(start) = 0

The inflow of the first traced node is the actual subflow q_ji X_ik; every later
node receives q_(next, prev) x^w_prev from the node before it. The chain is linear in
the initiating subflow and is integrated with the decomposed system in one pass.
"""
import logging
import re
from dataclasses import dataclass

import numpy as np
from labscript_utils import dedent

from ..errors import PathError
from ..partition import AuxiliaryBlock, sample_index, solve_decomposed

logger = logging.getLogger(__name__)

_PATH = re.compile(r'^\s*(?P<subsystem>[^:]+?)\s*:\s*(?P<nodes>.+?)\s*$')


@dataclass(frozen=True)
class FlowPath:
    """A subflow path in subsystem `subsystem` (0 for the initial subsystem) through
    compartments `nodes` (0-based), tracked from time `start` (None: the start of the
    run)"""

    subsystem: int
    nodes: tuple
    start: float = None

    def __str__(self):
        nodes = ' -> '.join(str(i + 1) for i in self.nodes)
        return f'{self.subsystem}: {nodes}'

    @property
    def label(self):
        nodes = '-'.join(str(i + 1) for i in self.nodes)
        return f'path_{self.subsystem}_{nodes}'


def _compartment(token, names):
    token = token.strip()
    if token.isdigit():
        index = int(token) - 1
        if not 0 <= index < len(names):
            raise PathError(f"compartment {token} out of range 1..{len(names)}")
        return index
    if token in names:
        return names.index(token)
    raise PathError(f"unknown compartment {token!r}")


def parse_path(text, model, start=None):
    """Parse "k: i -> j -> l" into a validated :class:`FlowPath`. Compartments may be
    given by 1-based index or name; k may also be 0 for the initial subsystem."""
    match = _PATH.match(text)
    if match is None:
        raise PathError(f"path {text!r} must have the form 'k: i -> j -> ...'")
    subsystem = match.group('subsystem')
    if subsystem.strip() == '0':
        k = 0
    else:
        k = _compartment(subsystem, model.names) + 1
    tokens = match.group('nodes').split('->')
    nodes = tuple(_compartment(token, model.names) for token in tokens)
    path = FlowPath(k, nodes, start)
    validate_path(model, path)
    return path


def validate_path(model, path):
    if not 0 <= path.subsystem <= model.n:
        raise PathError(f"subsystem {path.subsystem} out of range 0..{model.n}")
    if len(path.nodes) < 2:
        raise PathError(f"path {path} needs at least two compartments")
    for donor, receiver in zip(path.nodes[:-1], path.nodes[1:]):
        if not model.connected(receiver, donor):
            msg = f"""path {path} is not connected: no flow is declared from
                compartment {donor + 1} into compartment {receiver + 1}"""
            raise PathError(dedent(msg))


class TransientPathBlock(AuxiliaryBlock):
    """Transient storages of the traced nodes of one path, followed by their running
    integrals (transient exposures)"""

    def __init__(self, path, name=None):
        self.path = path
        self.name = name or path.label
        self.nodes = np.array(path.nodes[1:], dtype=int)
        self.donors = np.array(path.nodes[:-1], dtype=int)
        self.length = len(self.nodes)
        self.size = 2 * self.length
        self.start = path.start

    def inflow(self, Q, X, storage):
        """Inflow of each traced node; broadcasts over leading sample axes"""
        donor = self.donors[0]
        first = Q[..., self.nodes[0], donor] * X[..., donor, self.path.subsystem]
        later = Q[..., self.nodes[1:], self.donors[1:]] * storage[..., :-1]
        return np.concatenate([first[..., np.newaxis], later], axis=-1)

    def derivative(self, ctx, y):
        storage = y[: self.length]
        inflow = self.inflow(ctx.Q, ctx.X, storage)
        return np.concatenate([inflow - ctx.rho[self.nodes] * storage, storage])

    @property
    def labels(self):
        nodes = [f'{i + 1}' for i in self.nodes]
        return [f'x_w_{i}' for i in nodes] + [f'e_w_{i}' for i in nodes]


@dataclass
class TransientTrace:
    """Per traced node (path nodes after the first) and sample: inflow, transient
    storage x^w, outflow to the next node on the path (NaN at the last node), total
    outward throughflow, residence time and running exposure."""

    path: FlowPath
    grid: np.ndarray
    inflow: np.ndarray
    storage: np.ndarray
    outflow: np.ndarray
    throughflow: np.ndarray
    residence: np.ndarray
    exposure: np.ndarray

    def sample_index(self, t):
        return sample_index(self.grid, t)


def trace_from_trajectory(trajectory, block):
    values = trajectory.aux[block.name]
    storage = values[:, : block.length]
    exposure = values[:, block.length :]
    Q = trajectory.Q
    rho = trajectory.rho[:, block.nodes]
    inflow = block.inflow(Q, trajectory.X, storage)
    outflow = np.full_like(storage, np.nan)
    outflow[:, :-1] = Q[:, block.nodes[1:], block.nodes[:-1]] * storage[:, :-1]
    throughflow = rho * storage
    residence = np.full_like(storage, np.nan)
    defined = throughflow > trajectory.eps_flow
    np.divide(1.0, rho, out=residence, where=defined)
    return TransientTrace(
        path=block.path,
        grid=trajectory.grid,
        inflow=inflow,
        storage=storage,
        outflow=outflow,
        throughflow=throughflow,
        residence=residence,
        exposure=exposure,
    )


def transient_chains(model, paths, spec, blocks=()):
    """Trace several paths in one integration. Returns (trajectory, traces)."""
    path_blocks = []
    for index, path in enumerate(paths):
        validate_path(model, path)
        path_blocks.append(TransientPathBlock(path, name=f'transient_{index}'))
    trajectory = solve_decomposed(model, spec, [*path_blocks, *blocks])
    traces = [trace_from_trajectory(trajectory, block) for block in path_blocks]
    logger.info("traced %d transient path(s)", len(traces))
    return trajectory, traces


def transient_chain(model, path, spec):
    """Transient subflows and substorages along one path"""
    _, traces = transient_chains(model, [path], spec)
    return traces[0]
