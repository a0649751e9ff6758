#####################################################################
#                                                                   #
# /model/compartments.py                                            #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from labscript_utils import dedent

from ..errors import EvaluationError

logger = logging.getLogger(__name__)

ERROR = 'error'
WARNING = 'warning'


@dataclass(frozen=True)
class Diagnostic:
    """A problem found by :func:`validate_model`"""

    severity: str
    location: str
    message: str

    def __str__(self):
        return f"{self.severity}: {self.location}: {self.message}"


@dataclass(frozen=True)
class SimulationDefaults:
    """Integration defaults, overridable from a model file's [simulate] section and
    from the command line"""

    t0: float = 0.0
    t1: float = 10.0
    samples: int = 1001
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = math.inf
    clip: bool = False


@dataclass(frozen=True)
class CompartmentalModel:
    """A nonlinear compartmental model in intensity form.

    Compartments are indexed from 0 internally and from 1 in model files and output.
    `intensity` maps (i, j) to the expression q_ij for the flow f_ij = q_ij * x_j from
    compartment j into compartment i. Pairs absent from the mapping have no flow.
    `output_intensity[i]` is w_i with y_i = w_i * x_i, and `inputs[i]` is z_i. All
    expressions may reference t, x1..xn and the names in `params`.
    """

    names: tuple
    intensity: dict
    output_intensity: tuple
    inputs: tuple
    x0: tuple
    params: dict = field(default_factory=dict)
    self_flows: bool = False
    simulate: SimulationDefaults = field(default_factory=SimulationDefaults)
    # Where each entry was declared, e.g. {'flows 2<-1': 14}. Used in diagnostics only.
    locations: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n(self):
        return len(self.names)

    def state_symbols(self):
        return [f'x{i + 1}' for i in range(self.n)]

    def location(self, key):
        line = self.locations.get(key)
        section, _, entry = key.partition(' ')
        text = f"[{section}] {entry}".rstrip()
        return text if line is None else f"{text} (line {line})"

    def connected(self, i, j):
        """Whether a flow from compartment j into compartment i is declared"""
        q = self.intensity.get((i, j))
        return q is not None and not q.is_zero()

    @cached_property
    def _compiled(self):
        flows = [(i, j, q.compiled) for (i, j), q in sorted(self.intensity.items())]
        outputs = [(i, w.compiled) for i, w in enumerate(self.output_intensity)]
        inputs = [(i, z.compiled) for i, z in enumerate(self.inputs)]
        return flows, outputs, inputs

    def environment(self, t, x):
        env = dict(self.params)
        env['t'] = t
        for i, symbol in enumerate(self.state_symbols()):
            env[symbol] = x[i]
        return env

    def intensities(self, t, x):
        """Evaluate the intensity matrix Q, output intensities w and inputs z at time t
        and state x. Raises EvaluationError naming the entry for undefined or
        non-finite values."""
        n = self.n
        env = self.environment(float(t), [float(v) for v in x])
        flows, outputs, inputs = self._compiled
        Q = np.zeros((n, n))
        w = np.zeros(n)
        z = np.zeros(n)
        for i, j, q in flows:
            Q[i, j] = _checked(q, env, f"q[{i + 1},{j + 1}]", t)
        for i, f in outputs:
            w[i] = _checked(f, env, f"w[{i + 1}]", t)
        for i, f in inputs:
            z[i] = _checked(f, env, f"z[{i + 1}]", t)
        return Q, w, z


def _checked(compiled, env, entry, t):
    try:
        value = compiled(env)
    except EvaluationError as e:
        raise EvaluationError(str(e), entry=entry, t=t) from None
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite value {value!r}", entry=entry, t=t)
    return value


@dataclass(frozen=True)
class StateEval:
    """Flows and throughflows of a model at one state.

    F[i, j] is the flow from j into i. `rho` holds the outward throughflow intensities
    tau_out / x, computed directly from the intensities so that it is defined for empty
    compartments.
    """

    t: float
    x: np.ndarray
    Q: np.ndarray
    w: np.ndarray
    F: np.ndarray
    z: np.ndarray
    y: np.ndarray
    tau_in: np.ndarray
    tau_out: np.ndarray

    @property
    def rho(self):
        return self.w + self.Q.sum(axis=0)


def eval_state(model, t, x):
    """Evaluate flows, inputs, outputs and throughflows of `model` at (t, x)"""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        msg = f"""state has shape {x.shape}, expected ({model.n},) for a model with
            {model.n} compartments"""
        raise ValueError(dedent(msg))
    Q, w, z = model.intensities(t, x)
    F = Q * x[np.newaxis, :]
    y = w * x
    tau_in = z + F.sum(axis=1)
    tau_out = y + F.sum(axis=0)
    return StateEval(t, x, Q, w, F, z, y, tau_in, tau_out)


def net_balance(s):
    """Rate of change of each compartment's storage, inward minus outward throughflow"""
    return s.tau_in - s.tau_out


def validate_model(model):
    """Check a model's invariants, returning a list of :class:`Diagnostic`. The list is
    empty exactly when the model is valid."""
    diagnostics = []

    def report(key, message, severity=ERROR):
        diagnostics.append(Diagnostic(severity, model.location(key), message))

    n = model.n
    if n < 1:
        report('model n', "model must have at least one compartment")
        return diagnostics
    if len(set(model.names)) != n:
        report('model names', "compartment names are not unique")
    if len(model.x0) != n:
        report('initial', f"expected {n} initial stocks, got {len(model.x0)}")
    if len(model.inputs) != n or len(model.output_intensity) != n:
        report('model n', "inputs and outputs must have one entry per compartment")
        return diagnostics

    allowed = {'t', *model.state_symbols()}
    for name in model.params:
        if name in allowed:
            report(f'params {name}', f"parameter {name!r} shadows a reserved identifier")
    allowed.update(model.params)

    entries = []
    for (i, j), q in sorted(model.intensity.items()):
        key = f'flows {i + 1}<-{j + 1}'
        if not (0 <= i < n and 0 <= j < n):
            report(key, "flow indexes a compartment out of range")
            continue
        if i == j and not model.self_flows:
            msg = "self-flow declared but the model does not enable self_flows"
            report(key, msg)
        entries.append((key, f"q[{i + 1},{j + 1}]", q))
    for i in range(n):
        entries.append((f'outputs {i + 1}', f"w[{i + 1}]", model.output_intensity[i]))
        entries.append((f'inputs {i + 1}', f"z[{i + 1}]", model.inputs[i]))

    closed = True
    for key, _, expr in entries:
        for name in sorted(expr.symbols() - allowed):
            report(key, f"unknown identifier {name!r}")
            closed = False

    for i, value in enumerate(model.x0):
        if not math.isfinite(value):
            report(f'initial {i + 1}', "initial stock is not finite")
        elif value < 0:
            report(f'initial {i + 1}', f"negative initial stock {value!r}")

    if not closed or any(d.severity == ERROR for d in diagnostics):
        return diagnostics

    # Values at the initial state:
    t0 = model.simulate.t0
    env = model.environment(t0, [max(v, 0.0) for v in model.x0])
    for key, entry, expr in entries:
        try:
            value = expr.evaluate(env)
        except EvaluationError as e:
            report(key, f"{entry} cannot be evaluated at the initial state: {e}")
            continue
        if not math.isfinite(value):
            report(key, f"{entry} is not finite at the initial state")
        elif value < 0:
            report(key, f"{entry} = {value!r} is negative at the initial state")
    if diagnostics:
        logger.debug("model has %d diagnostic(s)", len(diagnostics))
    return diagnostics
