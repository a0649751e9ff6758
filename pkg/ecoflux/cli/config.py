#####################################################################
#                                                                   #
# /cli/config.py                                                    #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Run configuration for the command line front end.

Settings are layered: built-in defaults, then the model file's [simulate] section,
then command line flags. The worker thread cap comes from ECOFLUX_THREADS unless
--threads is given.
"""
import math
import os
from dataclasses import asdict, dataclass

from labscript_utils import dedent

from ..diact import check_variant
from ..indicators import BASES, FLOW
from ..indicators.stencils import MIN_SAMPLES
from ..interactions import INDUCTIONS
from ..model import SimulationDefaults

THREADS_ENV = 'ECOFLUX_THREADS'
DEFAULT_OUTPUT = 'ecoflux-output'

COMMANDS = (
    'validate',
    'simulate',
    'partition',
    'transient',
    'diact',
    'indices',
    'interactions',
    'report',
)
DISCRETE_COMMANDS = ('diact', 'indices', 'interactions')


def _threads_from_environment(environ):
    value = environ.get(THREADS_ENV)
    if value is None or not value.strip():
        return None
    try:
        return int(value)
    except ValueError:
        msg = f"""{THREADS_ENV} must be a positive integer, got {value!r}"""
        raise ValueError(dedent(msg)) from None


def parse_pair(text):
    """'i,k' with 1-based indices to a 0-based tuple"""
    try:
        i, k = (int(part) for part in text.split(','))
    except ValueError:
        msg = f"""compartment pair {text!r} must be two 1-based indices separated by a
            comma, e.g. 2,1"""
        raise ValueError(dedent(msg)) from None
    if i < 1 or k < 1:
        raise ValueError(f"compartment pair {text!r} must use 1-based indices")
    return (i - 1, k - 1)


def parse_window(text):
    """'t1,t2' to a (start, end) tuple of floats"""
    try:
        start, end = (float(part) for part in text.split(','))
    except ValueError:
        msg = f"""averaging window {text!r} must be two times separated by a comma,
            e.g. 12.5,17.5"""
        raise ValueError(dedent(msg)) from None
    if not end > start:
        raise ValueError(f"averaging window {text!r} must end after it starts")
    return (start, end)


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation of the command line tool needs. Compartment pairs
    are 0-based."""

    command: str
    model: str
    output: str = DEFAULT_OUTPUT
    t0: float = 0.0
    t1: float = 10.0
    samples: int = 1001
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = math.inf
    clip: bool = False
    discrete: str = None
    threads: int = 1
    quiet: bool = False
    paths: tuple = ()
    start: float = None
    variants: tuple = ('d', 'i', 'a', 'c', 't')
    storages: bool = False
    subsystems: tuple = ()
    pairs: tuple = ()
    basis: str = FLOW
    windows: tuple = ()
    reference: float = None
    induction: str = 'all-inputs'
    commensalism: float = 0.75
    competition: float = 0.25
    hdf5: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.samples < MIN_SAMPLES:
            msg = f"""at least {MIN_SAMPLES} samples are required, got
                {self.samples}"""
            raise ValueError(dedent(msg))
        if not self.t1 > self.t0:
            raise ValueError(f"t1={self.t1!r} must be greater than t0={self.t0!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be at least 1, got {self.threads}")
        if self.command == 'transient' and not self.paths:
            raise ValueError("the transient command needs at least one --path")
        if self.discrete is not None and self.command not in DISCRETE_COMMANDS:
            msg = f"""--discrete is supported by {', '.join(DISCRETE_COMMANDS)}, not
                by {self.command}"""
            raise ValueError(dedent(msg))
        for variant in self.variants:
            check_variant(variant)
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.induction not in INDUCTIONS:
            raise ValueError(f"unknown induction {self.induction!r}")
        if self.start is not None and not self.t0 <= self.start <= self.t1:
            msg = f"""start time {self.start!r} is outside the run [{self.t0!r},
                {self.t1!r}]"""
            raise ValueError(dedent(msg))

    @classmethod
    def from_args(cls, args, defaults=SimulationDefaults(), environ=None):
        """Build a RunConfig from parsed arguments. Flags left unset fall back to
        `defaults`, normally the model's [simulate] section."""
        if environ is None:
            environ = os.environ

        def pick(name, fallback):
            value = getattr(args, name, None)
            return fallback if value is None else value

        threads = getattr(args, 'threads', None)
        if threads is None:
            threads = _threads_from_environment(environ)
        if threads is None:
            threads = os.cpu_count() or 1
        kwargs = dict(
            command=args.command,
            model=str(args.model),
            output=pick('output', DEFAULT_OUTPUT),
            t0=float(pick('t0', defaults.t0)),
            t1=float(pick('t1', defaults.t1)),
            samples=int(pick('samples', defaults.samples)),
            rtol=float(pick('rtol', defaults.rtol)),
            atol=float(pick('atol', defaults.atol)),
            max_step=float(pick('max_step', defaults.max_step)),
            clip=bool(getattr(args, 'clip', False) or defaults.clip),
            discrete=pick('discrete', None),
            threads=int(threads),
            quiet=bool(getattr(args, 'quiet', False)),
            paths=tuple(pick('path', ())),
            start=pick('start', None),
            storages=bool(getattr(args, 'storages', False)),
            subsystems=tuple(pick('subsystem', ())),
            pairs=tuple(parse_pair(p) for p in pick('pair', ())),
            basis=pick('basis', FLOW),
            windows=tuple(parse_window(w) for w in pick('window', ())),
            reference=pick('reference', None),
            induction=pick('induction', 'all-inputs'),
            commensalism=float(pick('commensalism', 0.75)),
            competition=float(pick('competition', 0.25)),
            hdf5=bool(getattr(args, 'hdf5', False)),
        )
        variants = getattr(args, 'variant', None)
        if variants:
            kwargs['variants'] = tuple(dict.fromkeys(variants))
        return cls(**kwargs)

    def canonical(self):
        """The settings as plain JSON-compatible values, for the run manifest"""
        settings = asdict(self)
        if math.isinf(self.max_step):
            settings['max_step'] = repr(self.max_step)
        for key in ('paths', 'variants', 'subsystems'):
            settings[key] = list(settings[key])
        settings['pairs'] = [[i + 1, k + 1] for i, k in self.pairs]
        settings['windows'] = [list(w) for w in self.windows]
        # Output location and thread count do not change results:
        del settings['output'], settings['threads'], settings['quiet']
        return settings
