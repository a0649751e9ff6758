#####################################################################
#                                                                   #
# /errors.py                                                        #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from labscript_utils import dedent


class EcofluxError(Exception):
    """Base class for all errors raised by ecoflux"""


class ModelSyntaxError(EcofluxError):
    """A model file or expression could not be parsed. Carries the 1-based line and
    column of the offending text, where known."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class ModelValidationError(EcofluxError):
    """A parsed model failed validation. The diagnostics are kept on the exception."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = '\n'.join('  ' + str(d) for d in self.diagnostics)
        msg = f"""Model failed validation with {len(self.diagnostics)}
            diagnostic(s):"""
        super().__init__(dedent(msg) + '\n' + lines)


class EvaluationError(EcofluxError):
    """An expression evaluated to an undefined or non-finite value"""

    def __init__(self, message, entry=None, t=None):
        self.entry = entry
        self.t = t
        if entry is not None:
            message = f"{entry} at t={t!r}: {message}"
        super().__init__(message)


class SolverError(EcofluxError):
    """The integrator could not continue. `t` is the last time successfully reached."""

    def __init__(self, message, t):
        self.t = t
        super().__init__(f"{message} (last good time t={t!r})")


class PathError(EcofluxError):
    """A transient flow path is malformed or not connected by declared flows"""
