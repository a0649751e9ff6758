#####################################################################
#                                                                   #
# /__init__.py                                                      #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Flow, storage and interaction analysis of nonlinear compartmental systems.

A model is parsed from a model file (:mod:`ecoflux.model`), its decomposed system is
solved for the substorages of every input subsystem (:mod:`ecoflux.partition`), and
the solution feeds transient path tracing (:mod:`ecoflux.transient`), diact flows and
storages (:mod:`ecoflux.diact`), system indicators (:mod:`ecoflux.indicators`) and
pairwise interaction types (:mod:`ecoflux.interactions`).
"""
from .__version__ import __version__
from .errors import (
    EcofluxError,
    ModelSyntaxError,
    ModelValidationError,
    EvaluationError,
    SolverError,
    PathError,
)
