#####################################################################
#                                                                   #
# /model/__init__.py                                                #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from .expressions import (
    Expr,
    Number,
    Symbol,
    Negate,
    BinaryOp,
    Call,
    FUNCTIONS,
    MAX_NESTING,
    MAX_HEIGHT,
    register_function,
    tokenize,
    parse_expr,
)
from .compartments import (
    ERROR,
    WARNING,
    Diagnostic,
    SimulationDefaults,
    CompartmentalModel,
    StateEval,
    eval_state,
    net_balance,
    validate_model,
)
from .model_file import (
    FIXTURES_DIR,
    parse_model,
    serialize_model,
    load_model,
    fixture_path,
    load_fixture,
)
