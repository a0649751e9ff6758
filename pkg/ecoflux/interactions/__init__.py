#####################################################################
#                                                                   #
# /interactions/__init__.py                                         #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from .classifier import (
    EPS_CLASS,
    SCALES,
    PAIRWISE,
    TRANSFER,
    THROUGHFLOW,
    GLOBAL,
    INDUCTIONS,
    NEUTRALISM,
    MUTUALISM,
    COMMENSALISM,
    COMPETITION,
    MIXED,
    EXPLOITATION,
    NET_EXPLOITATION,
    AMBIGUOUS,
    Thresholds,
    SignStrength,
    InteractionVerdict,
    GlobalStrengths,
    resolve_induction,
    diact_sign_strength,
    classify_pair,
    global_scale_strengths,
)
