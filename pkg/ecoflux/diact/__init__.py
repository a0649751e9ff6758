#####################################################################
#                                                                   #
# /diact/__init__.py                                                #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from .matrices import (
    VARIANTS,
    VARIANT_NAMES,
    COMPOSITE,
    SIMPLE,
    DiactMatrices,
    distribution_matrices,
    diact_matrices,
    diact_subflows,
    diact_flows,
    check_variant,
    check_kind,
    kind_label,
)
from .storages import DiactFlowIntegralBlock, DiactStorageBlock, diact_storages
from .field import DiactField, diact_field
