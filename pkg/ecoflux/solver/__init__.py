#####################################################################
#                                                                   #
# /solver/__init__.py                                               #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from .dormand_prince import IntegrationSpec, Trajectory, TrajectoryStats, integrate
