#####################################################################
#                                                                   #
# /cli/__init__.py                                                  #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
from .config import RunConfig, parse_pair, parse_window
from .export import Table, read_csv, write_csv, write_hdf5, write_manifest
from .discrete import SteadySnapshots, running_sum
