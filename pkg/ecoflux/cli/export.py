#####################################################################
#                                                                   #
# /cli/export.py                                                    #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Writing result tables as CSV, an HDF5 archive and a checksummed manifest.

A :class:`Table` is a set of equally long columns keyed by label. CSV files follow
RFC 4180 with CRLF line endings; floats are written with 17 significant digits so
they read back exactly, and undefined values (NaN) are empty fields.
"""
import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import h5py
import numpy as np
from labscript_utils import dedent

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
MANIFEST = 'manifest.json'


def format_value(value):
    """CSV text of one value: empty for NaN and None"""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return ''
        return FLOAT_FORMAT % value
    return str(value)


@dataclass
class Table:
    """Named columns of equal length. The first column is usually the time `t`."""

    name: str
    columns: dict = field(default_factory=dict)

    @property
    def header(self):
        return list(self.columns)

    def __len__(self):
        lengths = {len(column) for column in self.columns.values()}
        return lengths.pop() if lengths else 0

    def add(self, label, values):
        if label in self.columns:
            raise ValueError(f"table {self.name!r} already has a column {label!r}")
        values = np.asarray(values)
        if self.columns and len(values) != len(self):
            msg = f"""column {label!r} has {len(values)} rows, table {self.name!r} has
                {len(self)}"""
            raise ValueError(dedent(msg))
        self.columns[label] = values

    def rows(self):
        columns = list(self.columns.values())
        for index in range(len(self)):
            yield [format_value(column[index]) for column in columns]


def time_table(name, grid):
    table = Table(name)
    table.add('t', grid)
    return table


def write_csv(table, directory):
    """Write `table` to <directory>/<name>.csv and return the path"""
    path = Path(directory) / f'{table.name}.csv'
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\r\n')
        writer.writerow(table.header)
        writer.writerows(table.rows())
    logger.debug("wrote %s: %d row(s), %d column(s)", path, len(table), len(table.header))
    return path


def read_csv(path):
    """Read a CSV written by :func:`write_csv` (or any table of numbers) into a dict
    of float columns; empty fields become NaN"""
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        try:
            header = [label.strip() for label in next(reader)]
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    columns = {label: np.empty(len(rows)) for label in header}
    for number, row in enumerate(rows):
        if len(row) != len(header):
            msg = f"""{path}, row {number + 2}: expected {len(header)} fields, got
                {len(row)}"""
            raise ValueError(dedent(msg))
        for label, text in zip(header, row):
            text = text.strip()
            try:
                columns[label][number] = float(text) if text else np.nan
            except ValueError:
                msg = f"""{path}, row {number + 2}, column {label!r}: {text!r} is not
                    a number"""
                raise ValueError(dedent(msg)) from None
    return columns


def write_hdf5(tables, path):
    """Archive tables in one HDF5 file, one group per table and one dataset per
    column. Times are not recorded so that identical runs give identical files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with h5py.File(path, 'w', track_order=True) as hdf5_file:
        for table in tables:
            group = hdf5_file.create_group(table.name, track_order=True)
            for label, values in table.columns.items():
                values = np.asarray(values)
                if values.dtype.kind in 'OUS':
                    data = np.array([format_value(v) for v in values], dtype=object)
                    dtype = h5py.string_dtype()
                else:
                    data, dtype = values.astype(float), None
                group.create_dataset(label, data=data, dtype=dtype, track_times=False)
            group.attrs['columns'] = table.header
    logger.debug("wrote %s with %d table(s)", path, len(tables))
    return path


def sha256(path, chunk_size=1 << 16):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(chunk_size), b''):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(directory, paths, settings, version):
    """Write manifest.json listing every emitted file with its size and SHA-256.
    There are no timestamps in it: identical runs give identical manifests."""
    directory = Path(directory)
    files = []
    for path in sorted(Path(p) for p in paths):
        files.append(
            {
                'path': path.relative_to(directory).as_posix(),
                'size': path.stat().st_size,
                'sha256': sha256(path),
            }
        )
    manifest = {
        'ecoflux_version': version,
        'config': settings,
        'files': files,
    }
    path = directory / MANIFEST
    text = json.dumps(manifest, indent=2, sort_keys=True) + '\n'
    path.write_text(text, encoding='utf-8')
    logger.info("manifest lists %d file(s)", len(files))
    return path
