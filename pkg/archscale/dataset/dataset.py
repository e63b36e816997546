# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

"""
Ingest, validate, and export loss records; access to the bundled
depth-delusion results.
"""

__all__ = [
    'CSV_COLUMNS',
    'BUNDLED_FILE',
    'Dataset',
    'load_csv',
    'write_csv',
    'load_bundled',
    'bundled_path',
]

import os

import numpy as np
from astropy.io import ascii
from astropy.table import Table, MaskedColumn

from ..utils import ROOT
from ..model import Architecture, LossRecord, SCALE_GROUPS, normalize_group


CSV_COLUMNS = (
    'depth',
    'width',
    'tokens_billions',
    'loss',
    'scale_group',
)
OPTIONAL_COLUMNS = (
    'params_millions',
)
SCHEMA_VERSION = 1

BUNDLED_FILE = f'{ROOT}data/depth_delusion_runs.csv'


class Dataset():
    """
    An immutable collection of LossRecord objects with unique
    (depth, width, scale_group) keys.

    Parameters
    ----------
    records: Iterable of LossRecord
    source: String
        Provenance tag (e.g., the file it was read from).
    schema_version: Integer

    Examples
    --------
    >>> import archscale.dataset as ds
    >>> data = ds.load_bundled()
    >>> print(len(data), data.counts())
    30 {'Baseline': 18, 'OneB': 5, 'ThreeB': 5, 'SevenB': 2}
    >>> record = data.get(16, 512)
    >>> print(record.loss)
    3.435
    """
    def __init__(self, records=(), source='memory', schema_version=SCHEMA_VERSION):
        records = tuple(records)
        seen = {}
        for i, record in enumerate(records):
            if not isinstance(record, LossRecord):
                raise ValueError(
                    f'Dataset entries must be LossRecord objects, got '
                    f'{type(record).__name__} at position {i}'
                )
            if record.key in seen:
                depth, width, group = record.key
                raise ValueError(
                    f'Duplicate record for {depth}L x {width}W ({group}) '
                    f'at positions {seen[record.key]} and {i}'
                )
            seen[record.key] = i
        self._records = records
        self._index = seen
        self.source = source
        self.schema_version = int(schema_version)

    @property
    def records(self):
        return list(self._records)

    def __len__(self):
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def __getitem__(self, index):
        return self._records[index]

    def get(self, depth, width, scale_group='Baseline'):
        """
        Return the record for a shape in a scale group, or None if the
        dataset does not have it.
        """
        key = (int(depth), int(width), normalize_group(scale_group))
        if key not in self._index:
            return None
        return self._records[self._index[key]]

    def select(self, groups=None, known_tokens=False):
        """
        Return a new Dataset with the records of the requested scale
        groups (all if None), optionally only those with known tokens.
        """
        if groups is None:
            groups = SCALE_GROUPS
        elif isinstance(groups, str):
            groups = [groups]
        groups = [normalize_group(group) for group in groups]
        records = [
            record for record in self._records
            if record.scale_group in groups
            if record.tokens is not None or not known_tokens
        ]
        return Dataset(records, source=self.source, schema_version=self.schema_version)

    def counts(self):
        """Number of records per scale group"""
        return {
            group: sum(record.scale_group == group for record in self._records)
            for group in SCALE_GROUPS
        }

    def to_dict(self):
        return {
            'source': self.source,
            'schema_version': self.schema_version,
            'records': [record.as_dict() for record in self._records],
        }

    def __str__(self):
        counts = ', '.join(
            f'{group}: {count}' for group,count in self.counts().items()
        )
        return f'Dataset from {self.source} ({len(self)} records; {counts})'


def _is_blank(value):
    return np.ma.is_masked(value) or str(value).strip() == ''


def _parse_cell(table, row, column, kind, optional=False):
    """Parse one CSV cell, naming row and column on failure."""
    value = table[column][row] if column in table.colnames else ''
    # Data rows start on the second file line
    where = f"row {row+1} (line {row+2}), column '{column}'"
    if _is_blank(value):
        if optional:
            return None
        raise ValueError(f'Missing value at {where}')
    text = str(value).strip()
    try:
        if kind == 'int':
            number = float(text)
            if not number.is_integer():
                raise ValueError
            return int(number)
        if kind == 'float':
            return float(text)
    except ValueError:
        raise ValueError(f"Invalid {kind} value '{text}' at {where}")
    return text


def load_csv(path):
    """
    Read a loss-records CSV file.

    The header must be exactly 'depth,width,tokens_billions,loss,scale_group',
    optionally followed by a 'params_millions' column.  Blank
    tokens_billions (or params_millions) cells mean unknown.

    Parameters
    ----------
    path: String
        Path to the CSV file.

    Returns
    -------
    dataset: Dataset

    Examples
    --------
    >>> import archscale.dataset as ds
    >>> data = ds.load_csv(ds.BUNDLED_FILE)
    """
    with open(path, 'r') as f:
        content = f.read()
    lines = [line for line in content.splitlines() if line.strip() != '']
    if len(lines) == 0:
        return Dataset([], source=str(path))

    header = [name.strip() for name in lines[0].split(',')]
    n_required = len(CSV_COLUMNS)
    valid_header = (
        tuple(header[:n_required]) == CSV_COLUMNS and
        all(name in OPTIONAL_COLUMNS for name in header[n_required:])
    )
    if not valid_header:
        expected = ','.join(CSV_COLUMNS)
        raise ValueError(
            f"Invalid header in '{path}': expected '{expected}' "
            f"(optionally followed by 'params_millions'), "
            f"got '{lines[0].strip()}'"
        )
    if len(lines) == 1:
        return Dataset([], source=str(path))

    table = ascii.read(
        lines,
        format='csv', guess=False, fast_reader=False,
        converters={name: [ascii.convert_numpy(str)] for name in header},
    )

    records = []
    for i in range(len(table)):
        depth = _parse_cell(table, i, 'depth', 'int')
        width = _parse_cell(table, i, 'width', 'int')
        tokens = _parse_cell(table, i, 'tokens_billions', 'float', optional=True)
        loss = _parse_cell(table, i, 'loss', 'float')
        group = _parse_cell(table, i, 'scale_group', 'str')
        params = _parse_cell(table, i, 'params_millions', 'float', optional=True)
        try:
            record = LossRecord(
                Architecture(depth, width),
                loss=loss,
                tokens_billions=tokens,
                scale_group=group,
                params_millions=params,
            )
        except ValueError as error:
            raise ValueError(f'Invalid row {i+1} (line {i+2}): {error}')
        records.append(record)

    try:
        return Dataset(records, source=str(path))
    except ValueError as error:
        raise ValueError(f"Invalid dataset '{path}': {error}")


def _format_number(value):
    if value is None:
        return ''
    return repr(float(value))


def write_csv(dataset, path):
    """
    Write a Dataset to a CSV file readable by load_csv().  The
    params_millions column is written only when some record has it.
    Floats are written with their shortest round-trip representation.
    """
    records = list(dataset)
    columns = {
        'depth': [str(record.depth) for record in records],
        'width': [str(record.width) for record in records],
        'tokens_billions': [
            _format_number(record.tokens_billions) for record in records
        ],
        'loss': [_format_number(record.loss) for record in records],
        'scale_group': [record.scale_group for record in records],
    }
    names = list(CSV_COLUMNS)
    if any(record.params_millions is not None for record in records):
        columns['params_millions'] = [
            _format_number(record.params_millions) for record in records
        ]
        names.append('params_millions')

    if len(records) == 0:
        with open(path, 'w') as f:
            f.write(','.join(names) + '\n')
        return

    table = Table()
    for name in names:
        values = columns[name]
        mask = [value == '' for value in values]
        table[name] = MaskedColumn(values, mask=mask, dtype=str)
    ascii.write(table, path, format='csv', overwrite=True)


def bundled_path():
    """Path of the bundled dataset, overridable with ARCHSCALE_DATA"""
    return os.environ.get('ARCHSCALE_DATA', BUNDLED_FILE)


def load_bundled(path=None):
    """
    Load the bundled depth-delusion results (30 records), or the file
    pointed to by the ARCHSCALE_DATA environment variable.
    """
    if path is None:
        path = bundled_path()
    return load_csv(path)
