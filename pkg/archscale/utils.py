# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'ROOT',
    'format_text',
    'rich_print',
    'as_str',
    'read_config',
    'json_ready',
    'to_json',
]

import json
import os
import re
import sys

import numpy as np
import prompt_toolkit

ROOT = os.path.realpath(os.path.dirname(__file__)) + '/'

REPORT_STYLE = prompt_toolkit.styles.Style.from_dict({
    'danger': '#cb2222',
    'warning': '#ffa500',
})


def format_text(text, warning=False, danger=False, format=None):
    """
    Return a colorful text depending on requested format and warning
    or danger flags.

    Parameters
    ----------
    text: String
        A text to print with optional richer format.
    warning: Bool
        If True, format as warning text (orange color).
    danger: Bool
        If True, format as danger text (red color).
        If True, overrides warning.
    format: String
        If None return plain text.
        If 'html' return HTML formatted text.
        If 'rich' return formatted text to be printed with prompt_toolkit.

    See also
    --------
    archscale.utils.rich_print

    Examples
    --------
    >>> import archscale.utils as u
    >>> text = 'Delusive'
    >>> plain = u.format_text(text, danger=True)
    >>> html = u.format_text(text, danger=True, format='html')
    >>> rich = u.format_text(text, danger=True, format='rich')
    """
    status = 'normal'
    if danger:
        status = 'danger'
    elif warning:
        status = 'warning'

    if format is None or status=='normal':
        return text

    if format == 'html':
        text_value = f'<span class="{status}">{text}</span>'
    elif format == 'rich':
        text_value = f'<{status}>{text}</{status}>'
    else:
        raise ValueError(f"Invalid text format: '{format}'")
    return text_value


def rich_print(report, format='rich', file=None):
    """
    Print a report to screen (or to file), rendering format_text()
    'rich' tags as colors.

    Parameters
    ----------
    report: String
        Text, possibly with <danger>/<warning> tags.
    format: String
        If 'rich' interpret the tags, otherwise print as plain text.
    file: File object
        Where to print, defaults to sys.stdout.
    """
    if file is None:
        file = sys.stdout
    if format != 'rich':
        print(report, file=file)
        return
    # Escape everything except the two style tags
    escaped = (
        report
        .replace('&', '&amp;')
        .replace('<', '&lt;')
        .replace('>', '&gt;')
    )
    escaped = re.sub(
        r'&lt;(/?)(danger|warning)&gt;', r'<\1\2>', escaped,
    )
    prompt_toolkit.print_formatted_text(
        prompt_toolkit.HTML(escaped), style=REPORT_STYLE, file=file,
    )


def as_str(value, fmt='', if_none=None):
    """
    Format a value as a string; if the value is None or NaN return
    if_none instead.

    Examples
    --------
    >>> import archscale.utils as u
    >>> u.as_str(15.16, '.1f')
    '15.2'
    >>> u.as_str(None, '.1f', '---')
    '---'
    """
    if value is None:
        return if_none
    if isinstance(value, (float, np.floating)) and np.isnan(value):
        return if_none
    return f'{value:{fmt}}'


def read_config(config_file):
    """
    Read a 'key = value' configuration file.  Lines starting with '#'
    and blank lines are ignored, and an inline '#' starts a comment.
    Hyphens in keys are read as underscores.

    Parameters
    ----------
    config_file: String
        Path to the configuration file.

    Returns
    -------
    config: Dictionary
        key: value string pairs, in file order.

    Examples
    --------
    >>> # Contents of 'fit.cfg':
    >>> # seed = 7
    >>> # resamples = 200   # quick run
    >>> import archscale.utils as u
    >>> config = u.read_config('fit.cfg')
    >>> print(config)
    {'seed': '7', 'resamples': '200'}
    """
    config = {}
    with open(config_file, 'r') as f:
        lines = f.readlines()
    for i, line in enumerate(lines):
        line = line.split('#', 1)[0].strip()
        if line == '':
            continue
        if '=' not in line:
            raise ValueError(
                f"Invalid config line {i+1} in '{config_file}': "
                f"expected 'key = value', got '{line}'"
            )
        key, value = line.split('=', 1)
        key = key.strip().replace('-', '_')
        if key == '':
            raise ValueError(
                f"Invalid config line {i+1} in '{config_file}': empty key"
            )
        config[key] = value.strip()
    return config


def json_ready(value):
    """
    Recursively convert numpy scalars/arrays and tuples into plain
    Python types; non-finite floats become None.
    """
    if isinstance(value, dict):
        return {str(key): json_ready(val) for key, val in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [json_ready(val) for val in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return None
        return value
    return value


def to_json(value):
    """Deterministic JSON text (sorted keys, two-space indent)"""
    return json.dumps(json_ready(value), indent=2, sort_keys=True)
