# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

import io
import json

import pytest

import numpy as np

import archscale.utils as u


def test_format_text_plain():
    text = 'GPT-3'
    formatted = u.format_text(text, danger=True)
    assert formatted == text


def test_format_text_normal():
    text = 'GPT-3'
    formatted = u.format_text(text, warning=False, danger=False, format='html')
    assert formatted == text


def test_format_text_html_warning():
    text = 'GPT-3'
    formatted = u.format_text(text, warning=True, format='html')
    assert formatted == '<span class="warning">GPT-3</span>'


def test_format_text_html_danger():
    text = 'GPT-3'
    formatted = u.format_text(text, danger=True, format='html')
    assert formatted == '<span class="danger">GPT-3</span>'


def test_format_text_rich_warning():
    text = 'GPT-3'
    formatted = u.format_text(text, warning=True, format='rich')
    assert formatted == '<warning>GPT-3</warning>'


def test_format_text_rich_danger():
    text = 'GPT-3'
    formatted = u.format_text(text, danger=True, format='rich')
    assert formatted == '<danger>GPT-3</danger>'


def test_format_text_danger_overrides_warning():
    text = 'GPT-3'
    formatted = u.format_text(text, warning=True, danger=True, format='html')
    assert formatted == '<span class="danger">GPT-3</span>'


def test_format_text_invalid_format():
    with pytest.raises(ValueError, match="Invalid text format: 'latex'"):
        u.format_text('GPT-3', danger=True, format='latex')


def test_rich_print_plain():
    output = io.StringIO()
    u.rich_print('<danger>Delusive</danger>', format=None, file=output)
    assert output.getvalue() == '<danger>Delusive</danger>\n'


@pytest.mark.parametrize(
    'value, fmt, expected',
    [
        (15.16, '.1f', '15.2'),
        (None, '.1f', '---'),
        (np.nan, '.1f', '---'),
        (24512, ',d', '24,512'),
        ('Delusive', '', 'Delusive'),
    ],
)
def test_as_str(value, fmt, expected):
    assert u.as_str(value, fmt, if_none='---') == expected


def test_read_config(tmp_path):
    path = tmp_path / 'archscale.cfg'
    path.write_text(
        '# defaults for quick runs\n'
        'seed = 7\n'
        '\n'
        'resamples = 200   # quick run\n'
        'dcrit-form = power\n'
        'widths = 256, 512, 1024\n'
    )
    config = u.read_config(str(path))
    assert config == {
        'seed': '7',
        'resamples': '200',
        'dcrit_form': 'power',
        'widths': '256, 512, 1024',
    }
    assert list(config) == ['seed', 'resamples', 'dcrit_form', 'widths']


def test_read_config_invalid_line(tmp_path):
    path = tmp_path / 'archscale.cfg'
    path.write_text('seed = 7\nresamples 200\n')
    with pytest.raises(ValueError, match='Invalid config line 2'):
        u.read_config(str(path))


def test_read_config_empty_key(tmp_path):
    path = tmp_path / 'archscale.cfg'
    path.write_text(' = 7\n')
    with pytest.raises(ValueError, match='empty key'):
        u.read_config(str(path))


def test_json_ready():
    value = {
        'width': np.int64(512),
        'd_crit': np.float64(15.17),
        'taus': np.array([1.0, np.inf]),
        'pair': (np.bool_(True), None),
    }
    assert u.json_ready(value) == {
        'width': 512,
        'd_crit': 15.17,
        'taus': [1.0, None],
        'pair': [True, None],
    }


def test_to_json_deterministic():
    text = u.to_json({'b': np.float64(2.0), 'a': [np.int32(1)]})
    assert text == '{\n  "a": [\n    1\n  ],\n  "b": 2.0\n}'
    assert json.loads(text) == {'a': [1], 'b': 2.0}
