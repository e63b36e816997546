# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

import pytest

import numpy as np

import archscale.dataset as ds
import archscale.model as m


HEADER = 'depth,width,tokens_billions,loss,scale_group'


def write(tmp_path, text, name='runs.csv'):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_bundled():
    data = ds.load_bundled()
    assert len(data) == 30
    assert data.counts() == {
        'Baseline': 18, 'OneB': 5, 'ThreeB': 5, 'SevenB': 2,
    }
    assert data.get(16, 512).loss == 3.435
    assert data.get(64, 2816, '7B').tokens_billions == 138.52


def test_load_bundled_unknown_tokens():
    data = ds.load_bundled()
    for record in data.select(['1B', '3B']):
        assert record.tokens is None
    for record in data.select(['Baseline', 'SevenB']):
        assert record.tokens is not None


def test_load_bundled_blank_param_count():
    record = ds.load_bundled().get(56, 2176, 'ThreeB')
    assert record.params_millions is None
    assert record.loss == 2.585


def test_load_bundled_env_override(tmp_path, monkeypatch):
    path = write(tmp_path, f'{HEADER}\n16,512,6.4,3.435,Baseline\n')
    monkeypatch.setenv('ARCHSCALE_DATA', path)
    assert ds.bundled_path() == path
    data = ds.load_bundled()
    assert len(data) == 1


def test_select_known_tokens():
    data = ds.load_bundled()
    known = data.select(known_tokens=True)
    assert len(known) == 20
    baseline = data.select('Baseline')
    assert len(baseline) == 18
    assert baseline.source == data.source


def test_dataset_get_missing():
    assert ds.load_bundled().get(17, 512) is None


def test_dataset_duplicates():
    record = m.LossRecord(m.Architecture(16, 512), 3.435, 6.4)
    with pytest.raises(ValueError, match='Duplicate record for 16L x 512W'):
        ds.Dataset([record, record])


def test_dataset_invalid_entry():
    with pytest.raises(ValueError, match='must be LossRecord objects'):
        ds.Dataset([(16, 512, 3.435)])


def test_load_csv_header_only(tmp_path):
    path = write(tmp_path, f'{HEADER}\n')
    assert len(ds.load_csv(path)) == 0


def test_load_csv_empty_file(tmp_path):
    path = write(tmp_path, '')
    assert len(ds.load_csv(path)) == 0


def test_load_csv_invalid_header(tmp_path):
    path = write(tmp_path, 'depth,width,loss\n16,512,3.435\n')
    with pytest.raises(ValueError, match='Invalid header'):
        ds.load_csv(path)


def test_load_csv_invalid_number(tmp_path):
    text = f'{HEADER}\n16,512,6.4,3.435,Baseline\n24,wide,6.4,3.468,Baseline\n'
    path = write(tmp_path, text)
    with pytest.raises(
        ValueError, match=r"Invalid int value 'wide' at row 2 \(line 3\), column 'width'",
    ):
        ds.load_csv(path)


def test_load_csv_missing_loss(tmp_path):
    path = write(tmp_path, f'{HEADER}\n16,512,6.4,,Baseline\n')
    with pytest.raises(ValueError, match="Missing value at row 1 .* column 'loss'"):
        ds.load_csv(path)


def test_load_csv_invalid_group(tmp_path):
    path = write(tmp_path, f'{HEADER}\n16,512,6.4,3.435,13B\n')
    with pytest.raises(ValueError, match='Invalid row 1'):
        ds.load_csv(path)


def test_load_csv_duplicate_rows(tmp_path):
    text = f'{HEADER}\n16,512,6.4,3.435,Baseline\n16,512,6.4,3.440,Baseline\n'
    path = write(tmp_path, text)
    with pytest.raises(ValueError, match='Duplicate record'):
        ds.load_csv(path)


def test_write_csv_round_trip(tmp_path):
    data = ds.load_bundled()
    path = str(tmp_path / 'copy.csv')
    ds.write_csv(data, path)
    copy = ds.load_csv(path)
    assert len(copy) == len(data)
    for original, saved in zip(data, copy):
        assert saved == original


def test_write_csv_without_param_counts(tmp_path):
    records = [
        m.LossRecord(m.Architecture(16, 512), 3.435, 6.4),
        m.LossRecord(m.Architecture(48, 1280), 2.839, None, 'OneB'),
    ]
    path = str(tmp_path / 'runs.csv')
    ds.write_csv(ds.Dataset(records), path)
    with open(path) as f:
        header = f.readline().strip()
    assert header == HEADER
    copy = ds.load_csv(path)
    assert copy.get(48, 1280, 'OneB').tokens is None


def test_dataset_to_dict():
    report = ds.load_bundled().select('SevenB').to_dict()
    assert report['schema_version'] == 1
    assert len(report['records']) == 2
    first = report['records'][0]
    assert first['depth'] == 32
    np.testing.assert_allclose(first['tokens_billions'], 143.12)
