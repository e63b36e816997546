# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

import pytest

import archscale.dataset as ds
import archscale.model as m


def replace_loss(dataset, depth, width, loss, group='Baseline'):
    records = []
    for record in dataset:
        if record.key == (depth, width, group):
            record = m.LossRecord(
                record.arch, loss, record.tokens_billions, record.scale_group,
            )
        records.append(record)
    return ds.Dataset(records)


def test_verify_bundled_passes():
    report = ds.verify_published_results(ds.load_bundled())
    assert report.passed
    assert report.failed == []
    assert report.skipped == []
    assert len(report.checks) == 11
    assert all(check.status == ds.PASSED for check in report.checks)


def test_verify_bundled_details():
    report = ds.verify_published_results(ds.load_bundled())
    check = report['depth_delusion_24L']
    assert check.detail.startswith(
        'loss(24L x 512W) - loss(16L x 512W) = 3.468 - 3.435 = 0.033'
    )
    assert '0.119' in report['gap_7B'].detail
    assert report['depth_u_shape_512W'].detail.startswith('minimum at 16L')
    assert report['best_not_deepest_3B'].detail == (
        'best 40L x 2432W (2.519), deepest is 72L'
    )


def test_verify_missing_rows_are_skipped():
    data = ds.load_bundled().select(['Baseline', 'OneB', 'ThreeB'])
    report = ds.verify_published_results(data)
    assert report.passed
    assert report.skipped == [
        'gap_7B', 'gap_significance_7B', 'best_not_deepest_7B',
    ]
    assert report['gap_7B'].detail == (
        'missing 64L x 2816W (SevenB), 32L x 4096W (SevenB)'
    )


def test_verify_empty_dataset():
    report = ds.verify_published_results(ds.Dataset([]))
    assert report.passed
    assert len(report.skipped) == 11


def test_verify_altered_gap_fails():
    data = replace_loss(ds.load_bundled(), 24, 512, 3.500)
    report = ds.verify_published_results(data)
    assert not report.passed
    assert report.failed == ['depth_delusion_24L']


def test_verify_reversed_delusion_fails():
    data = replace_loss(ds.load_bundled(), 32, 512, 3.400)
    report = ds.verify_published_results(data)
    assert report.failed == ['depth_delusion_32L']


def test_verify_deepest_best_fails():
    data = replace_loss(ds.load_bundled(), 80, 1024, 2.700, 'OneB')
    report = ds.verify_published_results(data)
    assert 'best_not_deepest_1B' in report.failed
    assert 'gap_significance_1B' in report.failed


def test_verification_report_outputs():
    data = replace_loss(ds.load_bundled(), 24, 512, 3.500)
    report = ds.verify_published_results(data.select(['Baseline', 'OneB']))
    text = report.text()
    lines = text.split('\n')
    assert lines[0].startswith('FAILED   depth_delusion_24L:')
    assert lines[-1] == '5 passed, 1 failed, 5 skipped'

    rich = report.text(format='rich')
    assert '<danger>FAILED   depth_delusion_24L' in rich
    assert '<warning>SKIPPED  gap_7B' in rich

    summary = report.to_dict()
    assert summary['passed'] is False
    assert summary['checks'][0] == report.checks[0].as_dict()


def test_verification_report_missing_check():
    report = ds.verify_published_results(ds.load_bundled())
    with pytest.raises(KeyError):
        report['no_such_check']
