# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

import pytest

import numpy as np

import archscale.audit as audit
import archscale.model as m


@pytest.mark.parametrize(
    'ratio, verdict',
    [
        (0.0, 'UnderCritical'),
        (0.99, 'UnderCritical'),
        (1.0, 'NearOptimal'),
        (1.99, 'NearOptimal'),
        (2.0, 'OverDeep'),
        (2.99, 'OverDeep'),
        (3.0, 'Delusive'),
        (12.0, 'Delusive'),
    ],
)
def test_verdict_for_ratio(ratio, verdict):
    assert audit.verdict_for_ratio(ratio) == verdict


def test_verdict_for_ratio_invalid():
    with pytest.raises(ValueError, match='Invalid depth ratio'):
        audit.verdict_for_ratio(np.nan)
    with pytest.raises(ValueError, match='Invalid depth ratio'):
        audit.verdict_for_ratio(-1.0)


def test_audit_model_gpt3():
    entry = audit.audit_model('GPT-3', 96, 12288)
    np.testing.assert_allclose(entry.d_crit, 2.432*np.log(12288))
    np.testing.assert_allclose(entry.ratio, 96/entry.d_crit)
    assert entry.verdict == 'Delusive'
    assert entry.kappa == 2.432
    assert str(entry) == (
        'GPT-3: 96L x 12288W, D_crit = 22.9, D/D_crit = 4.19 (Delusive)'
    )


def test_audit_model_kappa_override():
    entry = audit.audit_model('GPT-3', 96, 12288, kappa=10.0)
    assert entry.kappa == 10.0
    assert entry.verdict == 'NearOptimal'


def test_audit_model_follows_params_form():
    params = m.PUBLISHED_PARAMS.replace(dcrit_form='PowerLaw')
    entry = audit.audit_model('GPT-3', 96, 12288, params)
    assert entry.form == 'PowerLaw'
    np.testing.assert_allclose(entry.d_crit, 2.06*12288**0.44)
    assert entry.verdict == 'UnderCritical'
    log_entry = audit.audit_model('GPT-3', 96, 12288, params, form='log')
    assert log_entry.form == 'LogLaw'
    assert log_entry.verdict == 'Delusive'


def test_dcrit_law():
    assert audit.dcrit_law() == 'kappa*ln(W) with kappa = 2.432'
    assert audit.dcrit_law(form='power') == (
        'tau_c*W**tau_a with tau_c = 2.06, tau_a = 0.44'
    )


def test_audit_model_invalid_shape():
    with pytest.raises(ValueError, match='depth must be >= 1'):
        audit.audit_model('Empty', 0, 4096)


def test_builtin_entries():
    entries = audit.builtin_entries()
    verdicts = {entry.name: entry.verdict for entry in entries}
    assert verdicts == {
        'GPT-3': 'Delusive',
        'PaLM': 'Delusive',
        'Llama-2-70B': 'Delusive',
        'Llama-3-70B': 'Delusive',
        'Mistral-7B': 'NearOptimal',
    }
    for entry in entries:
        assert entry.verdict == entry.published_verdict
        np.testing.assert_allclose(entry.d_crit, entry.published_d_crit, atol=0.4)


def test_audit_report_sorted():
    text, report = audit.audit_report()
    names = [entry['name'] for entry in report['entries']]
    assert names[0] == 'PaLM'
    assert names[-1] == 'Mistral-7B'
    ratios = [entry['ratio'] for entry in report['entries']]
    assert ratios == sorted(ratios, reverse=True)
    assert report['caveat'] == audit.EXTRAPOLATION_CAVEAT
    assert audit.EXTRAPOLATION_CAVEAT in text
    assert 'kappa = 2.432' in text


def test_audit_report_tuples():
    entries = [('wide', 16, 4096), ('deep', 40, 1024)]
    text, report = audit.audit_report(entries)
    assert [entry['name'] for entry in report['entries']] == ['deep', 'wide']
    assert report['entries'][0]['verdict'] == 'OverDeep'
    assert report['entries'][1]['verdict'] == 'UnderCritical'
    assert 'Published' not in text


def test_audit_report_rich_highlights():
    entries = [('deep', 96, 12288), ('mid', 48, 1024), ('shallow', 8, 1024)]
    text, report = audit.audit_report(entries, format='rich')
    lines = text.split('\n')
    assert lines[2].startswith('<danger>deep')
    assert lines[3].startswith('<warning>mid')
    assert lines[4].startswith('shallow')


def test_audit_report_log_law_footer():
    text, report = audit.audit_report([('GPT-3', 96, 12288)])
    assert 'D_crit = kappa*ln(W) with kappa = 2.432' in text
    assert report['entries'][0]['form'] == 'LogLaw'


def test_audit_report_power_law_footer():
    params = m.PUBLISHED_PARAMS.replace(dcrit_form='PowerLaw')
    text, report = audit.audit_report([('GPT-3', 96, 12288)], params)
    assert 'D_crit = tau_c*W**tau_a with tau_c = 2.06, tau_a = 0.44' in text
    assert 'kappa*ln(W)' not in text
    assert report['entries'][0]['form'] == 'PowerLaw'
    assert report['entries'][0]['verdict'] == 'UnderCritical'


def test_audit_report_duplicates():
    entries = [('twin', 16, 4096), ('twin', 32, 4096)]
    with pytest.raises(ValueError, match=r"Duplicate model names in roster: \['twin'\]"):
        audit.audit_report(entries)


def test_audit_report_empty():
    with pytest.raises(ValueError, match='roster is empty'):
        audit.audit_report([])


def test_load_roster(tmp_path):
    path = tmp_path / 'roster.csv'
    path.write_text('name,depth,width\nwide,16,4096\ndeep,64,1024\n')
    roster = audit.load_roster(str(path))
    assert roster == [('wide', 16, 4096), ('deep', 64, 1024)]


def test_load_roster_header_only(tmp_path):
    path = tmp_path / 'roster.csv'
    path.write_text('name,depth,width\n')
    assert audit.load_roster(str(path)) == []


def test_load_roster_invalid_header(tmp_path):
    path = tmp_path / 'roster.csv'
    path.write_text('model,layers,dim\nwide,16,4096\n')
    with pytest.raises(ValueError, match='Invalid roster header'):
        audit.load_roster(str(path))


def test_load_roster_invalid_row(tmp_path):
    path = tmp_path / 'roster.csv'
    path.write_text('name,depth,width\nwide,16,4096\ndeep,many,1024\n')
    with pytest.raises(ValueError, match='Invalid roster row 2'):
        audit.load_roster(str(path))


def test_kappa_sensitivity():
    rows = audit.kappa_sensitivity(('GPT-3', 96, 12288), [2.43, 10.0, 20.0])
    assert [row['kappa'] for row in rows] == [2.43, 10.0, 20.0]
    assert [row['verdict'] for row in rows] == [
        'Delusive', 'NearOptimal', 'UnderCritical',
    ]
    np.testing.assert_allclose(rows[1]['d_crit'], 10.0*np.log(12288))


def test_kappa_sensitivity_mistral_interval():
    entry = audit.audit_model('Mistral-7B', 32, 4096)
    rows = audit.kappa_sensitivity(entry, [2.09, 2.43, 2.77])
    assert {row['verdict'] for row in rows} == {'NearOptimal'}


def test_redesign_gpt3():
    redesign = audit.redesign_shape(96, 12288, name='GPT-3')
    assert redesign['name'] == 'GPT-3'
    assert redesign['redesign']['depth'] == 24
    assert redesign['redesign']['width'] == 24512
    assert redesign['redesign']['width'] % 64 == 0
    assert redesign['redesign']['ratio'] <= 1.0
    assert np.abs(redesign['param_change']) < 0.02
    assert redesign['original']['n_params'] == m.count_params(
        m.Architecture(96, 12288)
    )
    assert redesign['published'] == {'depth': 24, 'width': 28000}


def test_redesign_unnamed():
    redesign = audit.redesign_shape(80, 8192)
    assert redesign['published'] is None
    assert redesign['redesign']['depth'] < 80
    assert redesign['redesign']['width'] > 8192
