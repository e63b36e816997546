# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

import warnings

import pytest

import numpy as np

import archscale.dataset as ds
import archscale.model as m
import archscale.planner as plan
import archscale.plotly_io as plots


UCURVE = {
    'x': [2, 8, 16, 24],
    'y': [3.945, 3.543, 3.435, 3.468],
    'label': '512W',
}


def test_nice_ticks_linear():
    assert plots.nice_ticks(0.0, 1.0) == [0.0, 0.5, 1.0]
    assert plots.nice_ticks(2.0, 8.0) == [2.0, 4.0, 6.0, 8.0]


def test_nice_ticks_log():
    assert plots.nice_ticks(1.0, 1000.0, log=True) == [1.0, 10.0, 100.0, 1000.0]


def test_nice_ticks_log_within_a_decade():
    assert plots.nice_ticks(2.0, 8.0, log=True) == [2.0, 4.0, 6.0, 8.0]


def test_render_svg_ucurve():
    svg = plots.render_svg(
        UCURVE, 'ucurve', title='Depth sweep', xlabel='depth',
        ylabel='loss (nats)', vline=(15.2, 'D_crit'),
    )
    assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>')
    assert svg.endswith('</svg>\n')
    assert svg.count('r="3.5"') == 4
    assert svg.count('<polyline') == 1
    assert 'min at 16' in svg
    assert 'stroke-dasharray="6 4"' in svg
    assert '>D_crit</text>' in svg
    assert '>Depth sweep</text>' in svg


def test_render_svg_deterministic():
    first = plots.render_svg(UCURVE, 'ucurve', vline=(15.2, 'D_crit'))
    second = plots.render_svg(dict(UCURVE), 'ucurve', vline=(15.2, 'D_crit'))
    assert first == second


def test_render_svg_scatter_and_line():
    scatter = plots.render_svg(UCURVE, 'scatter')
    assert scatter.count('r="3.5"') == 4
    assert '<polyline' not in scatter
    assert 'min at' not in scatter

    line = plots.render_svg(UCURVE, 'line')
    assert line.count('<polyline') == 1
    assert 'r="3.5"' not in line


def test_render_svg_multiple_series():
    series = [
        UCURVE,
        {'x': [2, 8, 16], 'y': [3.6, 3.5, 3.45], 'label': 'ansatz', 'mode': 'lines'},
    ]
    svg = plots.render_svg(series, 'scatter')
    assert svg.count('<polyline') == 1
    assert 'fill="royalblue"' in svg
    assert 'stroke="#15b01a"' in svg
    assert '>ansatz</text>' in svg


def test_render_svg_single_point():
    svg = plots.render_svg({'x': [16], 'y': [3.435]}, 'line')
    assert svg.count('r="3.5"') == 1
    assert '<polyline' not in svg
    assert '>series 0</text>' in svg


def test_render_svg_escapes_labels():
    series = {'x': [1, 2], 'y': [1, 2], 'label': 'D < D_crit & W'}
    svg = plots.render_svg(series, 'line', title='<tau>')
    assert 'D &lt; D_crit &amp; W' in svg
    assert '&lt;tau&gt;' in svg


def test_render_svg_log_axes():
    series = {'x': [10, 100, 1000, 10000], 'y': [10.0, 20.0, 40.0, 160.0]}
    svg = plots.render_svg(series, 'scatter', log_x=True, log_y=True)
    assert '>1000</text>' in svg
    assert '>10000</text>' in svg
    assert '>100</text>' in svg


@pytest.mark.parametrize(
    'series, kwargs, error',
    [
        (UCURVE, {'kind': 'bar'}, "Invalid plot kind: 'bar'"),
        ([], {}, 'empty series list'),
        ({'x': [], 'y': []}, {}, 'Series 0 is empty'),
        ({'x': [1, 2], 'y': [1]}, {}, 'equal 1D length'),
        ({'x': [1, 2], 'y': [1, np.nan]}, {}, 'non-finite'),
        ({'x': [0, 2], 'y': [1, 2]}, {'log_x': True}, 'positive values'),
    ],
)
def test_render_svg_invalid(series, kwargs, error):
    kind = kwargs.pop('kind', 'scatter')
    with pytest.raises(ValueError, match=error):
        plots.render_svg(series, kind, **kwargs)


def test_emit_plot(tmp_path):
    path = tmp_path / 'ucurve.svg'
    svg = plots.emit_plot(UCURVE, 'ucurve', str(path), xlabel='depth')
    with open(path) as f:
        content = f.read()
    assert content == svg
    assert content == plots.render_svg(UCURVE, 'ucurve', xlabel='depth')


def test_depth_sweep_series_bundled():
    series, dcrit = plots.depth_sweep_series(ds.load_bundled(), width=512)
    measured, predicted = series
    np.testing.assert_equal(measured['x'], [2, 4, 8, 12, 16, 24, 32])
    assert measured['y'][4] == 3.435
    np.testing.assert_equal(predicted['x'], np.arange(1, 33))
    np.testing.assert_allclose(dcrit, m.d_crit(512))


def test_depth_sweep_series_unknown_tokens():
    series, dcrit = plots.depth_sweep_series(
        ds.load_bundled(), width=1024, scale_group='OneB',
    )
    assert len(series) == 1
    np.testing.assert_equal(series[0]['x'], [80])


def test_depth_sweep_series_missing_width():
    with pytest.raises(ValueError, match='No Baseline records at width 9999'):
        plots.depth_sweep_series(ds.load_bundled(), width=9999)


def test_tau_curve_series():
    curve = [(256, 40.0), (512, 55.0), (1024, 75.0)]
    series = plots.tau_curve_series(curve)
    assert len(series) == 1
    fits = {'power': (2.06, 0.44, 0.99), 'log': (8.0, 0.95)}
    series = plots.tau_curve_series(curve, fits)
    assert [entry['label'] for entry in series] == [
        'simulated', 'c*W^a (R2=0.990)', 'c*ln W (R2=0.950)',
    ]
    assert len(series[1]['x']) == 50
    np.testing.assert_allclose(series[1]['x'][[0, -1]], [256, 1024])


def test_plotly_depth_sweep():
    fig = plots.plotly_depth_sweep(ds.load_bundled(), width=512)
    names = [trace.name for trace in fig.data]
    assert names == ['measured (512W)', 'ansatz', 'minimum (16L)']
    assert fig.layout.xaxis.title.text == 'depth (layers)'


def test_plotly_tau_curve():
    curve = [(256, 40.0), (512, 55.0), (1024, 75.0)]
    fig = plots.plotly_tau_curve(curve)
    assert len(fig.data) == 1
    assert fig.layout.xaxis.type == 'log'
    assert fig.layout.yaxis.type == 'log'


def test_plotly_frontier():
    params = m.ScalingLawParams(
        A=406.4, alpha=0.34, B=410.7, delta=0.28, gamma=1.0, mu=0.0,
    )
    query = plan.PlanQuery(
        1e21, params=params, depth_range=(1, 40), width_range=(256, 8192),
    )
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        result = plan.optimize_shape(query)
    fig = plots.plotly_frontier(result)
    assert len(fig.data) == 2
    assert fig.data[1].name.startswith(f'optimum {result.best.depth}L')
    series = plots.frontier_series(result)
    assert series[0]['label'] == 'C = 1e+21'
    assert len(series[0]['x']) == 40


def test_write_html(tmp_path):
    fig = plots.plotly_depth_sweep(ds.load_bundled(), width=512)
    first = tmp_path / 'first.html'
    second = tmp_path / 'second.html'
    plots.write_html(fig, str(first))
    plots.write_html(fig, str(second))
    content = first.read_text()
    assert 'id="archscale-report"' in content
    assert content == second.read_text()
