# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'REPORT_DIV_ID',
    'depth_sweep_series',
    'tau_curve_series',
    'frontier_series',
    'plotly_depth_sweep',
    'plotly_tau_curve',
    'plotly_frontier',
    'plotly_fit',
    'write_html',
]

import numpy as np
import plotly.graph_objects as go

from ..model import PUBLISHED_PARAMS, d_crit, loss_terms
from .svg import COLOR_SEQUENCE


# Fixed id so repeated reports are byte-identical
REPORT_DIV_ID = 'archscale-report'


def depth_sweep_series(records, width, scale_group='Baseline', params=None):
    """
    Measured (and, when tokens are known, predicted) loss against depth
    at a fixed width.

    Parameters
    ----------
    records: Iterable of LossRecord (or a Dataset)
    width: Integer
    scale_group: String
    params: ScalingLawParams
        Parameters of the predicted curve, defaults to PUBLISHED_PARAMS.

    Returns
    -------
    series: List of dictionaries
        'x'/'y'/'label' series sorted by depth: the measurements, and
        the prediction at the measured token count if known.
    dcrit: Float
        Critical depth of the width.
    """
    if params is None:
        params = PUBLISHED_PARAMS
    sweep = sorted(
        [
            record for record in records
            if record.width == width and record.scale_group == scale_group
        ],
        key=lambda record: record.depth,
    )
    if len(sweep) == 0:
        raise ValueError(f'No {scale_group} records at width {width}')
    depths = np.array([record.depth for record in sweep])
    series = [{
        'x': depths,
        'y': np.array([record.loss for record in sweep]),
        'label': f'measured ({width}W)',
        'mode': 'lines+markers',
    }]
    tokens = sweep[0].tokens
    if tokens is not None:
        model_depths = np.arange(1, np.amax(depths)+1)
        predicted = loss_terms(model_depths, width, tokens, params)['loss']
        series.append({
            'x': model_depths,
            'y': predicted,
            'label': 'ansatz',
            'mode': 'lines',
        })
    return series, d_crit(width, params)


def tau_curve_series(curve, fits=None):
    """Simulated tau(W) points plus the fitted power and log laws"""
    width, persistence = np.array(
        [(float(w), float(t)) for w, t in curve]
    ).T
    series = [{
        'x': width, 'y': persistence, 'label': 'simulated', 'mode': 'markers',
    }]
    if fits is not None:
        grid = np.geomspace(np.amin(width), np.amax(width), 50)
        c, a, r2 = fits['power']
        series.append({
            'x': grid, 'y': c*grid**a,
            'label': f'c*W^a (R2={r2:.3f})', 'mode': 'lines',
        })
        c_log, r2_log = fits['log']
        series.append({
            'x': grid, 'y': c_log*np.log(grid),
            'label': f'c*ln W (R2={r2_log:.3f})', 'mode': 'lines',
        })
    return series


def frontier_series(result):
    """Per-depth best loss of a PlanResult"""
    return [{
        'x': np.array([point.depth for point in result.frontier]),
        'y': np.array([point.predicted_loss for point in result.frontier]),
        'label': f'C = {result.compute:.3g}',
        'mode': 'lines',
    }]


def _figure(series, xlabel, ylabel, log_x=False, log_y=False):
    fig = go.Figure(layout={'colorway': COLOR_SEQUENCE})
    for entry in series:
        fig.add_trace(go.Scatter(
            x=entry['x'],
            y=entry['y'],
            mode=entry.get('mode', 'lines'),
            name=entry['label'],
        ))
    fig.update_yaxes(
        title_text=ylabel,
        title_standoff=0,
        type='log' if log_y else 'linear',
    )
    fig.update_xaxes(
        title_text=xlabel,
        title_standoff=0,
        type='log' if log_x else 'linear',
    )
    fig.update_layout(legend=dict(
        orientation="h",
        yanchor="bottom",
        xanchor="right",
        y=1.02,
        x=1
    ))
    fig.update_layout(showlegend=True)
    return fig


def plotly_depth_sweep(records, width, scale_group='Baseline', params=None):
    """
    Make a plotly figure of the loss U-curve over depth at one width,
    with the critical depth marked.

    Examples
    --------
    >>> import archscale.dataset as ds
    >>> import archscale.plotly_io as plots
    >>> fig = plots.plotly_depth_sweep(ds.load_bundled(), width=512)
    >>> fig.show()
    """
    series, dcrit = depth_sweep_series(records, width, scale_group, params)
    fig = _figure(series, 'depth (layers)', 'loss (nats)')
    fig.add_vline(
        x=dcrit, line_dash='dash', line_color='gray',
        annotation_text=f'D_crit = {dcrit:.1f}',
    )
    first = series[0]
    k = int(np.argmin(first['y']))
    fig.add_trace(go.Scatter(
        x=[first['x'][k]], y=[first['y'][k]],
        mode='markers', name=f"minimum ({first['x'][k]}L)",
        marker=dict(size=14, symbol='circle-open', color='red'),
    ))
    fig.update_traces(
        hovertemplate=
            'D = %{x}<br>'+
            'loss = %{y:.3f}'
    )
    return fig


def plotly_tau_curve(curve, fits=None):
    """Log-log figure of a tau(W) curve and its fitted laws"""
    fig = _figure(
        tau_curve_series(curve, fits), 'width', 'persistence length tau',
        log_x=True, log_y=True,
    )
    fig.update_traces(
        hovertemplate=
            'W = %{x:.0f}<br>'+
            'tau = %{y:.4g}'
    )
    return fig


def plotly_frontier(result):
    """Best loss per depth at fixed compute, optimum and D_crit marked"""
    fig = _figure(frontier_series(result), 'depth (layers)', 'predicted loss (nats)')
    best = result.best
    fig.add_trace(go.Scatter(
        x=[best.depth], y=[best.predicted_loss],
        mode='markers', name=f'optimum {best.depth}L x {best.width}W',
        marker=dict(size=12, symbol='star', color='Gold'),
    ))
    fig.add_vline(
        x=best.depth/result.d_over_dcrit, line_dash='dash', line_color='gray',
        annotation_text='D_crit(W*)',
    )
    return fig


def plotly_fit(result):
    """Observed against predicted loss of a FitResult"""
    observed = result.observed
    predicted = result.predicted
    lo = float(np.amin([observed, predicted]))
    hi = float(np.amax([observed, predicted]))
    fig = _figure(
        [
            {'x': predicted, 'y': observed, 'label': 'records', 'mode': 'markers'},
            {'x': [lo, hi], 'y': [lo, hi], 'label': 'y = x', 'mode': 'lines'},
        ],
        'predicted loss (nats)', 'observed loss (nats)',
    )
    fig.update_layout(
        title=f'R2 = {result.r_squared:.3f}, RMSE = {result.rmse:.3f} nats',
    )
    return fig


def write_html(fig, path):
    """Write a figure as a standalone HTML page with a fixed div id"""
    fig.write_html(
        path, include_plotlyjs='cdn', full_html=True, div_id=REPORT_DIV_ID,
    )
