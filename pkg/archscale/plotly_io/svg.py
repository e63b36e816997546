# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

"""
Self-contained, byte-deterministic SVG figures for the CLI reports.
"""

__all__ = [
    'PLOT_KINDS',
    'COLOR_SEQUENCE',
    'nice_ticks',
    'render_svg',
    'emit_plot',
]

from xml.sax.saxutils import escape

import numpy as np


PLOT_KINDS = (
    'scatter',
    'line',
    'ucurve',
)

COLOR_SEQUENCE = [
    'royalblue',
    '#15b01a',
    '#000075',
    '#f032e6',
    '#42d4f4',
    '#888888',
    'red',
    '#9a6324',
]

WIDTH = 640
HEIGHT = 420
MARGIN = {'left': 72, 'right': 24, 'top': 40, 'bottom': 56}


def _fmt(value):
    """Fixed-precision coordinates keep the output byte-stable"""
    return f'{value:.2f}'


def _tick_label(value):
    if value == 0:
        return '0'
    if np.abs(value) >= 1e5 or np.abs(value) < 1e-3:
        return f'{value:.0e}'.replace('e+0', 'e').replace('e-0', 'e-')
    return f'{value:.6g}'


def nice_ticks(lo, hi, log=False, n_ticks=5):
    """
    Tick positions spanning [lo, hi]: 1-2-5 steps on linear axes,
    powers of ten on log axes.
    """
    if log:
        first = int(np.floor(np.log10(lo)))
        last = int(np.ceil(np.log10(hi)))
        ticks = [10.0**k for k in range(first, last+1)]
        ticks = [tick for tick in ticks if lo*(1-1e-9) <= tick <= hi*(1+1e-9)]
        if len(ticks) >= 2:
            return ticks
        # Less than a decade
        return nice_ticks(lo, hi, log=False, n_ticks=n_ticks)
    raw = (hi - lo) / max(n_ticks-1, 1)
    magnitude = 10.0**np.floor(np.log10(raw))
    for factor in (1.0, 2.0, 5.0, 10.0):
        step = factor * magnitude
        if step >= raw:
            break
    start = np.ceil(lo/step - 1e-9) * step
    ticks = np.arange(start, hi + 0.5*step, step)
    return [
        float(np.round(tick/step)*step) for tick in ticks
        if lo - 1e-9*step <= tick <= hi + 1e-9*step
    ]


def _as_series(series):
    if isinstance(series, dict):
        series = [series]
    series = list(series)
    if len(series) == 0:
        raise ValueError('Cannot plot an empty series list')
    cleaned = []
    for i, entry in enumerate(series):
        x = np.asarray(entry['x'], dtype=float)
        y = np.asarray(entry['y'], dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError(
                f'Series {i} must have x and y of equal 1D length'
            )
        if len(x) == 0:
            raise ValueError(f'Series {i} is empty')
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ValueError(f'Series {i} has non-finite values')
        cleaned.append({
            'x': x,
            'y': y,
            'label': str(entry.get('label', f'series {i}')),
            'mode': entry.get('mode'),
        })
    return cleaned


def _axis_range(values, log, extra=()):
    values = np.concatenate([values, np.asarray(extra, dtype=float)])
    if log:
        if np.any(values <= 0):
            raise ValueError('Log axes need positive values')
        lo, hi = np.amin(values), np.amax(values)
        if lo == hi:
            return lo/2.0, hi*2.0
        pad = (hi/lo)**0.05
        return lo/pad, hi*pad
    lo, hi = np.amin(values), np.amax(values)
    if lo == hi:
        half = 0.5 if lo == 0 else 0.1*np.abs(lo)
        return lo-half, hi+half
    pad = 0.05 * (hi - lo)
    return lo-pad, hi+pad


class _Frame():
    """Maps data coordinates to SVG pixels"""
    def __init__(self, x_range, y_range, log_x, log_y):
        self.log_x = log_x
        self.log_y = log_y
        self.x0, self.x1 = self._scale(x_range, log_x)
        self.y0, self.y1 = self._scale(y_range, log_y)
        self.left = MARGIN['left']
        self.right = WIDTH - MARGIN['right']
        self.top = MARGIN['top']
        self.bottom = HEIGHT - MARGIN['bottom']

    @staticmethod
    def _scale(bounds, log):
        if log:
            return np.log10(bounds[0]), np.log10(bounds[1])
        return bounds

    def px(self, x):
        x = np.log10(x) if self.log_x else x
        return self.left + (x-self.x0)/(self.x1-self.x0)*(self.right-self.left)

    def py(self, y):
        y = np.log10(y) if self.log_y else y
        return self.bottom - (y-self.y0)/(self.y1-self.y0)*(self.bottom-self.top)


def render_svg(
        series, kind='scatter', title='', xlabel='', ylabel='',
        log_x=False, log_y=False, vline=None, mark_minimum=None,
    ):
    """
    Render series as SVG markup.

    Parameters
    ----------
    series: Dictionary or list of dictionaries
        Each with 'x' and 'y' arrays, and optional 'label' and 'mode'
        ('markers', 'lines', or 'lines+markers').
    kind: String
        'scatter' (markers), 'line' (lines), or 'ucurve' (lines and
        markers, with the minimum of the first series marked).
    title, xlabel, ylabel: String
    log_x, log_y: Bool
        Logarithmic axes.
    vline: Tuple
        (x, label) of a dashed vertical marker, e.g., the critical depth.
    mark_minimum: Bool
        Mark the minimum of the first series (default for 'ucurve').

    Returns
    -------
    svg: String
    """
    if kind not in PLOT_KINDS:
        raise ValueError(
            f"Invalid plot kind: '{kind}', select from {list(PLOT_KINDS)}"
        )
    series = _as_series(series)
    if mark_minimum is None:
        mark_minimum = kind == 'ucurve'
    default_mode = {
        'scatter': 'markers',
        'line': 'lines',
        'ucurve': 'lines+markers',
    }[kind]

    all_x = np.concatenate([entry['x'] for entry in series])
    all_y = np.concatenate([entry['y'] for entry in series])
    extra_x = [] if vline is None else [vline[0]]
    frame = _Frame(
        _axis_range(all_x, log_x, extra_x),
        _axis_range(all_y, log_y),
        log_x, log_y,
    )
    x_lo = 10**frame.x0 if log_x else frame.x0
    x_hi = 10**frame.x1 if log_x else frame.x1
    y_lo = 10**frame.y0 if log_y else frame.y0
    y_hi = 10**frame.y1 if log_y else frame.y1

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{WIDTH/2:.2f}" y="22" text-anchor="middle" '
            f'font-size="15">{escape(title)}</text>'
        )

    # Axes and ticks
    left, right, top, bottom = frame.left, frame.right, frame.top, frame.bottom
    out.append(
        f'<rect x="{left}" y="{top}" width="{right-left}" '
        f'height="{bottom-top}" fill="none" stroke="black"/>'
    )
    for tick in nice_ticks(x_lo, x_hi, log_x):
        x = _fmt(frame.px(tick))
        out.append(
            f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom+5}" stroke="black"/>'
        )
        out.append(
            f'<text x="{x}" y="{bottom+18}" text-anchor="middle">'
            f'{escape(_tick_label(tick))}</text>'
        )
    for tick in nice_ticks(y_lo, y_hi, log_y):
        y = _fmt(frame.py(tick))
        out.append(
            f'<line x1="{left-5}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>'
        )
        out.append(
            f'<text x="{left-8}" y="{y}" text-anchor="end" '
            f'dominant-baseline="middle">{escape(_tick_label(tick))}</text>'
        )
    if xlabel:
        out.append(
            f'<text x="{(left+right)/2:.2f}" y="{HEIGHT-14}" '
            f'text-anchor="middle">{escape(xlabel)}</text>'
        )
    if ylabel:
        y_mid = (top + bottom) / 2
        out.append(
            f'<text x="18" y="{y_mid:.2f}" text-anchor="middle" '
            f'transform="rotate(-90 18 {y_mid:.2f})">{escape(ylabel)}</text>'
        )

    if vline is not None:
        x = _fmt(frame.px(vline[0]))
        out.append(
            f'<line x1="{x}" y1="{top}" x2="{x}" y2="{bottom}" '
            'stroke="gray" stroke-dasharray="6 4"/>'
        )
        if len(vline) > 1 and vline[1]:
            out.append(
                f'<text x="{x}" y="{top-6}" text-anchor="middle" '
                f'fill="gray">{escape(str(vline[1]))}</text>'
            )

    for i, entry in enumerate(series):
        color = COLOR_SEQUENCE[i % len(COLOR_SEQUENCE)]
        mode = entry['mode'] or default_mode
        points = [
            (frame.px(x), frame.py(y)) for x, y in zip(entry['x'], entry['y'])
        ]
        if 'lines' in mode and len(points) > 1:
            path = ' '.join(f'{_fmt(x)},{_fmt(y)}' for x, y in points)
            out.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" '
                'stroke-width="1.5"/>'
            )
        if 'markers' in mode or len(points) == 1:
            for x, y in points:
                out.append(
                    f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.5" '
                    f'fill="{color}"/>'
                )

    if mark_minimum:
        first = series[0]
        k = int(np.argmin(first['y']))
        x = _fmt(frame.px(first['x'][k]))
        y = _fmt(frame.py(first['y'][k]))
        out.append(
            f'<circle cx="{x}" cy="{y}" r="7" fill="none" stroke="red" '
            'stroke-width="2"/>'
        )
        out.append(
            f'<text x="{x}" y="{float(y)+20:.2f}" text-anchor="middle" '
            f'fill="red">min at {_tick_label(first["x"][k])}</text>'
        )

    # Legend
    for i, entry in enumerate(series):
        color = COLOR_SEQUENCE[i % len(COLOR_SEQUENCE)]
        y = top + 14 + 16*i
        out.append(
            f'<rect x="{right-150}" y="{y-8}" width="10" height="10" '
            f'fill="{color}"/>'
        )
        out.append(
            f'<text x="{right-135}" y="{y+1}">{escape(entry["label"])}</text>'
        )

    out.append('</svg>')
    return '\n'.join(out) + '\n'


def emit_plot(series, kind, path, **kwargs):
    """
    Write an SVG figure (see render_svg()) to a file.

    Examples
    --------
    >>> import archscale.plotly_io as plots
    >>> series = {'x': [2, 8, 16, 24], 'y': [3.69, 3.52, 3.44, 3.47], 'label': '512W'}
    >>> svg = plots.emit_plot(
    >>>     series, 'ucurve', 'ucurve.svg',
    >>>     xlabel='depth', ylabel='loss (nats)', vline=(15.2, 'D_crit'),
    >>> )
    """
    svg = render_svg(series, kind, **kwargs)
    with open(path, 'w') as f:
        f.write(svg)
    return svg
