# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'PUBLISHED_TAU_FITS',
    'fit_tau_models',
    'decay_length',
    'fit_exponential_decay',
]

import warnings

import numpy as np
from scipy.stats import linregress


# Published tau(W) fits over the baseline widths (constants, R^2)
PUBLISHED_TAU_FITS = {
    'power': (2.06, 0.44, 0.982),
    'log': (None, 0.595),
}


def _r_squared(observed, predicted):
    ss_res = np.sum((observed - predicted)**2)
    ss_tot = np.sum((observed - np.mean(observed))**2)
    if ss_tot == 0.0:
        return 0.0
    return float(1.0 - ss_res/ss_tot)


def fit_tau_models(curve):
    """
    Fit the two candidate persistence-length laws to a tau(W) curve:
    tau = c*W**a (linear regression in log-log space) and
    tau = c*ln(W) (least squares through the origin).

    Parameters
    ----------
    curve: Iterable of (width, tau) pairs
        At least three distinct widths, all tau positive and finite.

    Returns
    -------
    fits: Dictionary
        'power': (c, a, R^2) and 'log': (c, R^2), with both R^2
        evaluated in tau space.

    Examples
    --------
    >>> import numpy as np
    >>> import archscale.fit as fit
    >>> widths = np.array([256, 512, 1024, 1536])
    >>> curve = list(zip(widths, 2.06*widths**0.44))
    >>> fits = fit.fit_tau_models(curve)
    >>> print(fits['power'])
    (2.06, 0.44, 1.0)
    """
    curve = [(float(w), float(t)) for w, t in curve]
    if len(curve) == 0:
        raise ValueError('tau curve is empty')
    width, persistence = np.array(curve).T
    if len(np.unique(width)) < 3:
        raise ValueError(
            'Fitting tau(W) needs at least 3 distinct widths, got '
            f'{len(np.unique(width))}'
        )
    if np.any(width < 2):
        raise ValueError(f'Widths must be >= 2, got {width[width < 2]}')
    bad = ~np.isfinite(persistence) | (persistence <= 0)
    if np.any(bad):
        raise ValueError(
            f'tau values must be positive and finite, got {persistence[bad]} '
            f'at widths {width[bad]}'
        )

    log_w = np.log(width)
    regression = linregress(log_w, np.log(persistence))
    c_power = float(np.exp(regression.intercept))
    a_power = float(regression.slope)
    r2_power = _r_squared(persistence, c_power*width**a_power)

    c_log = float(np.sum(persistence*log_w) / np.sum(log_w**2))
    r2_log = _r_squared(persistence, c_log*log_w)

    return {
        'power': (c_power, a_power, r2_power),
        'log': (c_log, r2_log),
    }


def decay_length(layers, ratios, depth=None):
    """
    Least-squares slope through the origin of ln(ratio) against the
    distance to the output layer k = depth - layer, returning
    tau = -1/slope.

    Returns
    -------
    tau: Float
        The decay length; inf when no ratio departs from 1.
    saturated: Bool
        True when tau is infinite.
    """
    layers = np.asarray(layers, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    if depth is None:
        depth = np.amax(layers)
    distance = depth - layers
    log_ratio = np.log(ratios)
    slope = np.sum(distance*log_ratio) / np.sum(distance**2)
    if not slope < 0:
        return np.inf, True
    return float(-1.0/slope), False


def fit_exponential_decay(profile, depth=None):
    """
    Extract the gradient persistence length tau from a profile of
    gradient-norm ratios ||grad_l|| / ||grad_D|| by fitting
    ln(ratio) = -(D - l)/tau.

    Parameters
    ----------
    profile: Iterable of (layer, ratio) pairs
        Ratios in (0, 1], with ratio = 1 at the output layer.
    depth: Integer
        Output layer index D.  Defaults to the largest layer.

    Returns
    -------
    tau_hat: Float
        The fitted decay length, or inf (with a warning) when all
        ratios equal 1.

    Examples
    --------
    >>> import numpy as np
    >>> import archscale.fit as fit
    >>> layers = np.arange(49)
    >>> ratios = np.exp(-(48-layers)/20.0)
    >>> print(fit.fit_exponential_decay(zip(layers, ratios)))
    20.0
    """
    profile = [(float(layer), float(ratio)) for layer, ratio in profile]
    if len(profile) < 2:
        raise ValueError(
            f'Decay fit needs at least two layers, got {len(profile)}'
        )
    layers, ratios = np.array(profile).T
    if depth is None:
        depth = np.amax(layers)
    if np.any(layers > depth):
        raise ValueError(f'Layer indices must be <= depth ({depth})')

    # Ratios come from floating-point normalizations
    tolerance = 1e-12
    bad = ~np.isfinite(ratios) | (ratios <= 0) | (ratios > 1.0+tolerance)
    if np.any(bad):
        raise ValueError(
            f'Ratios must be in (0, 1], got {ratios[bad]} at layers '
            f'{layers[bad]}'
        )
    at_output = ratios[layers == depth]
    if len(at_output) == 0 or np.any(np.abs(at_output - 1.0) > tolerance):
        raise ValueError(f'Ratio at the output layer ({depth}) must be 1')
    if np.all(layers == depth):
        raise ValueError('Decay fit needs at least one layer below the output')

    tau_hat, saturated = decay_length(layers, np.minimum(ratios, 1.0), depth)
    if saturated:
        warnings.warn(
            'All gradient ratios equal 1; the persistence length is infinite'
        )
    return tau_hat
