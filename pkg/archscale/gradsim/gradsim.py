# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

"""
Monte Carlo model of backward gradient flow through a stack of
residual blocks with random-matrix Jacobians J_k = I + (sigma/sqrt(W))*H_k.

The blocks carry no attention or MLP structure: the simulator checks
the random-matrix model of gradient persistence, not the behaviour of
trained transformers.
"""

__all__ = [
    'MODES',
    'METRICS',
    'DEFAULT_WORK_CAP',
    'SimConfig',
    'GradientProfile',
    'simulate',
    'simulate_matrix_product',
    'simulate_norm_recursion',
    'recursion_tau',
    'sweep_tau',
    'profiles_table',
    'write_profiles_csv',
]

import warnings

import numpy as np
from astropy.io import ascii
from astropy.table import Table

from ..fit import fit_exponential_decay
from ..model import PUBLISHED_PARAMS, d_crit


MODES = (
    'MatrixProduct',
    'NormRecursion',
)

METRICS = (
    'signal',
    'norm',
    'squared',
)

# Random draws (times W for dense Jacobians) per simulation
DEFAULT_WORK_CAP = 2e9

_mode_aliases = {
    'matrixproduct': 'MatrixProduct',
    'matrix': 'MatrixProduct',
    'normrecursion': 'NormRecursion',
    'recursion': 'NormRecursion',
}


def _normalize_mode(mode):
    key = str(mode).strip().lower().replace('_', '').replace('-', '')
    if key not in _mode_aliases:
        raise ValueError(f"Invalid simulation mode: '{mode}'")
    return _mode_aliases[key]


class SimConfig():
    """
    Settings of a gradient-flow simulation.

    Parameters
    ----------
    width: Integer
        Hidden dimension W (>= 2).
    depth: Integer
        Number of blocks D (>= 2).  Defaults to ceil(3*d_crit(W, params)),
        deep enough for the decay to be visible.
    sigma: Float
        Perturbation scale of the block Jacobians (>= 0).
    trials: Integer
        Monte Carlo repetitions (MatrixProduct only).
    rng_seed: Integer
        Master seed; trial i of width W draws from the stream
        (rng_seed, W, i).
    mode: String
        'MatrixProduct' or 'NormRecursion'.
    metric: String
        How MatrixProduct aggregates trials at each layer:
        'signal' mean alignment with the output-gradient direction,
        'norm' mean gradient norm, 'squared' root mean squared norm.
    dense: Bool
        Draw full W x W Jacobians instead of projecting each one onto
        the single gradient vector it multiplies.
    work_cap: Float
        Refuse simulations above this many random draws.
    params: ScalingLawParams
        Critical-depth law of the default depth, defaults to
        PUBLISHED_PARAMS.

    Examples
    --------
    >>> import archscale.gradsim as gs
    >>> config = gs.SimConfig(width=512)
    >>> print(config.depth)
    46
    """
    def __init__(
        self, width, depth=None, sigma=1.0, trials=64, rng_seed=42,
        mode='MatrixProduct', metric='signal', dense=False,
        work_cap=DEFAULT_WORK_CAP, params=None,
    ):
        self.width = int(width)
        if self.width < 2:
            raise ValueError(f'width must be >= 2, got {width}')
        self.depth_setting = None if depth is None else int(depth)
        self.sigma = float(sigma)
        self.trials = int(trials)
        self.rng_seed = int(rng_seed)
        self.mode = _normalize_mode(mode)
        self.metric = str(metric).strip().lower()
        self.dense = bool(dense)
        self.work_cap = float(work_cap)
        self.params = PUBLISHED_PARAMS if params is None else params

        if self.depth < 2:
            raise ValueError(f'depth must be >= 2, got {self.depth}')
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(
                f'sigma must be non-negative and finite, got {self.sigma}'
            )
        if self.trials < 1:
            raise ValueError(f'trials must be >= 1, got {self.trials}')
        if self.metric not in METRICS:
            raise ValueError(
                f"Invalid metric: '{metric}', select from {list(METRICS)}"
            )

    @property
    def depth(self):
        if self.depth_setting is None:
            return max(2, int(np.ceil(3.0*d_crit(self.width, self.params))))
        return self.depth_setting

    def work(self):
        """Number of random draws the MatrixProduct simulation takes"""
        per_layer = self.width**2 if self.dense else self.width
        return float(self.trials) * self.depth * per_layer

    def replace(self, **changes):
        settings = {
            'width': self.width,
            'depth': self.depth_setting,
            'sigma': self.sigma,
            'trials': self.trials,
            'rng_seed': self.rng_seed,
            'mode': self.mode,
            'metric': self.metric,
            'dense': self.dense,
            'work_cap': self.work_cap,
            'params': self.params,
        }
        unknown = set(changes) - set(settings)
        if unknown:
            raise ValueError(f'Invalid SimConfig settings: {sorted(unknown)}')
        settings.update(changes)
        return SimConfig(**settings)

    def __str__(self):
        return (
            f'{self.mode} simulation: W={self.width}, D={self.depth}, '
            f'sigma={self.sigma}, trials={self.trials}, '
            f'seed={self.rng_seed}, metric={self.metric}'
        )


class GradientProfile():
    """
    Per-layer gradient ratios ||grad_l|| / ||grad_D|| for layers
    l = 0, ..., D (ratios[D] = 1), with the extracted persistence
    length tau_hat.
    """
    def __init__(
        self, width, depth, ratios, stderr, tau_hat, trials, mode,
        metric, sigma, rng_seed,
    ):
        self.width = width
        self.depth = depth
        self.ratios = ratios
        self.stderr = stderr
        self.tau_hat = tau_hat
        self.trials = trials
        self.mode = mode
        self.metric = metric
        self.sigma = sigma
        self.rng_seed = rng_seed

    @property
    def layers(self):
        return np.arange(self.depth+1)

    def to_dict(self):
        return {
            'width': self.width,
            'depth': self.depth,
            'sigma': self.sigma,
            'trials': self.trials,
            'rng_seed': self.rng_seed,
            'mode': self.mode,
            'metric': self.metric,
            'tau_hat': self.tau_hat,
            'ratios': list(self.ratios),
            'stderr': list(self.stderr),
        }

    def __str__(self):
        return (
            f'{self.mode} profile (W={self.width}, D={self.depth}): '
            f'tau_hat = {self.tau_hat:.4g}, '
            f'ratio at layer 0 = {self.ratios[0]:.4g}'
        )


def _extract_tau(ratios, depth, label):
    layers = np.arange(depth+1)
    if np.any(ratios <= 0) or np.any(ratios > 1.0+1e-12):
        warnings.warn(
            f'{label}: gradient ratios are not in (0, 1], no persistence '
            'length can be extracted'
        )
        return np.nan
    return fit_exponential_decay(zip(layers, ratios), depth)


def simulate_matrix_product(config):
    """
    Propagate a unit random output gradient backwards through
    D transposed block Jacobians, g_l = J_{l+1}^T g_{l+1}, and aggregate
    the chosen metric over trials.

    Each Jacobian multiplies one vector once, so H_k^T g is drawn as
    N(0, ||g||^2/W * I) directly unless config.dense is set.

    Parameters
    ----------
    config: SimConfig

    Returns
    -------
    profile: GradientProfile

    Examples
    --------
    >>> import archscale.gradsim as gs
    >>> config = gs.SimConfig(width=512, depth=48)
    >>> profile = gs.simulate_matrix_product(config)
    >>> print(profile)
    """
    W = config.width
    D = config.depth
    work = config.work()
    if work > config.work_cap:
        raise ValueError(
            f'Simulation of {config.trials} trials x {D} layers x W={W} '
            f"({'dense' if config.dense else 'projected'}) needs "
            f'{work:.3g} random draws, above the work cap of '
            f'{config.work_cap:.3g}'
        )

    scale = config.sigma / np.sqrt(W)
    values = np.zeros((config.trials, D+1))
    for trial in range(config.trials):
        rng = np.random.default_rng([config.rng_seed, W, trial])
        grad = rng.standard_normal(W)
        grad /= np.linalg.norm(grad)
        direction = np.copy(grad)
        if not config.dense:
            noise = rng.standard_normal((D, W))
        for layer in range(D, -1, -1):
            if layer < D:
                if config.dense:
                    H = rng.standard_normal((W, W)) / np.sqrt(W)
                    grad = grad + scale * (H.T @ grad)
                else:
                    norm = np.linalg.norm(grad)
                    grad = grad + scale*norm/np.sqrt(W) * noise[layer]
            norm = np.linalg.norm(grad)
            if config.metric == 'signal':
                values[trial,layer] = (grad @ direction) / norm
            elif config.metric == 'norm':
                values[trial,layer] = norm
            else:
                values[trial,layer] = norm**2

    mean = np.mean(values, axis=0)
    if config.trials > 1:
        sem = np.std(values, axis=0, ddof=1) / np.sqrt(config.trials)
    else:
        sem = np.zeros(D+1)
    if config.metric == 'squared':
        aggregate = np.sqrt(mean)
        sem = sem / (2.0*aggregate)
    else:
        aggregate = mean
    ratios = aggregate / aggregate[D]
    stderr = sem / np.abs(aggregate[D])

    tau_hat = _extract_tau(ratios, D, f'W={W}')
    return GradientProfile(
        W, D, ratios, stderr, tau_hat, config.trials, config.mode,
        config.metric, config.sigma, config.rng_seed,
    )


def recursion_tau(width, sigma):
    """
    Exact persistence length of the norm recursion,
    -2/ln(1 - sigma**2/W), which approaches 2W/sigma**2 for
    small sigma**2/W.
    """
    width = np.asarray(width, dtype=float)
    factor = sigma**2 / width
    if np.any(factor >= 1):
        raise ValueError(
            f'sigma**2/W must be < 1 for a contracting recursion, got '
            f'{factor}'
        )
    with np.errstate(divide='ignore'):
        persistence = -2.0 / np.log1p(-factor)
    if np.ndim(persistence) == 0:
        return float(persistence)
    return persistence


def simulate_norm_recursion(config):
    """
    Deterministic mean-square recursion
    E||g_l||^2 = E||g_{l+1}||^2 (1 - sigma**2/W), i.e.,
    ratios[l] = (1 - sigma**2/W)**((D-l)/2).

    Parameters
    ----------
    config: SimConfig
        sigma**2/width must be < 1.

    Returns
    -------
    profile: GradientProfile

    Examples
    --------
    >>> import archscale.gradsim as gs
    >>> config = gs.SimConfig(width=512, depth=48, sigma=0.01, mode='NormRecursion')
    >>> profile = gs.simulate_norm_recursion(config)
    >>> print(f'{profile.tau_hat:.6g}')
    1.024e+07
    """
    W = config.width
    D = config.depth
    factor = config.sigma**2 / W
    if factor >= 1.0:
        raise ValueError(
            f'Norm recursion needs sigma**2/W < 1 (a contraction), got '
            f'sigma={config.sigma}, W={W}'
        )
    distance = D - np.arange(D+1)
    ratios = np.exp(0.5*distance*np.log1p(-factor))
    ratios[D] = 1.0
    tau_hat = _extract_tau(ratios, D, f'W={W}')
    return GradientProfile(
        W, D, ratios, np.zeros(D+1), tau_hat, config.trials, config.mode,
        config.metric, config.sigma, config.rng_seed,
    )


def simulate(config):
    """Run the simulation mode selected in config"""
    if config.mode == 'MatrixProduct':
        return simulate_matrix_product(config)
    return simulate_norm_recursion(config)


def sweep_tau(widths, config=None, return_profiles=False):
    """
    Simulate each width with the settings of a template config and
    extract its persistence length.

    Parameters
    ----------
    widths: Iterable of integers
        At least three distinct widths.
    config: SimConfig
        Template; its width is replaced per sweep point (and its depth
        too, unless set explicitly).  Defaults to SimConfig(width=widths[0]).
    return_profiles: Bool
        If True, also return the GradientProfile of each width.

    Returns
    -------
    curve: List of (width, tau_hat) pairs
        Ready for archscale.fit.fit_tau_models().

    Examples
    --------
    >>> import archscale.gradsim as gs
    >>> import archscale.fit as fit
    >>> template = gs.SimConfig(width=256, depth=48)
    >>> curve = gs.sweep_tau([256, 512, 1024, 1536], template)
    >>> fits = fit.fit_tau_models(curve)
    """
    widths = [int(width) for width in widths]
    if len(set(widths)) < 3:
        raise ValueError(
            f'A tau sweep needs at least 3 distinct widths, got {widths}'
        )
    if config is None:
        config = SimConfig(width=widths[0])

    curve = []
    profiles = []
    for width in widths:
        try:
            profile = simulate(config.replace(width=width))
        except ValueError as error:
            raise ValueError(f'Sweep failed at width {width}: {error}') from error
        curve.append((width, profile.tau_hat))
        profiles.append(profile)
    if return_profiles:
        return curve, profiles
    return curve


def profiles_table(profiles):
    """
    Long-format table of profiles with columns width, depth, layer,
    ratio (one row per layer).
    """
    if isinstance(profiles, GradientProfile):
        profiles = [profiles]
    rows = [
        (profile.width, profile.depth, layer, ratio)
        for profile in profiles
        for layer, ratio in zip(profile.layers, profile.ratios)
    ]
    names = ('width', 'depth', 'layer', 'ratio')
    if len(rows) == 0:
        return Table(names=names, dtype=(int, int, int, float))
    return Table(rows=rows, names=names, dtype=(int, int, int, float))


def write_profiles_csv(profiles, path):
    """Write profiles as CSV (see profiles_table())"""
    table = profiles_table(profiles)
    table['ratio'] = [repr(float(value)) for value in table['ratio']]
    ascii.write(table, path, format='csv', overwrite=True)
