# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'ConvergenceError',
    'DEFAULT_FREE_PARAMS',
    'POWER_LAW_FREE_PARAMS',
    'INITIAL_VALUES',
    'LOG_PARAMS',
    'PUBLISHED_FIT',
    'KAPLAN_ALPHA',
    'FitConfig',
    'FitResult',
    'fit_scaling_law',
    'bootstrap_ci',
]

import multiprocessing as mp
import warnings

import numpy as np
import scipy.linalg as la

from ..model import (
    PARAM_NAMES,
    LossRecord,
    ScalingLawParams,
    count_params,
    normalize_form,
)
from ..utils import as_str, format_text
from .lm_solver import levenberg_marquardt


class ConvergenceError(RuntimeError):
    """A numerical fit did not converge"""


# With a single token budget (the baseline runs) delta is not
# identifiable, so it is held fixed by default.
DEFAULT_FREE_PARAMS = (
    'A',
    'alpha',
    'B',
    'gamma',
    'mu',
    'kappa',
)
# Under the power law the critical depth is set by tau_c, tau_a instead
POWER_LAW_FREE_PARAMS = (
    'A',
    'alpha',
    'B',
    'gamma',
    'mu',
    'tau_c',
    'tau_a',
)

INITIAL_VALUES = {
    'alpha': 0.2,
    'delta': 0.1,
    'gamma': 0.1,
    'mu': 0.3,
    'kappa': 2.5,
    'tau_c': 2.06,
    'tau_a': 0.44,
}

# Fitted in log space to keep them positive
LOG_PARAMS = (
    'A',
    'B',
    'gamma',
    'mu',
    'kappa',
    'tau_c',
)

# Published estimates (value, 95% interval) and goodness of fit
PUBLISHED_FIT = {
    'tau_a': (0.44, (0.38, 0.50)),
    'kappa': (2.43, (2.09, 2.77)),
    'alpha': (0.22, (-0.21, 0.65)),
    'gamma': (0.18, (0.05, 0.31)),
    'mu': (0.35, (0.12, 0.58)),
    'r_squared': 0.922,
    'rmse': 0.113,
}

# Capacity exponent used by the published compute-optimal derivation
KAPLAN_ALPHA = 0.076

# Seed-sequence stream tags
_START_STREAM = 0
_BOOTSTRAP_STREAM = 1

# Constants that only act on rows deeper than their D_crit.  Their
# bootstrap intervals use only the resamples where the penalty adds more
# than _ACTIVE_PENALTY nats to some row.
_SHAPE_PARAMS = ('mu', 'kappa', 'tau_c', 'tau_a')
_ACTIVE_PENALTY = 1e-6


class FitConfig():
    """
    Settings of fit_scaling_law() and bootstrap_ci().

    Parameters
    ----------
    max_iterations: Integer
        Levenberg-Marquardt iteration cap per start.
    residual_tolerance: Float
        Absolute objective and relative objective-reduction tolerance.
    param_tolerance: Float
        Relative parameter-step tolerance.
    initial_damping: Float
        Initial damping, relative to max(diag(J'J)).
    damping_up: Float
        Damping factor after a rejected step (> 1).
    damping_down: Float
        Damping factor after an accepted step (in (0, 1)).
    bootstrap_resamples: Integer
        Number of row-resampled refits (>= 100 for bootstrap_ci()).
    rng_seed: Integer
        Seed of the multi-start jitter and bootstrap streams.
    free_params: Iterable of strings
        Parameters to fit.  Defaults to DEFAULT_FREE_PARAMS (LogLaw) or
        POWER_LAW_FREE_PARAMS (PowerLaw) minus any name in fixed_params.
    fixed_params: Dictionary
        name: value of parameters held fixed.  Parameters neither free
        nor fixed are fixed at their INITIAL_VALUES.
    dcrit_form: String
        'LogLaw' (fits kappa) or 'PowerLaw' (fits tau_c, tau_a).
    n_starts: Integer
        Number of multi-start initializations (the first one unjittered).
    jitter: Float
        Standard deviation of the multi-start perturbation (relative).
    dcrit_scan: Iterable of floats
        Factors of the initial kappa (LogLaw) or tau_c (PowerLaw) that
        add one unjittered start each, to fit_scaling_law() and to every
        bootstrap refit.  The loss is flat in these constants over any
        range where no row crosses its critical depth.
    include_unknown_tokens: Bool
        If True, records without a token count are fit with a free
        loss offset per scale group in place of B/T**delta.
    fd_step: Float
        Relative step of the finite-difference Jacobian.
    ncpu: Integer
        Number of processes for the bootstrap refits.

    Examples
    --------
    >>> import archscale.fit as fit
    >>> # The flat-penalty variant gamma*max(0, D/Dc - 1):
    >>> config = fit.FitConfig(fixed_params={'mu': 0.0, 'delta': 0.1})
    >>> print(config.free_params)
    ('A', 'alpha', 'B', 'gamma', 'kappa')
    """
    def __init__(
        self, max_iterations=500, residual_tolerance=1e-10,
        param_tolerance=1e-8, initial_damping=1e-3, damping_up=10.0,
        damping_down=0.1, bootstrap_resamples=1000, rng_seed=42,
        free_params=None, fixed_params=None, dcrit_form='LogLaw',
        n_starts=5, jitter=0.1, include_unknown_tokens=False,
        fd_step=1e-6, ncpu=1, dcrit_scan=(0.8, 1.2, 1.6),
    ):
        self.max_iterations = int(max_iterations)
        self.residual_tolerance = float(residual_tolerance)
        self.param_tolerance = float(param_tolerance)
        self.initial_damping = float(initial_damping)
        self.damping_up = float(damping_up)
        self.damping_down = float(damping_down)
        self.bootstrap_resamples = int(bootstrap_resamples)
        self.rng_seed = int(rng_seed)
        self.dcrit_form = normalize_form(dcrit_form)
        self.n_starts = int(n_starts)
        self.jitter = float(jitter)
        self.include_unknown_tokens = bool(include_unknown_tokens)
        self.fd_step = float(fd_step)
        self.ncpu = int(ncpu)
        self.dcrit_scan = tuple(float(factor) for factor in dcrit_scan)

        if self.max_iterations < 1:
            raise ValueError(
                f'max_iterations must be >= 1, got {self.max_iterations}'
            )
        tolerances = {
            'residual_tolerance': self.residual_tolerance,
            'param_tolerance': self.param_tolerance,
            'initial_damping': self.initial_damping,
            'fd_step': self.fd_step,
        }
        for name, value in tolerances.items():
            if not value > 0:
                raise ValueError(f'{name} must be positive, got {value}')
        if not self.damping_up > 1.0:
            raise ValueError(f'damping_up must be > 1, got {self.damping_up}')
        if not 0.0 < self.damping_down < 1.0:
            raise ValueError(
                f'damping_down must be in (0, 1), got {self.damping_down}'
            )
        if self.bootstrap_resamples < 0:
            raise ValueError(
                'bootstrap_resamples must be non-negative, '
                f'got {self.bootstrap_resamples}'
            )
        if self.n_starts < 1:
            raise ValueError(f'n_starts must be >= 1, got {self.n_starts}')
        if self.jitter < 0:
            raise ValueError(f'jitter must be non-negative, got {self.jitter}')
        if self.ncpu < 1:
            raise ValueError(f'ncpu must be >= 1, got {self.ncpu}')
        for factor in self.dcrit_scan:
            if not (np.isfinite(factor) and factor > 0):
                raise ValueError(
                    f'dcrit_scan factors must be positive, got {factor}'
                )

        fixed = {} if fixed_params is None else dict(fixed_params)
        if free_params is None:
            if self.dcrit_form == 'LogLaw':
                defaults = DEFAULT_FREE_PARAMS
            else:
                defaults = POWER_LAW_FREE_PARAMS
            free = [name for name in defaults if name not in fixed]
        elif isinstance(free_params, str):
            free = [free_params]
        else:
            free = list(free_params)
        unknown = set(free).union(fixed) - set(PARAM_NAMES)
        if unknown:
            raise ValueError(f'Invalid parameter names: {sorted(unknown)}')
        overlap = set(free).intersection(fixed)
        if overlap:
            raise ValueError(
                f'Parameters cannot be both free and fixed: {sorted(overlap)}'
            )
        if len(free) == 0:
            raise ValueError('At least one parameter must be free')
        for name in PARAM_NAMES:
            if name in free or name in fixed:
                continue
            if name not in INITIAL_VALUES:
                raise ValueError(
                    f"Parameter '{name}' must be either free or fixed"
                )
            fixed[name] = INITIAL_VALUES[name]
        self.free_params = tuple(name for name in PARAM_NAMES if name in free)
        self.fixed_params = {
            name: float(fixed[name]) for name in PARAM_NAMES if name in fixed
        }

    def replace(self, **changes):
        """Return a copy with some settings replaced"""
        settings = {
            'max_iterations': self.max_iterations,
            'residual_tolerance': self.residual_tolerance,
            'param_tolerance': self.param_tolerance,
            'initial_damping': self.initial_damping,
            'damping_up': self.damping_up,
            'damping_down': self.damping_down,
            'bootstrap_resamples': self.bootstrap_resamples,
            'rng_seed': self.rng_seed,
            'free_params': self.free_params,
            'fixed_params': self.fixed_params,
            'dcrit_form': self.dcrit_form,
            'n_starts': self.n_starts,
            'jitter': self.jitter,
            'include_unknown_tokens': self.include_unknown_tokens,
            'fd_step': self.fd_step,
            'ncpu': self.ncpu,
            'dcrit_scan': self.dcrit_scan,
        }
        unknown = set(changes) - set(settings)
        if unknown:
            raise ValueError(f'Invalid FitConfig settings: {sorted(unknown)}')
        settings.update(changes)
        return FitConfig(**settings)

    def lm_kwargs(self):
        return {
            'max_iterations': self.max_iterations,
            'residual_tolerance': self.residual_tolerance,
            'param_tolerance': self.param_tolerance,
            'initial_damping': self.initial_damping,
            'damping_up': self.damping_up,
            'damping_down': self.damping_down,
            'fd_step': self.fd_step,
        }


class _FitProblem():
    """
    Residuals of the ansatz over a fixed set of records, as a function
    of the (transformed) free-parameter vector.
    """
    def __init__(self, records, config):
        self.config = config
        self.form = config.dcrit_form
        n_params = np.array([count_params(r.arch) for r in records], float)
        self.log_n = np.log(n_params)
        self.depth = np.array([r.depth for r in records], float)
        self.width = np.array([r.width for r in records], float)
        self.log_w = np.log(self.width)
        self.loss = np.array([r.loss for r in records], float)
        self.known = np.array([r.tokens is not None for r in records])
        self.log_t = np.array([
            np.log(r.tokens) if r.tokens is not None else 0.0
            for r in records
        ])

        self.groups = sorted(
            {r.scale_group for r in records if r.tokens is None},
        )
        self.group_index = np.array([
            self.groups.index(r.scale_group) if r.tokens is None else -1
            for r in records
        ])
        self.offset_names = tuple(f'offset_{group}' for group in self.groups)
        self.free = config.free_params + self.offset_names
        self.is_log = np.array([name in LOG_PARAMS for name in self.free])

    def subset(self, index):
        """A copy of the problem restricted to (resampled) rows"""
        sub = object.__new__(_FitProblem)
        sub.__dict__.update(self.__dict__)
        for name in ['log_n', 'depth', 'width', 'log_w', 'loss', 'known',
                     'log_t', 'group_index']:
            setattr(sub, name, getattr(self, name)[index])
        return sub

    def unpack(self, theta):
        values = dict(self.config.fixed_params)
        natural = np.where(self.is_log, np.exp(theta), theta)
        for name, value in zip(self.free, natural):
            values[name] = value
        return values

    def pack(self, values):
        theta = np.array([values[name] for name in self.free], float)
        return np.where(self.is_log, np.log(theta), theta)

    def predict(self, values, penalty=True):
        capacity = values['A'] * np.exp(-values['alpha']*self.log_n)
        data = np.where(
            self.known,
            values['B'] * np.exp(-values['delta']*self.log_t),
            0.0,
        )
        for i, name in enumerate(self.offset_names):
            data = data + np.where(self.group_index == i, values[name], 0.0)
        if not penalty:
            return capacity + data
        if self.form == 'LogLaw':
            dcrit = values['kappa'] * self.log_w
        else:
            dcrit = values['tau_c'] * np.exp(values['tau_a']*self.log_w)
        excess = np.maximum(0.0, (self.depth - dcrit)/dcrit)
        phi = values['gamma'] * np.exp(-values['mu']*self.log_w) * excess
        return capacity + data + phi

    def residuals(self, theta):
        with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
            return self.predict(self.unpack(theta)) - self.loss

    @property
    def dcrit_name(self):
        return 'kappa' if self.form == 'LogLaw' else 'tau_c'

    def penalty_active(self, values):
        """Whether the penalty adds more than _ACTIVE_PENALTY to some row"""
        phi = self.predict(values) - self.predict(values, penalty=False)
        return bool(np.amax(phi) > _ACTIVE_PENALTY)

    def initial_values(self, overrides=None):
        """
        Starting values: INITIAL_VALUES for exponents and penalty (with
        any overrides), A and B from a two-point solve on the smallest and
        largest rows with known tokens, offsets from the mean group
        residual.
        """
        config = self.config
        values = dict(INITIAL_VALUES)
        if overrides is not None:
            values.update(overrides)
        values.update(config.fixed_params)
        values['A'] = config.fixed_params.get('A', np.nan)
        values['B'] = config.fixed_params.get('B', np.nan)
        for name in self.offset_names:
            values[name] = 0.0

        # Penalty at the starting point, removed before the solve
        start = dict(values)
        start['A'] = start['B'] = 0.0
        target = self.loss - self.predict(start)

        free_a = 'A' in config.free_params
        free_b = 'B' in config.free_params
        known = np.where(self.known)[0]
        if len(known) == 0:
            if free_b or 'delta' in config.free_params:
                raise ValueError(
                    'B and delta cannot be fit without records with '
                    'known tokens'
                )
            known = np.arange(len(self.loss))
            values['B'] = config.fixed_params.get('B', 1.0)

        order = np.lexsort((self.width[known], self.depth[known], self.log_n[known]))
        rows = known[[order[0], order[-1]]]
        x = np.exp(-values['alpha']*self.log_n[rows])
        c = np.where(
            self.known[rows], np.exp(-values['delta']*self.log_t[rows]), 0.0,
        )
        y = target[rows]

        if free_a and free_b:
            system = np.array([x, c]).T
            try:
                values['A'], values['B'] = la.solve(system, y)
            except (la.LinAlgError, ValueError):
                pass
        elif free_a:
            values['A'] = np.mean((y - values['B']*c) / x)
        elif free_b:
            values['B'] = np.mean((y - values['A']*x) / c)

        positive = np.isfinite(values['A']) and values['A'] > 0
        positive &= np.isfinite(values['B']) and values['B'] > 0
        if not positive:
            # Split the mean loss evenly between both terms
            x_all = np.exp(-values['alpha']*self.log_n[known])
            c_all = np.exp(-values['delta']*self.log_t[known])
            half = 0.5*np.mean(target[known])
            if free_a or not values['A'] > 0:
                values['A'] = np.abs(half) / np.mean(x_all)
            if free_b or not values['B'] > 0:
                values['B'] = np.abs(half) / np.mean(c_all)

        if len(self.offset_names) > 0:
            base = self.predict(values)
            for i, name in enumerate(self.offset_names):
                group = self.group_index == i
                values[name] = np.mean(self.loss[group] - base[group])
        return values


class FitResult():
    """
    Output of fit_scaling_law().

    Attributes
    ----------
    params: ScalingLawParams
        Point estimates.
    offsets: Dictionary
        Per-scale-group loss offsets (only when unknown-token records
        were fit).
    r_squared: Float
        1 - SS_res/SS_tot (defined as 0 when SS_tot = 0).
    rmse: Float
        Root mean squared residual (nats).
    residuals: 1D float array
        Observed minus predicted loss, in record order.
    ci95: Dictionary
        name: (lo, hi) percentile bootstrap intervals (empty without
        bootstrap).
    converged: Bool
    iterations_used: Integer
    """
    def __init__(
        self, params, offsets, observed, predicted, converged,
        iterations_used, message, history, free_params, starts,
        ci95=None,
    ):
        self.params = params
        self.offsets = offsets
        self.observed = observed
        self.predicted = predicted
        self.residuals = observed - predicted
        self.converged = converged
        self.iterations_used = iterations_used
        self.message = message
        self.history = history
        self.free_params = free_params
        self.starts = starts
        self.ci95 = {} if ci95 is None else ci95

        self.ssr = float(np.sum(self.residuals**2))
        ss_tot = float(np.sum((observed - np.mean(observed))**2))
        if ss_tot == 0.0:
            self.r_squared = 0.0
        else:
            self.r_squared = 1.0 - self.ssr/ss_tot
        self.rmse = float(np.sqrt(self.ssr / len(observed)))

    @property
    def n_records(self):
        return len(self.observed)

    def estimates(self):
        """Point estimates of the free parameters (and offsets)"""
        values = self.params.as_dict()
        values.update(self.offsets)
        return {name: values[name] for name in self.free_params}

    def published_comparison(self):
        """
        Fitted values next to the published ones.  Parameters that were
        not fit are reported with a None estimate.
        """
        estimates = self.estimates()
        comparison = {}
        for name, published in PUBLISHED_FIT.items():
            if name in ('r_squared', 'rmse'):
                comparison[name] = {
                    'fitted': getattr(self, name),
                    'published': published,
                }
                continue
            value, (lo, hi) = published
            entry = {
                'fitted': estimates.get(name),
                'ci95': self.ci95.get(name),
                'published': value,
                'published_ci95': (lo, hi),
                'overlap': None,
            }
            if entry['ci95'] is not None:
                fit_lo, fit_hi = entry['ci95']
                entry['overlap'] = bool(fit_lo <= hi and lo <= fit_hi)
            comparison[name] = entry
        return comparison

    def to_dict(self):
        """
        JSON-ready dictionary (see docs/file_formats.qmd for the schema).
        """
        return {
            'params': self.params.as_dict(),
            'offsets': dict(self.offsets),
            'free_params': list(self.free_params),
            'r_squared': self.r_squared,
            'rmse': self.rmse,
            'ssr': self.ssr,
            'n_records': self.n_records,
            'observed': list(self.observed),
            'predicted': list(self.predicted),
            'residuals': list(self.residuals),
            'ci95': {
                name: [lo, hi] for name, (lo, hi) in self.ci95.items()
            },
            'converged': self.converged,
            'iterations_used': self.iterations_used,
            'message': self.message,
            'published_comparison': self.published_comparison(),
        }

    def text(self, format=None):
        """Human-readable fit report"""
        status = 'converged' if self.converged else 'DID NOT CONVERGE'
        lines = [
            f'Scaling-law fit over {self.n_records} records '
            f'({status}, {self.iterations_used} iterations)',
            f'R^2 = {self.r_squared:.4f}   RMSE = {self.rmse:.4f} nats',
            '',
            'param         estimate   95% CI                    '
            'published   published CI',
        ]
        values = self.params.as_dict()
        values.update(self.offsets)
        names = list(self.free_params) + [
            name for name in PARAM_NAMES if name not in self.free_params
        ]
        for name in names:
            value = values[name]
            ci = self.ci95.get(name)
            ci_text = '---' if ci is None else f'[{ci[0]:.4g}, {ci[1]:.4g}]'
            if name not in self.free_params:
                ci_text = '(fixed)'
            published = PUBLISHED_FIT.get(name)
            pub_value = as_str(None if published is None else published[0], '.3g', '---')
            pub_ci = '---' if published is None else f'[{published[1][0]}, {published[1][1]}]'
            line = (
                f'{name:13s} {value:<10.5g} {ci_text:25s} '
                f'{pub_value:11s} {pub_ci}'
            )
            disjoint = (
                ci is not None and published is not None and
                (ci[1] < published[1][0] or ci[0] > published[1][1])
            )
            lines.append(format_text(line, warning=disjoint, format=format))

        lines.append('')
        lines.append(
            f'Published goodness of fit: R^2 = {PUBLISHED_FIT["r_squared"]}, '
            f'RMSE = {PUBLISHED_FIT["rmse"]} nats (30 runs, token '
            'treatment unstated)'
        )
        if 'alpha' in self.free_params:
            lines.append(
                f'Note: the published alpha = 0.22 [-0.21, 0.65] straddles '
                f'zero and differs from the alpha = {KAPLAN_ALPHA} used by '
                'the published compute-optimal derivation.'
            )
        if not self.converged:
            lines.append(format_text(
                f'Warning: {self.message}', danger=True, format=format,
            ))
        return '\n'.join(lines)

    def __str__(self):
        return self.text()


def _as_records(records):
    records = list(records)
    for record in records:
        if not isinstance(record, LossRecord):
            raise ValueError(
                f'Expected LossRecord objects, got {type(record).__name__}'
            )
    return records


def _record_key(record):
    tokens = -1.0 if record.tokens is None else record.tokens
    return (record.depth, record.width, tokens, record.scale_group, record.loss)


def _build_problem(records, config):
    """
    Fit problem over the records in canonical (depth, width, tokens,
    group, loss) order, so the arithmetic does not depend on the input
    order.  problem.order[i] is the input index of row i.
    """
    records = _as_records(records)
    unknown = [r for r in records if r.tokens is None]
    if unknown and not config.include_unknown_tokens:
        raise ValueError(
            f'{len(unknown)} records have unknown token counts; select rows '
            'with known tokens or set include_unknown_tokens=True to fit '
            'them with per-group offsets'
        )
    order = sorted(range(len(records)), key=lambda i: _record_key(records[i]))
    problem = _FitProblem([records[i] for i in order], config)
    problem.order = np.array(order, dtype=int)
    n_free = len(problem.free)
    if len(records) < n_free + 1:
        raise ValueError(
            f'Need at least {n_free+1} records to fit {n_free} free '
            f'parameters, got {len(records)}'
        )
    return problem


def _start_points(problem, config):
    """
    Unjittered start, n_starts-1 seeded perturbations of it, and one
    unjittered start per dcrit_scan factor.
    """
    theta0 = problem.pack(problem.initial_values())
    scale = np.where(
        problem.is_log, 1.0, np.where(theta0 != 0, np.abs(theta0), 1.0),
    )
    starts = [theta0]
    for k in range(1, config.n_starts):
        seed = np.random.SeedSequence([config.rng_seed, _START_STREAM, k])
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(len(theta0))
        starts.append(theta0 + config.jitter*scale*z)

    name = problem.dcrit_name
    if name in problem.free:
        for factor in config.dcrit_scan:
            overrides = {name: factor*INITIAL_VALUES[name]}
            starts.append(problem.pack(problem.initial_values(overrides)))
    return starts


def _improves(lm, best, tolerance):
    """
    Whether a later start replaces the current best: a converged start
    wins over a non-converged one, else its objective must be lower by
    more than tolerance.
    """
    if best is None:
        return True
    if lm.converged != best.converged:
        return lm.converged
    return lm.ssr < best.ssr - tolerance


def _best_fit(residual_func, starts, config):
    best = None
    summary = []
    for theta0 in starts:
        lm = levenberg_marquardt(residual_func, theta0, **config.lm_kwargs())
        summary.append((lm.ssr, lm.converged))
        if _improves(lm, best, config.residual_tolerance):
            best = lm
    return best, summary


def _make_result(problem, lm, starts_summary):
    values = problem.unpack(lm.theta)
    try:
        params = ScalingLawParams.from_dict({
            **values, 'dcrit_form': problem.form,
        })
    except ValueError as error:
        raise ConvergenceError(f'Fit reached invalid parameters: {error}')
    offsets = {name: float(values[name]) for name in problem.offset_names}
    # Back to input order
    observed = np.empty(len(problem.loss))
    predicted = np.empty(len(problem.loss))
    observed[problem.order] = problem.loss
    predicted[problem.order] = problem.predict(values)
    return FitResult(
        params=params,
        offsets=offsets,
        observed=observed,
        predicted=predicted,
        converged=lm.converged,
        iterations_used=lm.iterations,
        message=lm.message,
        history=lm.history,
        free_params=problem.free,
        starts=starts_summary,
    )


def fit_scaling_law(
        records, config=None, bootstrap=True, strict=False, start=None,
    ):
    """
    Least-squares fit of the loss ansatz to loss records with
    Levenberg-Marquardt, from multiple seeded starting points.

    Parameters
    ----------
    records: Iterable of LossRecord (or a Dataset)
        Records must have known tokens, unless
        config.include_unknown_tokens is True.  The result does not
        depend on their order.
    config: FitConfig
        Fit settings, defaults to FitConfig().
    bootstrap: Bool
        If True and config.bootstrap_resamples > 0, attach percentile
        bootstrap intervals (result.ci95).
    strict: Bool
        If True, raise ConvergenceError when the best start did not
        converge.
    start: Dictionary
        name: value of free parameters (and offsets) to start from, for
        instance a previous result.estimates().  Replaces the multi-start
        initialization; free parameters not given start at their
        default initial values.

    Returns
    -------
    result: FitResult

    Examples
    --------
    >>> import archscale.dataset as ds
    >>> import archscale.fit as fit
    >>> baseline = ds.load_bundled().select('Baseline')
    >>> result = fit.fit_scaling_law(baseline, bootstrap=False)
    >>> print(result)
    """
    if config is None:
        config = FitConfig()
    records = _as_records(records)
    problem = _build_problem(records, config)

    if start is None:
        starts = _start_points(problem, config)
    else:
        unknown = set(start) - set(problem.free)
        if unknown:
            raise ValueError(
                f'Start values given for non-free parameters: {sorted(unknown)}'
            )
        values = problem.initial_values()
        values.update(start)
        starts = [problem.pack(values)]

    best, summary = _best_fit(problem.residuals, starts, config)
    result = _make_result(problem, best, summary)
    if not result.converged:
        message = f'Scaling-law fit did not converge: {result.message}'
        if strict:
            raise ConvergenceError(message)
        warnings.warn(message)

    if bootstrap and config.bootstrap_resamples > 0:
        result.ci95 = bootstrap_ci(records, config, point=result)
    return result


def _bootstrap_refit(args):
    problem, starts, index, config = args
    sequence = np.random.SeedSequence(
        [config.rng_seed, _BOOTSTRAP_STREAM, index],
    )
    rng = np.random.default_rng(sequence)
    n = len(problem.loss)
    rows = rng.integers(0, n, size=n)
    sub = problem.subset(rows)
    lm, _ = _best_fit(sub.residuals, starts, config)
    if not lm.converged:
        return None
    values = sub.unpack(lm.theta)
    sample = np.array([values[name] for name in sub.free])
    return sample, sub.penalty_active(values)


def bootstrap_ci(records, config=None, point=None):
    """
    Percentile-method 95% intervals from row-resampled refits.

    Each resample draws its rows from a generator seeded by
    (rng_seed, resample index) and is refit from the point estimate and
    from the dcrit_scan starts, keeping the best one.  Results do not
    depend on record order, execution order, or config.ncpu.

    The intervals of mu, kappa, tau_c and tau_a only use the resamples
    whose fit puts some row past its critical depth; elsewhere the loss
    does not depend on them.

    Parameters
    ----------
    records: Iterable of LossRecord
    config: FitConfig
        bootstrap_resamples must be >= 100.
    point: FitResult
        Point estimate to start the refits from; fit if None.

    Returns
    -------
    ci95: Dictionary
        name: (lo, hi) for every free parameter (and offset).  Intervals
        are widened to contain the point estimate if needed.

    Raises
    ------
    ConvergenceError
        If more than half of the refits did not converge.
    """
    if config is None:
        config = FitConfig()
    if config.bootstrap_resamples < 100:
        raise ValueError(
            'bootstrap_resamples must be >= 100, got '
            f'{config.bootstrap_resamples}'
        )
    records = _as_records(records)
    problem = _build_problem(records, config)
    if point is None:
        point = fit_scaling_law(records, config, bootstrap=False)
    if not point.converged:
        raise ConvergenceError(
            f'Cannot bootstrap a non-converged fit: {point.message}'
        )
    estimates = point.estimates()
    starts = [problem.pack(estimates)]
    name = problem.dcrit_name
    if name in problem.free:
        for factor in config.dcrit_scan:
            scan = {**estimates, name: factor*INITIAL_VALUES[name]}
            starts.append(problem.pack(scan))

    n_resamples = config.bootstrap_resamples
    args = [(problem, starts, i, config) for i in range(n_resamples)]
    if config.ncpu > 1:
        with mp.get_context('fork').Pool(config.ncpu) as pool:
            refits = pool.map(_bootstrap_refit, args)
    else:
        refits = [_bootstrap_refit(arg) for arg in args]

    converged = [refit for refit in refits if refit is not None]
    n_failed = n_resamples - len(converged)
    if n_failed > 0.5*n_resamples:
        raise ConvergenceError(
            f'{n_failed} of {n_resamples} bootstrap refits did not converge'
        )
    if n_failed > 0:
        warnings.warn(
            f'{n_failed} of {n_resamples} bootstrap refits did not converge '
            'and were excluded'
        )

    samples = np.array([sample for sample, _ in converged])
    active = np.array([is_active for _, is_active in converged])
    shape = [name for name in problem.free if name in _SHAPE_PARAMS]
    if len(shape) > 0 and not np.any(active):
        warnings.warn(
            'No bootstrap refit puts a row past its critical depth; the '
            f'intervals of {shape} are the point estimates'
        )
    ci95 = {}
    for i, name in enumerate(problem.free):
        value = float(estimates[name])
        column = samples[:,i]
        if name in _SHAPE_PARAMS:
            column = column[active]
        if len(column) == 0:
            ci95[name] = (value, value)
            continue
        lo, hi = np.percentile(column, [2.5, 97.5])
        ci95[name] = (float(min(lo, value)), float(max(hi, value)))
    return ci95
