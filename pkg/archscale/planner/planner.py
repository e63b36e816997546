# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'PUBLISHED_EXPONENTS',
    'PlanQuery',
    'PlanPoint',
    'PlanResult',
    'optimize_shape',
    'fit_scaling_exponents',
    'closed_form_exponents',
]

import warnings

import numpy as np
from astropy.io import ascii
from astropy.table import Table
from scipy.stats import linregress

from ..model import (
    CONTEXT,
    PUBLISHED_PARAMS,
    VOCAB,
    count_params_grid,
    d_crit,
    loss_terms,
)
from ..utils import format_text


# Boxed optimal-shape exponents: D* ~ C**0.12, W* ~ C**0.34
PUBLISHED_EXPONENTS = {
    'd_exp': 0.12,
    'w_exp': 0.34,
    'ratio': 2.83,
}

PREFERENCES = (
    'shallow',
    'deep',
)


class PlanQuery():
    """
    A compute-optimal shape search over a (depth, width) grid.

    Parameters
    ----------
    compute_budget: Float
        Training compute C in FLOPs; tokens follow from T = C/(6N).
    params: ScalingLawParams
        Defaults to PUBLISHED_PARAMS.
    depth_range: Integer pair
        Inclusive (min, max) depth.
    width_range: Integer pair
        Inclusive (min, max) width; only multiples of width_step in the
        range are searched.
    width_step: Integer
    vocab, context: Integer
        Vocabulary and positional-embedding sizes of the parameter count.
    prefer: String
        Representative among tied optima: 'shallow' (smallest depth,
        then smallest width) or 'deep' (largest depth, then smallest
        width).
    tie_rtol: Float
        Losses within tie_rtol*|min loss| of the minimum are ties.
    """
    def __init__(
        self, compute_budget, params=None, depth_range=(1, 256),
        width_range=(256, 32768), width_step=64, vocab=VOCAB,
        context=CONTEXT, prefer='shallow', tie_rtol=0.0,
    ):
        self.compute_budget = float(compute_budget)
        self.params = PUBLISHED_PARAMS if params is None else params
        self.depth_range = tuple(int(depth) for depth in depth_range)
        self.width_range = tuple(int(width) for width in width_range)
        self.width_step = int(width_step)
        self.vocab = int(vocab)
        self.context = int(context)
        self.prefer = str(prefer).lower()
        self.tie_rtol = float(tie_rtol)

        budget = self.compute_budget
        if not np.isfinite(budget) or budget <= 0:
            raise ValueError(f'compute_budget must be positive, got {budget}')
        if len(self.depth_range) != 2 or len(self.width_range) != 2:
            raise ValueError('depth_range and width_range must be (min, max) pairs')
        dmin, dmax = self.depth_range
        if dmin < 1 or dmax < dmin:
            raise ValueError(f'Invalid depth range: {self.depth_range}')
        wmin, wmax = self.width_range
        if wmin < 2 or wmax < wmin:
            raise ValueError(f'Invalid width range: {self.width_range}')
        if self.width_step < 1:
            raise ValueError(f'width_step must be >= 1, got {self.width_step}')
        if len(self.widths()) == 0:
            raise ValueError(
                f'No multiple of {self.width_step} in the width range '
                f'{self.width_range}'
            )
        if self.prefer not in PREFERENCES:
            raise ValueError(
                f"Invalid preference: '{prefer}', select from {list(PREFERENCES)}"
            )
        if not self.tie_rtol >= 0:
            raise ValueError(f'tie_rtol must be non-negative, got {tie_rtol}')

    def depths(self):
        return np.arange(self.depth_range[0], self.depth_range[1]+1)

    def widths(self):
        step = self.width_step
        wmin, wmax = self.width_range
        first = -(-wmin // step) * step
        return np.arange(first, wmax+1, step)

    def replace(self, **changes):
        settings = {
            'compute_budget': self.compute_budget,
            'params': self.params,
            'depth_range': self.depth_range,
            'width_range': self.width_range,
            'width_step': self.width_step,
            'vocab': self.vocab,
            'context': self.context,
            'prefer': self.prefer,
            'tie_rtol': self.tie_rtol,
        }
        unknown = set(changes) - set(settings)
        if unknown:
            raise ValueError(f'Invalid PlanQuery settings: {sorted(unknown)}')
        settings.update(changes)
        return PlanQuery(**settings)


class PlanPoint():
    """One grid shape with its budget-implied tokens and predicted loss"""
    def __init__(self, depth, width, n_params, tokens, predicted_loss):
        self.depth = int(depth)
        self.width = int(width)
        self.n_params = int(n_params)
        self.tokens = float(tokens)
        self.predicted_loss = float(predicted_loss)

    def as_dict(self):
        return {
            'depth': self.depth,
            'width': self.width,
            'n_params': self.n_params,
            'tokens': self.tokens,
            'predicted_loss': self.predicted_loss,
        }

    def __str__(self):
        return (
            f'{self.depth}L x {self.width}W: N = {self.n_params/1e6:.1f}M, '
            f'T = {self.tokens/1e9:.4g}B, loss = {self.predicted_loss:.4f}'
        )


class PlanResult():
    """
    Output of optimize_shape().

    Attributes
    ----------
    best: PlanPoint
        The selected grid optimum.
    frontier: List of PlanPoint
        Best width at each depth, in depth order.
    d_over_dcrit: Float
        best.depth / d_crit(best.width).
    compute: Float
        The budget.
    n_ties: Integer
        Number of grid points tied with the minimum.
    degenerate: Bool
        True when gamma = 0: the loss then depends on the shape only
        through N, so the optimal (D, W) is not unique.
    on_edge: Bool
        True when the optimum lies on the search-grid boundary.
    """
    def __init__(
        self, best, frontier, d_over_dcrit, compute, n_ties, degenerate,
        on_edge, query,
    ):
        self.best = best
        self.frontier = frontier
        self.d_over_dcrit = d_over_dcrit
        self.compute = compute
        self.n_ties = n_ties
        self.degenerate = degenerate
        self.on_edge = on_edge
        self.query = query

    @property
    def n_params(self):
        return self.best.n_params

    def frontier_table(self):
        """Frontier as a table with one row per depth"""
        names = ('depth', 'width', 'n_params', 'tokens', 'predicted_loss')
        rows = [
            tuple(point.as_dict()[name] for name in names)
            for point in self.frontier
        ]
        return Table(rows=rows, names=names, dtype=(int, int, int, float, float))

    def write_frontier_csv(self, path):
        """Write frontier_table() as CSV, floats in round-trip form"""
        table = self.frontier_table()
        for name in ['tokens', 'predicted_loss']:
            table[name] = [repr(float(value)) for value in table[name]]
        ascii.write(table, path, format='csv', overwrite=True)

    def to_dict(self):
        query = self.query
        return {
            'compute': self.compute,
            'best': self.best.as_dict(),
            'd_crit': self.best.depth / self.d_over_dcrit,
            'd_over_dcrit': self.d_over_dcrit,
            'n_ties': self.n_ties,
            'degenerate': self.degenerate,
            'on_edge': self.on_edge,
            'prefer': query.prefer,
            'tie_rtol': query.tie_rtol,
            'depth_range': list(query.depth_range),
            'width_range': list(query.width_range),
            'width_step': query.width_step,
            'params': query.params.as_dict(),
            'frontier': [point.as_dict() for point in self.frontier],
        }

    def text(self, format=None):
        lines = [
            f'Compute budget: C = {self.compute:.4g} FLOPs',
            f'Optimum: {self.best}',
            f'D/D_crit = {self.d_over_dcrit:.3f}',
        ]
        if self.n_ties > 1:
            lines.append(
                f'{self.n_ties} grid points tie with the minimum '
                f"(representative: prefer='{self.query.prefer}')"
            )
        if self.degenerate:
            lines.append(format_text(
                'gamma = 0: the loss depends on the shape only through N, '
                'the optimal (D, W) is not unique',
                warning=True, format=format,
            ))
        if self.on_edge:
            lines.append(format_text(
                'The optimum lies on the search-grid boundary',
                warning=True, format=format,
            ))
        return '\n'.join(lines)

    def __str__(self):
        return self.text()


def _loss_grid(query):
    depths = query.depths()
    widths = query.widths()
    D = depths[:,None]
    W = widths[None,:]
    n_params = count_params_grid(D, W, query.vocab, query.context)
    tokens = query.compute_budget / (6.0*n_params.astype(float))
    with np.errstate(over='ignore', invalid='ignore'):
        loss = loss_terms(
            D, W, tokens, query.params, query.vocab, query.context,
        )['loss']
    return depths, widths, n_params, tokens, loss


def optimize_shape(query):
    """
    Exhaustive grid search for the (depth, width) that minimizes the
    predicted loss at a fixed training compute, with the token count
    eliminated through C = 6NT.

    Parameters
    ----------
    query: PlanQuery

    Returns
    -------
    result: PlanResult

    Examples
    --------
    >>> import archscale.planner as plan
    >>> query = plan.PlanQuery(compute_budget=5.89e21)
    >>> result = plan.optimize_shape(query)
    >>> print(result)
    """
    depths, widths, n_params, tokens, loss = _loss_grid(query)
    finite = np.isfinite(loss)
    if not np.any(finite):
        raise ValueError(
            'Empty feasible grid: the predicted loss is not finite for any '
            f'shape at C = {query.compute_budget:.4g}'
        )
    loss = np.where(finite, loss, np.inf)
    min_loss = np.amin(loss)
    ties = np.argwhere(loss <= min_loss + query.tie_rtol*np.abs(min_loss))
    if query.prefer == 'shallow':
        i, j = ties[0]
    else:
        deepest = ties[ties[:,0] == np.amax(ties[:,0])]
        i, j = deepest[0]

    best = PlanPoint(
        depths[i], widths[j], n_params[i,j], tokens[i,j], loss[i,j],
    )
    frontier = []
    for k, depth in enumerate(depths):
        if not np.any(finite[k]):
            continue
        m = int(np.argmin(loss[k]))
        frontier.append(PlanPoint(
            depth, widths[m], n_params[k,m], tokens[k,m], loss[k,m],
        ))

    degenerate = query.params.gamma == 0.0
    on_edge = (
        i in (0, len(depths)-1) or
        j in (0, len(widths)-1)
    )
    if degenerate:
        warnings.warn(
            'gamma = 0: the predicted loss depends on the shape only '
            'through N, the optimal shape is not unique'
        )
    if on_edge:
        warnings.warn(
            f'Optimum {best.depth}L x {best.width}W lies on the search-grid '
            f'boundary (depths {query.depth_range}, widths {query.width_range})'
        )
    ratio = best.depth / d_crit(best.width, query.params)
    return PlanResult(
        best, frontier, float(ratio), query.compute_budget, len(ties),
        degenerate, bool(on_edge), query,
    )


def closed_form_exponents(alpha, delta):
    """
    Evaluate the printed closed-form optimal-shape exponents
        D* ~ C**(1/(2(1+alpha/delta)))
        W* ~ C**(1/(1+alpha/delta) - 1/(2(1+alpha/delta)))
    next to the boxed claim (0.12, 0.34).

    Parameters
    ----------
    alpha, delta: Float
        Capacity and data exponents (> 0).

    Returns
    -------
    exponents: Dictionary
        'd_exp', 'w_exp', 'ratio' from the printed forms;
        'n_exp' = delta/(alpha+delta), the compute exponent of the
        optimal parameter count; 'consistent' whether the printed forms
        reproduce the boxed exponents within 0.01; and the per-decade
        growth factors 10**exp of both, printed and boxed.

    Examples
    --------
    >>> import archscale.planner as plan
    >>> exps = plan.closed_form_exponents(0.076, 0.095)
    >>> print(f"{exps['d_exp']:.3f}, {exps['consistent']}")
    0.278, False
    """
    alpha = float(alpha)
    delta = float(delta)
    if not alpha > 0 or not delta > 0:
        raise ValueError(
            f'alpha and delta must be positive, got ({alpha}, {delta})'
        )
    shape = 1.0 / (1.0 + alpha/delta)
    d_exp = 0.5 * shape
    w_exp = shape - d_exp
    published = PUBLISHED_EXPONENTS
    consistent = (
        np.abs(d_exp - published['d_exp']) <= 0.01 and
        np.abs(w_exp - published['w_exp']) <= 0.01
    )
    return {
        'alpha': alpha,
        'delta': delta,
        'd_exp': d_exp,
        'w_exp': w_exp,
        'ratio': w_exp / d_exp,
        'n_exp': delta / (alpha + delta),
        'consistent': bool(consistent),
        'published': dict(published),
        'depth_growth_per_decade': 10.0**d_exp,
        'width_growth_per_decade': 10.0**w_exp,
        'published_depth_growth_per_decade': 10.0**published['d_exp'],
        'published_width_growth_per_decade': 10.0**published['w_exp'],
    }


def fit_scaling_exponents(budgets, params=None, query=None):
    """
    Optimize the shape at each compute budget and regress
    log D* and log W* on log C.

    Parameters
    ----------
    budgets: Iterable of floats
        At least four distinct budgets spanning two or more decades.
    params: ScalingLawParams
        Defaults to query.params (PUBLISHED_PARAMS without a query).
    query: PlanQuery
        Template for the grid settings; its budget is replaced.

    Returns
    -------
    exponents: Dictionary
        'd_exp', 'w_exp' (regression slopes), 'ratio' (w_exp/d_exp,
        None if d_exp = 0), 'd_r_squared', 'w_r_squared', the per-budget
        'optima', 'n_on_edge', the 'published' exponents, and the
        'closed_form' exponents at the params' (alpha, delta).

    Examples
    --------
    >>> import numpy as np
    >>> import archscale.planner as plan
    >>> exps = plan.fit_scaling_exponents(np.logspace(18, 22, 9))
    >>> print(exps['d_exp'], exps['w_exp'], exps['published'])
    """
    budgets = np.unique(np.asarray(budgets, dtype=float))
    if len(budgets) < 4:
        raise ValueError(
            f'Need at least 4 distinct budgets, got {len(budgets)}'
        )
    if np.any(budgets <= 0):
        raise ValueError('Compute budgets must be positive')
    decades = np.log10(budgets[-1] / budgets[0])
    if decades < 2.0:
        raise ValueError(
            f'Budgets must span at least two decades, got {decades:.2f}'
        )
    if query is None:
        query = PlanQuery(budgets[0], params=params)
    elif params is not None:
        query = query.replace(params=params)
    if query.params.gamma == 0.0:
        raise ValueError(
            'gamma = 0: the optimal shape at each budget is not unique '
            '(the loss depends only on N), so depth and width exponents '
            'are undefined'
        )

    optima = []
    n_on_edge = 0
    for budget in budgets:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            result = optimize_shape(query.replace(compute_budget=budget))
        n_on_edge += result.on_edge
        optima.append({
            'compute': float(budget),
            'on_edge': result.on_edge,
            'd_over_dcrit': result.d_over_dcrit,
            **result.best.as_dict(),
        })
    if n_on_edge > 0:
        warnings.warn(
            f'{n_on_edge} of {len(budgets)} optima lie on the search-grid '
            'boundary; their exponents reflect the grid limits'
        )

    alpha, delta = query.params.alpha, query.params.delta
    closed_form = None
    if alpha > 0 and delta > 0:
        closed_form = closed_form_exponents(alpha, delta)

    log_c = np.log(budgets)
    fit_d = linregress(log_c, np.log([opt['depth'] for opt in optima]))
    fit_w = linregress(log_c, np.log([opt['width'] for opt in optima]))
    d_exp = float(fit_d.slope)
    w_exp = float(fit_w.slope)
    return {
        'd_exp': d_exp,
        'w_exp': w_exp,
        'ratio': w_exp/d_exp if d_exp != 0 else None,
        'd_r_squared': float(fit_d.rvalue**2),
        'w_r_squared': float(fit_w.rvalue**2),
        'optima': optima,
        'n_on_edge': n_on_edge,
        'published': dict(PUBLISHED_EXPONENTS),
        'closed_form': closed_form,
    }
