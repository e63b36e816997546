# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

import warnings

import pytest

import numpy as np
from astropy.io import ascii

import archscale.model as m
import archscale.planner as plan


# Chinchilla-like capacity/data terms with a flat depth penalty
CHINCHILLA = m.ScalingLawParams(
    A=406.4, alpha=0.34, B=410.7, delta=0.28, gamma=1.0, mu=0.0,
)


def quiet_optimize(query):
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        return plan.optimize_shape(query)


def test_plan_query_defaults():
    query = plan.PlanQuery(5.89e21)
    assert query.depth_range == (1, 256)
    assert query.width_range == (256, 32768)
    assert query.width_step == 64
    assert query.prefer == 'shallow'
    assert query.tie_rtol == 0.0
    widths = query.widths()
    assert widths[0] == 256
    assert widths[-1] == 32768
    assert np.all(widths % 64 == 0)
    assert len(query.depths()) == 256


def test_plan_query_width_alignment():
    query = plan.PlanQuery(1e20, width_range=(300, 500), width_step=64)
    np.testing.assert_equal(query.widths(), [320, 384, 448])


@pytest.mark.parametrize(
    'kwargs, error',
    [
        ({'compute_budget': -1.0}, 'compute_budget must be positive'),
        ({'compute_budget': 1e20, 'depth_range': (0, 10)}, 'Invalid depth range'),
        ({'compute_budget': 1e20, 'width_range': (512, 256)}, 'Invalid width range'),
        ({'compute_budget': 1e20, 'width_range': (257, 300)}, 'No multiple of 64'),
        ({'compute_budget': 1e20, 'prefer': 'middle'}, "Invalid preference: 'middle'"),
        ({'compute_budget': 1e20, 'tie_rtol': -1e-3}, 'tie_rtol must be non-negative'),
    ],
)
def test_plan_query_invalid(kwargs, error):
    with pytest.raises(ValueError, match=error):
        plan.PlanQuery(**kwargs)


def test_optimize_shape_published_params_7b_budget():
    # Compute of the 32L x 4096W run at 143B tokens
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        result = plan.optimize_shape(plan.PlanQuery(5.89e21))
    assert not result.on_edge
    assert not result.degenerate
    assert 1 < result.best.depth < 256
    assert 256 < result.best.width < 32768
    assert 5e9 < result.best.n_params < 9e9
    assert 1e11 < result.best.tokens < 2e11
    assert 0.5 < result.d_over_dcrit <= 1.2


def test_optimize_shape_published_params_rides_critical_depth():
    query = plan.PlanQuery(5.89e21, prefer='deep', tie_rtol=1e-6)
    result = plan.optimize_shape(query)
    assert not result.on_edge
    assert result.n_ties > 1
    assert 0.9 < result.d_over_dcrit <= 1.0


@pytest.mark.parametrize('budget', [1e18, 7.36e20, 1e22])
def test_optimize_shape_published_params_more_compute_more_params(budget):
    small = plan.optimize_shape(plan.PlanQuery(budget))
    large = plan.optimize_shape(plan.PlanQuery(8*budget))
    assert not small.on_edge and not large.on_edge
    assert large.best.n_params > small.best.n_params
    assert large.best.tokens > small.best.tokens
    assert large.best.predicted_loss < small.best.predicted_loss


def test_optimize_shape_budget_identity():
    result = quiet_optimize(plan.PlanQuery(1e21, params=CHINCHILLA))
    best = result.best
    np.testing.assert_allclose(6.0*best.n_params*best.tokens, 1e21)
    assert best.n_params == m.count_params(m.Architecture(best.depth, best.width))
    expected = m.predict_loss(
        m.Architecture(best.depth, best.width), best.tokens, CHINCHILLA,
    )
    np.testing.assert_allclose(best.predicted_loss, expected)


def test_optimize_shape_rides_critical_depth():
    query = plan.PlanQuery(
        1e21, params=CHINCHILLA, prefer='deep', tie_rtol=1e-4,
    )
    result = quiet_optimize(query)
    assert not result.on_edge
    assert result.n_ties > 1
    assert 0.8 < result.d_over_dcrit <= 1.01


def test_optimize_shape_prefer_shallow_ties():
    deep = quiet_optimize(plan.PlanQuery(
        1e21, params=CHINCHILLA, prefer='deep', tie_rtol=1e-4,
    ))
    shallow = quiet_optimize(plan.PlanQuery(
        1e21, params=CHINCHILLA, prefer='shallow', tie_rtol=1e-4,
    ))
    assert shallow.n_ties == deep.n_ties
    assert shallow.best.depth < deep.best.depth


def test_optimize_shape_more_compute_more_params():
    small = quiet_optimize(plan.PlanQuery(1e20, params=CHINCHILLA))
    large = quiet_optimize(plan.PlanQuery(8e20, params=CHINCHILLA))
    assert large.best.n_params > small.best.n_params
    assert large.best.tokens > small.best.tokens


def test_optimize_shape_degenerate():
    params = CHINCHILLA.replace(gamma=0.0)
    with pytest.warns(UserWarning, match='not unique'):
        result = plan.optimize_shape(plan.PlanQuery(1e21, params=params))
    assert result.degenerate
    assert 'not unique' in result.text()


def test_optimize_shape_frontier():
    query = plan.PlanQuery(
        1e21, params=CHINCHILLA, depth_range=(1, 40), width_range=(256, 8192),
    )
    result = quiet_optimize(query)
    assert len(result.frontier) == 40
    assert [point.depth for point in result.frontier] == list(range(1, 41))
    losses = [point.predicted_loss for point in result.frontier]
    np.testing.assert_allclose(np.amin(losses), result.best.predicted_loss)


def test_plan_result_reports(tmp_path):
    query = plan.PlanQuery(
        1e21, params=CHINCHILLA, depth_range=(1, 40), width_range=(256, 8192),
    )
    result = quiet_optimize(query)
    report = result.to_dict()
    assert report['compute'] == 1e21
    assert report['best']['depth'] == result.best.depth
    assert report['depth_range'] == [1, 40]
    assert len(report['frontier']) == 40
    np.testing.assert_allclose(
        report['d_crit'], m.d_crit(result.best.width, CHINCHILLA),
    )

    table = result.frontier_table()
    assert table.colnames == ['depth', 'width', 'n_params', 'tokens', 'predicted_loss']
    path = tmp_path / 'frontier.csv'
    result.write_frontier_csv(str(path))
    saved = ascii.read(str(path), format='csv')
    assert len(saved) == 40
    np.testing.assert_equal(saved['width'], table['width'])
    np.testing.assert_equal(saved['predicted_loss'], table['predicted_loss'])

    text = result.text()
    assert text.startswith('Compute budget: C = 1e+21 FLOPs')
    assert 'D/D_crit' in text


def test_closed_form_exponents_printed_forms():
    exps = plan.closed_form_exponents(0.076, 0.095)
    np.testing.assert_allclose(exps['d_exp'], 1/(2*(1+0.076/0.095)))
    assert f"{exps['d_exp']:.3f}" == '0.278'
    np.testing.assert_allclose(exps['w_exp'], exps['d_exp'])
    np.testing.assert_allclose(exps['ratio'], 1.0)
    np.testing.assert_allclose(exps['n_exp'], 0.095/0.171)
    assert not exps['consistent']
    assert exps['published'] == {'d_exp': 0.12, 'w_exp': 0.34, 'ratio': 2.83}
    np.testing.assert_allclose(
        exps['published_depth_growth_per_decade'], 10**0.12,
    )


def test_closed_form_exponents_invalid():
    with pytest.raises(ValueError, match='must be positive'):
        plan.closed_form_exponents(0.0, 0.095)


def test_fit_scaling_exponents():
    query = plan.PlanQuery(1e19, params=CHINCHILLA, prefer='deep', tie_rtol=1e-4)
    exps = plan.fit_scaling_exponents(np.logspace(19, 23, 5), query=query)
    assert len(exps['optima']) == 5
    assert exps['d_exp'] > 0
    assert exps['w_exp'] > exps['d_exp']
    assert exps['ratio'] > 1
    assert exps['closed_form']['alpha'] == 0.34
    compute = [optimum['compute'] for optimum in exps['optima']]
    np.testing.assert_allclose(compute, np.logspace(19, 23, 5))


def test_fit_scaling_exponents_published_params():
    query = plan.PlanQuery(1e18, prefer='deep', tie_rtol=1e-6)
    exps = plan.fit_scaling_exponents(np.logspace(18, 22, 5), query=query)
    assert exps['n_on_edge'] == 0
    n_params = [optimum['n_params'] for optimum in exps['optima']]
    assert np.all(np.diff(n_params) > 0)
    ratios = [optimum['d_over_dcrit'] for optimum in exps['optima']]
    assert np.all(np.array(ratios) <= 1.0)
    assert exps['published'] == {'d_exp': 0.12, 'w_exp': 0.34, 'ratio': 2.83}


def test_fit_scaling_exponents_too_few_budgets():
    with pytest.raises(ValueError, match='at least 4 distinct budgets'):
        plan.fit_scaling_exponents([1e19, 1e20, 1e21, 1e21])


def test_fit_scaling_exponents_narrow_span():
    with pytest.raises(ValueError, match='two decades'):
        plan.fit_scaling_exponents([1e20, 2e20, 5e20, 9e20])


def test_fit_scaling_exponents_degenerate():
    with pytest.raises(ValueError, match='gamma = 0'):
        plan.fit_scaling_exponents(
            np.logspace(19, 22, 4), params=CHINCHILLA.replace(gamma=0.0),
        )


def test_write_frontier_csv_no_warnings(tmp_path):
    query = plan.PlanQuery(5.89e21, depth_range=(1, 40), width_range=(256, 8192))
    result = plan.optimize_shape(query)
    path = tmp_path / 'frontier.csv'
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        result.write_frontier_csv(str(path))
    saved = ascii.read(str(path), format='csv')
    assert saved.colnames == ['depth', 'width', 'n_params', 'tokens', 'predicted_loss']
    assert len(saved) == 40
    table = result.frontier_table()
    np.testing.assert_equal(saved['tokens'], table['tokens'])
    np.testing.assert_equal(saved['predicted_loss'], table['predicted_loss'])
