# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

import pytest

import numpy as np

import archscale.fit as fit


widths = np.array([256, 512, 1024, 1536])


def test_fit_tau_models_power_law():
    curve = list(zip(widths, 2.06*widths**0.44))
    fits = fit.fit_tau_models(curve)
    c, a, r2 = fits['power']
    np.testing.assert_allclose(c, 2.06, rtol=1e-10)
    np.testing.assert_allclose(a, 0.44, rtol=1e-10)
    np.testing.assert_allclose(r2, 1.0)
    c_log, r2_log = fits['log']
    assert r2_log < r2


def test_fit_tau_models_log_law():
    curve = list(zip(widths, 2.43*np.log(widths)))
    fits = fit.fit_tau_models(curve)
    c_log, r2_log = fits['log']
    np.testing.assert_allclose(c_log, 2.43)
    np.testing.assert_allclose(r2_log, 1.0)


def test_fit_tau_models_too_few_widths():
    curve = [(256, 10.0), (512, 12.0), (512, 12.5)]
    with pytest.raises(ValueError, match='at least 3 distinct widths'):
        fit.fit_tau_models(curve)


def test_fit_tau_models_invalid_tau():
    curve = [(256, 10.0), (512, np.inf), (1024, 14.0)]
    with pytest.raises(ValueError, match='positive and finite'):
        fit.fit_tau_models(curve)


def test_fit_tau_models_small_width():
    curve = [(1, 10.0), (512, 12.0), (1024, 14.0)]
    with pytest.raises(ValueError, match='Widths must be >= 2'):
        fit.fit_tau_models(curve)


def test_fit_exponential_decay_exact():
    layers = np.arange(49)
    ratios = np.exp(-(48-layers)/20.0)
    tau_hat = fit.fit_exponential_decay(zip(layers, ratios))
    np.testing.assert_allclose(tau_hat, 20.0)


def test_fit_exponential_decay_noisy():
    rng = np.random.default_rng(42)
    layers = np.arange(49)
    ratios = np.exp(-(48-layers)/20.0) * (1.0 + 0.05*rng.standard_normal(49))
    ratios = np.minimum(ratios, 1.0)
    ratios[48] = 1.0
    tau_hat = fit.fit_exponential_decay(zip(layers, ratios))
    np.testing.assert_allclose(tau_hat, 20.0, rtol=0.1)


def test_fit_exponential_decay_explicit_depth():
    layers = np.arange(10, 31)
    ratios = np.exp(-(30-layers)/7.5)
    tau_hat = fit.fit_exponential_decay(zip(layers, ratios), depth=30)
    np.testing.assert_allclose(tau_hat, 7.5)


def test_fit_exponential_decay_saturated():
    profile = [(0, 1.0), (1, 1.0), (2, 1.0)]
    with pytest.warns(UserWarning, match='infinite'):
        tau_hat = fit.fit_exponential_decay(profile)
    assert tau_hat == np.inf


def test_fit_exponential_decay_ratio_above_one():
    profile = [(0, 1.2), (1, 0.9), (2, 1.0)]
    with pytest.raises(ValueError, match=r'Ratios must be in \(0, 1\]'):
        fit.fit_exponential_decay(profile)


def test_fit_exponential_decay_output_not_one():
    profile = [(0, 0.5), (1, 0.7), (2, 0.9)]
    with pytest.raises(ValueError, match='output layer'):
        fit.fit_exponential_decay(profile)


def test_fit_exponential_decay_single_point():
    with pytest.raises(ValueError, match='at least two layers'):
        fit.fit_exponential_decay([(0, 1.0)])


def test_decay_length():
    layers = np.arange(5)
    tau, saturated = fit.decay_length(layers, np.exp(-(4-layers)/2.0))
    np.testing.assert_allclose(tau, 2.0)
    assert not saturated
