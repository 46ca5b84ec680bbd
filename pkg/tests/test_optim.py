import math

import numpy as np
import pytest

from hrt import NumericError, OptimizerConfig, RmsPropState, Tensor, \
    optimizer_step


def test_zero_grad_zero_decay_is_fixed_point():
    p = Tensor(np.array([1.0, -2.0]), requires_grad=True)
    state = RmsPropState(OptimizerConfig(weight_decay=0.0))
    before = p.data.copy()
    for _ in range(5):
        optimizer_step(state, {"p": p}, {"p": np.zeros(2)})
    assert np.array_equal(p.data, before)


def test_zero_grad_with_decay_shrinks_params():
    lr, wd = 1e-3, 1e-2
    p = Tensor(np.array([1.0]), requires_grad=True)
    state = RmsPropState(OptimizerConfig(lr=lr, weight_decay=wd))
    expected = 1.0
    for _ in range(10):
        optimizer_step(state, {"p": p}, {"p": np.zeros(1)})
        expected *= (1.0 - lr * wd)
        assert p.data[0] == pytest.approx(expected, rel=1e-12)


def test_quadratic_trajectory_matches_loop_oracle():
    cfg = OptimizerConfig()  # lr 1e-3, momentum 0.9, rho 0.99, wd 1e-4
    p = Tensor(np.array([1.0]), requires_grad=True)
    state = RmsPropState(cfg)

    theta, acc, buf = 1.0, 0.0, 0.0
    for _ in range(10):
        g = 2.0 * p.data[0]
        optimizer_step(state, {"p": p}, {"p": np.array([g])})
        # independent recursion of the documented update equations
        g_o = 2.0 * theta
        acc = cfg.rho * acc + (1.0 - cfg.rho) * g_o * g_o
        eff = g_o / (math.sqrt(acc) + cfg.eps)
        buf = cfg.momentum * buf + eff
        theta = theta - cfg.lr * buf - cfg.lr * cfg.weight_decay * theta
        assert p.data[0] == pytest.approx(theta, rel=1e-12)


def test_nonfinite_gradient_aborts():
    p = Tensor(np.array([1.0]), requires_grad=True)
    state = RmsPropState(OptimizerConfig())
    with pytest.raises(NumericError, match="p"):
        optimizer_step(state, {"p": p}, {"p": np.array([np.nan])})


def test_accumulators_stay_nonnegative():
    p = Tensor(np.array([0.5, -0.5]), requires_grad=True)
    state = RmsPropState(OptimizerConfig())
    rng = np.random.default_rng(0)
    for _ in range(50):
        optimizer_step(state, {"p": p}, {"p": rng.normal(size=2)})
    assert np.all(state.square_avg["p"] >= 0)
