import unittest

import numpy as np
import pytest

from core.engine import (
    GradPair,
    avgpool2d_backward,
    avgpool2d_forward,
    conv2d_backward,
    conv2d_forward,
    linear_backward,
    linear_forward,
    tnorm_backward,
    tnorm_forward,
)
from core.errors import MissingContextError, ShapeError
from tests.helpers import numeric_grad, relative_error


class LinearTestCase(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(0)
        self.x = rng.standard_normal((5, 4))
        self.w = rng.standard_normal((3, 4))
        self.b = rng.standard_normal(3)
        self.r = rng.standard_normal((5, 3))

    def loss(self):
        out, _ = linear_forward(self.x, self.w, self.b)
        return float((out * self.r).sum())

    def test_forward_matches_definition(self):
        out, _ = linear_forward(self.x, self.w, self.b)
        np.testing.assert_allclose(out, self.x @ self.w.T + self.b)

    def test_gradients_match_finite_differences(self):
        _, ctx = linear_forward(self.x, self.w, self.b)
        grad_x, grad_w, grad_b = linear_backward(ctx, self.r)
        self.assertLess(relative_error(grad_x, numeric_grad(self.loss, self.x)), 1e-5)
        self.assertLess(relative_error(grad_w, numeric_grad(self.loss, self.w)), 1e-5)
        self.assertLess(relative_error(grad_b, numeric_grad(self.loss, self.b)), 1e-5)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeError):
            linear_forward(self.x, self.w[:, :3], self.b)

    def test_missing_context(self):
        with self.assertRaises(MissingContextError):
            linear_backward(None, self.r)


class Conv2dTestCase(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(1)
        self.x = rng.standard_normal((2, 3, 5, 4))
        self.w = rng.standard_normal((2, 3, 3, 3))
        self.b = rng.standard_normal(2)
        self.r = rng.standard_normal((2, 2, 5, 4))

    def loss(self):
        out, _ = conv2d_forward(self.x, self.w, self.b, padding=1)
        return float((out * self.r).sum())

    def test_forward_matches_direct_sum(self):
        out, _ = conv2d_forward(self.x, self.w, self.b, padding=1)
        padded = np.pad(self.x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        n, o, i, j = 1, 1, 2, 3
        expected = (padded[n, :, i:i + 3, j:j + 3] * self.w[o]).sum() + self.b[o]
        self.assertAlmostEqual(out[n, o, i, j], expected, places=12)

    def test_gradients_match_finite_differences(self):
        _, ctx = conv2d_forward(self.x, self.w, self.b, padding=1)
        grad_x, grad_w, grad_b = conv2d_backward(ctx, self.r)
        self.assertLess(relative_error(grad_x, numeric_grad(self.loss, self.x)), 1e-5)
        self.assertLess(relative_error(grad_w, numeric_grad(self.loss, self.w)), 1e-5)
        self.assertLess(relative_error(grad_b, numeric_grad(self.loss, self.b)), 1e-5)

    def test_channel_mismatch(self):
        with self.assertRaises(ShapeError):
            conv2d_forward(self.x[:, :2], self.w, self.b)


class AvgPoolTestCase(unittest.TestCase):

    def test_forward_and_gradient(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((2, 2, 5, 4))
        r = rng.standard_normal((2, 2, 2, 2))
        out, ctx = avgpool2d_forward(x, 2)
        self.assertAlmostEqual(out[0, 0, 0, 0], x[0, 0, :2, :2].mean(), places=12)

        def loss():
            return float((avgpool2d_forward(x, 2)[0] * r).sum())

        grad = avgpool2d_backward(ctx, r)
        self.assertLess(relative_error(grad, numeric_grad(loss, x)), 1e-5)
        # the cropped trailing row receives nothing
        np.testing.assert_array_equal(grad[:, :, 4, :], 0.0)

    def test_too_small(self):
        with self.assertRaises(ShapeError):
            avgpool2d_forward(np.zeros((1, 1, 1, 1)), 2)


@pytest.mark.parametrize("training", [True, False])
def test_tnorm_gradients(training):
    rng = np.random.default_rng(3)
    x = rng.standard_normal((3, 4, 2, 3, 3))
    gamma = rng.uniform(0.5, 1.5, 2)
    beta = rng.standard_normal(2)
    r = rng.standard_normal(x.shape)
    mean, var = np.zeros(2), np.ones(2) * 1.7

    def loss():
        out, _ = tnorm_forward(x, gamma, beta, mean.copy(), var.copy(), training)
        return float((out * r).sum())

    _, ctx = tnorm_forward(x, gamma, beta, mean.copy(), var.copy(), training)
    grad_x, grad_gamma, grad_beta = tnorm_backward(ctx, r)
    assert relative_error(grad_x, numeric_grad(loss, x)) < 1e-5
    assert relative_error(grad_gamma, numeric_grad(loss, gamma)) < 1e-5
    assert relative_error(grad_beta, numeric_grad(loss, beta)) < 1e-5


def test_tnorm_updates_running_statistics_only_while_training():
    x = np.random.default_rng(4).standard_normal((2, 8, 3)) + 5.0
    mean, var = np.zeros(3), np.ones(3)
    tnorm_forward(x, np.ones(3), np.zeros(3), mean, var, training=False)
    np.testing.assert_array_equal(mean, 0.0)
    tnorm_forward(x, np.ones(3), np.zeros(3), mean, var, training=True, momentum=0.1)
    np.testing.assert_allclose(mean, 0.1 * x.mean(axis=(0, 1)))


def test_grad_pair_accumulates_and_resets():
    pair = GradPair(np.zeros(3))
    pair.accumulate(np.ones(3))
    pair.accumulate(np.ones(3))
    np.testing.assert_array_equal(pair.grad, 2.0)
    pair.zero_grad()
    np.testing.assert_array_equal(pair.grad, 0.0)
    with pytest.raises(ShapeError):
        pair.accumulate(np.ones(4))
