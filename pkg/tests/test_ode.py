import unittest

import numpy as np

from core.errors import IntegratorInstabilityError
from core.neurons import burst_signature, lifb_ode_simulate, step_current
from core.protocol import NeuronParams, TCurrentParams
from tests.helpers import ListHandler


def plain_lif_euler(current, params, dt):
    v, trace, spikes = params.v_rst, [], []
    for k, value in enumerate(current):
        v = v + dt * ((-v + value + 0.0) / params.tau)
        if v > params.v_th:
            spikes.append(k)
            v = params.v_rst
        trace.append(v)
    return np.array(trace), spikes


class ODETestCase(unittest.TestCase):

    def test_zero_conductance_is_plain_lif(self):
        params = NeuronParams()
        current = step_current(1.0, 800, onset=50)
        trace = lifb_ode_simulate(current, params, TCurrentParams(g=0.0), dt=0.05)
        expected_v, expected_spikes = plain_lif_euler(current, params, 0.05)
        np.testing.assert_array_equal(trace.v, expected_v)
        np.testing.assert_array_equal(trace.spike_steps, expected_spikes)

    def test_rest_without_current(self):
        trace = lifb_ode_simulate(np.zeros(500))
        self.assertEqual(len(trace.spike_steps), 0)
        np.testing.assert_array_equal(trace.v, 0.0)
        # h recovers toward 1 and is clamped there
        np.testing.assert_array_equal(trace.h, 1.0)

    def test_initial_burst_is_faster_than_steady_firing(self):
        trace = lifb_ode_simulate(step_current(1.0, 2000))
        signature = burst_signature(trace)
        self.assertLess(signature.initial_isi, signature.tail_isi)
        self.assertLess(signature.ratio, 0.7)
        self.assertLess(trace.h[-1], 0.05)

    def test_steady_firing_without_tcurrent_is_regular(self):
        trace = lifb_ode_simulate(step_current(1.0, 2000), tcurrent=TCurrentParams(g=0.0))
        signature = burst_signature(trace)
        self.assertLess(signature.tail_cv, 1e-9)
        self.assertAlmostEqual(signature.ratio, 1.0, places=9)

    def test_h_stays_in_unit_interval(self):
        trace = lifb_ode_simulate(step_current(3.0, 1500, onset=200), tcurrent=TCurrentParams(h0=0.5))
        self.assertTrue(((trace.h >= 0.0) & (trace.h <= 1.0)).all())

    def test_spike_times_are_one_based_steps(self):
        trace = lifb_ode_simulate(step_current(1.0, 400))
        np.testing.assert_allclose(trace.spike_times, (trace.spike_steps + 1) * 0.05)
        np.testing.assert_array_equal(trace.v[trace.spike_steps], 0.0)

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            lifb_ode_simulate(np.ones(10), dt=0.0)
        with self.assertRaises(ValueError):
            lifb_ode_simulate(np.ones(10), steps=0)
        with self.assertRaises(ValueError):
            lifb_ode_simulate(np.ones(10), steps=11)
        with self.assertRaises(ValueError):
            step_current(1.0, 0)

    def test_coarse_step_warns(self):
        with ListHandler() as handler:
            lifb_ode_simulate(np.ones(20), dt=0.5)
        self.assertTrue(any("forward Euler" in message for message in handler.messages()))

    def test_divergence_is_reported(self):
        with self.assertRaises(IntegratorInstabilityError):
            lifb_ode_simulate(step_current(-1e4, 50))

    def test_too_few_spikes_for_signature(self):
        with self.assertRaises(ValueError):
            burst_signature(lifb_ode_simulate(np.zeros(100)))

    def test_tcurrent_defaults_follow_threshold(self):
        resolved = TCurrentParams().resolve(0.5)
        self.assertEqual(resolved.v_T, 0.75)
        self.assertEqual(resolved.v_h, 0.05)
