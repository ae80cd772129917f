import math
import unittest

import numpy as np
import pytest

from core.errors import MissingContextError, ShapeError
from core.network import NetworkGraph, build_spec, cross_entropy_loss, mlp_snn, snn6_small
from core.protocol import LayerKind, LayerSpec, NetworkSpec, NeuronKind, NeuronParams, RasterCode, SpikeRaster
from tests.helpers import numeric_grad, relative_error


def tiny_spec(neuron=NeuronKind.LIFB, steps=2, params=None, **neuron_options):
    return NetworkSpec(
        input_shape=(4,),
        classes=2,
        steps=steps,
        layers=[
            LayerSpec(kind=LayerKind.LINEAR, size=3),
            LayerSpec(kind=LayerKind.NEURON, neuron=neuron, params=params or NeuronParams(), **neuron_options),
            LayerSpec(kind=LayerKind.LINEAR, size=2),
        ],
    )


def randomize_kappa(net, rng, low=0.5, high=2.0):
    for layer in net.spiking_layers():
        if layer.kind == NeuronKind.LIFB:
            layer.kappa.value[...] = rng.uniform(low, high, layer.kappa.shape)


class ForwardTestCase(unittest.TestCase):

    def test_zero_input_and_biases_give_zero_logits(self):
        net = NetworkGraph(mlp_snn((6,), 3, hidden=8, steps=3), seed=1).eval()
        for name, pair in net.parameters().items():
            if name.endswith("bias"):
                pair.value[...] = 0.0
        result = net.forward(np.zeros((5, 6)))
        np.testing.assert_array_equal(result.logits, 0.0)
        for layer in result.raster.layers:
            self.assertFalse(layer.codes.any())

    def test_same_seed_is_bit_identical(self):
        spec = mlp_snn((6,), 3, hidden=8, steps=3)
        x = np.random.default_rng(0).normal(0.0, 3.0, (7, 6))
        first = NetworkGraph(spec, seed=5).forward(x).logits
        second = NetworkGraph(spec, seed=5).forward(x).logits
        np.testing.assert_array_equal(first, second)
        self.assertFalse(np.array_equal(first, NetworkGraph(spec, seed=6).forward(x).logits))

    def test_single_step_lif_is_one_feedforward_pass(self):
        net = NetworkGraph(tiny_spec(NeuronKind.LIF, steps=1), seed=2)
        x = np.random.default_rng(1).normal(0.0, 3.0, (9, 4))
        first, _, second = net.layers
        hidden = x @ first.weight.value.T + first.bias.value
        spikes = (0.5 * hidden > 0.5).astype(float)
        expected = spikes @ second.weight.value.T + second.bias.value
        np.testing.assert_allclose(net.forward(x).logits, expected, rtol=1e-12, atol=1e-12)

    def test_input_shape_mismatch(self):
        net = NetworkGraph(tiny_spec(), seed=0)
        with self.assertRaises(ShapeError):
            net.forward(np.zeros((2, 5)))

    def test_time_order_matters_only_through_neurons(self):
        rng = np.random.default_rng(3)
        currents = rng.normal(0.0, 3.0, (4, 6, 4))
        reversed_currents = currents[::-1].copy()

        stateless = NetworkGraph(
            NetworkSpec(
                input_shape=(4,),
                classes=2,
                steps=4,
                layers=[LayerSpec(kind=LayerKind.LINEAR, size=3), LayerSpec(kind=LayerKind.LINEAR, size=2)],
            ),
            seed=0,
        )
        np.testing.assert_allclose(
            stateless.forward_currents(currents).logits,
            stateless.forward_currents(reversed_currents).logits,
            rtol=1e-12,
            atol=1e-12,
        )

        stateful = NetworkGraph(tiny_spec(NeuronKind.LIF, steps=4), seed=0)
        self.assertFalse(
            np.allclose(
                stateful.forward_currents(currents).logits,
                stateful.forward_currents(reversed_currents).logits,
            )
        )

    def test_raster_codes_agree_with_emissions(self):
        rng = np.random.default_rng(4)
        net = NetworkGraph(mlp_snn((6,), 3, hidden=16, steps=4), seed=3).eval()
        randomize_kappa(net, rng)
        result = net.forward(rng.normal(0.0, 4.0, (10, 6)))
        for layer in result.raster.layers:
            emissions = result.emissions[layer.name]
            kappa = layer.kappa[np.newaxis, np.newaxis, :]
            np.testing.assert_array_equal(layer.codes == RasterCode.REGULAR, emissions == 1.0)
            np.testing.assert_array_equal(layer.codes == RasterCode.BURST, emissions == kappa)
        self.assertTrue((result.raster.layers[0].codes == RasterCode.BURST).any())

    def test_burst_code_only_in_burst_layers(self):
        rng = np.random.default_rng(5)
        x = rng.normal(0.0, 4.0, (10, 6))
        for neuron in (NeuronKind.LIF, NeuronKind.POSNEG):
            net = NetworkGraph(mlp_snn((6,), 3, neuron=neuron, hidden=16, steps=4), seed=3).eval()
            for layer in net.forward(x).raster.layers:
                self.assertFalse((layer.codes == RasterCode.BURST).any())

    def test_shard_rasters_merge_to_full_batch(self):
        rng = np.random.default_rng(8)
        net = NetworkGraph(mlp_snn((6,), 3, hidden=16, steps=3), seed=2).eval()
        randomize_kappa(net, rng)
        x = rng.normal(0.0, 4.0, (9, 6))
        full = net.forward(x, keep_context=False).raster
        shards = [net.forward(part, keep_context=False).raster for part in (x[:4], x[4:7], x[7:])]
        merged = SpikeRaster.merge(shards)
        self.assertEqual([layer.name for layer in merged.layers], [layer.name for layer in full.layers])
        for merged_layer, full_layer in zip(merged.layers, full.layers):
            np.testing.assert_array_equal(merged_layer.codes, full_layer.codes)
        self.assertEqual(SpikeRaster.merge([]).layers, [])

        fractions = merged.firing_fractions()
        for layer in merged.layers:
            stats = fractions[layer.name]
            self.assertAlmostEqual(stats["rest"] + stats["regular"] + stats["burst"], 1.0, places=12)
            expected = np.count_nonzero(layer.codes == RasterCode.BURST) / layer.codes.size
            self.assertEqual(stats["burst"], expected)

    def test_kappa_only_scales_its_own_bursts(self):
        rng = np.random.default_rng(6)
        net = NetworkGraph(mlp_snn((6,), 3, hidden=8, steps=4), seed=4).eval()
        layer = net.spiking_layers()[0]
        layer.kappa.value[...] = 0.8
        x = rng.normal(0.0, 4.0, (12, 6))
        before = net.forward(x)
        layer.kappa.value[0] = 1.6
        after = net.forward(x)

        codes_before = before.raster.layers[0].codes
        np.testing.assert_array_equal(codes_before, after.raster.layers[0].codes)
        emitted_before = before.emissions[layer.name]
        emitted_after = after.emissions[layer.name]
        np.testing.assert_array_equal(emitted_before[:, :, 1:], emitted_after[:, :, 1:])
        burst = codes_before[:, :, 0] == RasterCode.BURST
        self.assertTrue(burst.any())
        np.testing.assert_array_equal(emitted_after[:, :, 0][burst], 2.0 * emitted_before[:, :, 0][burst])
        np.testing.assert_array_equal(emitted_after[:, :, 0][~burst], emitted_before[:, :, 0][~burst])

    def test_snn6_small_shapes(self):
        spec = snn6_small((1, 8, 8), 10, steps=2)
        net = NetworkGraph(spec, seed=0).eval()
        self.assertEqual(net.shapes[-1], (10,))
        self.assertEqual(net.shapes[0], (8, 8, 8))
        result = net.forward(np.random.default_rng(0).standard_normal((2, 1, 8, 8)))
        self.assertEqual(result.logits.shape, (2, 10))
        self.assertEqual(len(result.raster.layers), 5)

    def test_unknown_architecture(self):
        with self.assertRaises(ValueError):
            build_spec("resnet", (4,), 2)
        with self.assertRaises(ValueError):
            build_spec("snn6-small", (4,), 2)


class BackwardTestCase(unittest.TestCase):

    def test_zero_grad_logits_give_zero_gradients(self):
        net = NetworkGraph(mlp_snn((6,), 3, hidden=8, steps=3), seed=0).train()
        result = net.forward(np.random.default_rng(0).normal(0.0, 3.0, (5, 6)))
        net.zero_grad()
        net.backward(result, np.zeros_like(result.logits))
        for name, pair in net.parameters().items():
            np.testing.assert_array_equal(pair.grad, 0.0, err_msg=name)

    def test_backward_needs_contexts(self):
        net = NetworkGraph(tiny_spec(), seed=0).eval()
        result = net.forward(np.ones((2, 4)))
        with self.assertRaises(MissingContextError):
            net.backward(result, np.ones((2, 2)))

    def test_gradients_accumulate(self):
        net = NetworkGraph(tiny_spec(), seed=0).train()
        x = np.random.default_rng(1).normal(0.0, 3.0, (4, 4))
        result = net.forward(x)
        net.backward(result, np.ones((4, 2)))
        once = {name: pair.grad.copy() for name, pair in net.parameters().items()}
        net.backward(result, np.ones((4, 2)))
        for name, pair in net.parameters().items():
            np.testing.assert_allclose(pair.grad, 2.0 * once[name])

    def test_parameter_counts(self):
        self.assertEqual(NetworkGraph(tiny_spec()).parameter_count(), 26)
        self.assertEqual(NetworkGraph(tiny_spec(NeuronKind.DECOUPLED)).parameter_count(), 29)
        self.assertEqual(NetworkGraph(tiny_spec(NeuronKind.LIF)).parameter_count(), 23)

    def test_threshold_units_and_fan_out(self):
        lifb = NetworkGraph(tiny_spec())
        decoupled = NetworkGraph(tiny_spec(NeuronKind.DECOUPLED))
        self.assertEqual(lifb.threshold_units(), 3)
        self.assertEqual(decoupled.threshold_units(), 6)
        self.assertEqual(lifb.fan_out(), {"1.neuron": 2})


def _screened_network(neuron, margin=1e-3):
    params = NeuronParams(surrogate="sigmoid")
    options = {"pair_trainable": True} if neuron == NeuronKind.DECOUPLED else {}
    critical = np.array([params.v_th, params.v_h, -params.v_th])
    for seed in range(200):
        rng = np.random.default_rng(seed)
        net = NetworkGraph(tiny_spec(neuron, steps=3, params=params, **options), rng=rng)
        randomize_kappa(net, rng)
        net.set_relaxed(True)
        x = rng.normal(0.0, 3.0, (6, 4))
        result = net.forward(x, keep_context=True)
        u = np.stack([step.u for step in result.ctxs[1].steps])
        if np.abs(u[..., None] - critical).min() > margin:
            return net, x, rng.integers(0, 2, 6)
    raise AssertionError("no screened network found")


@pytest.mark.parametrize("neuron", list(NeuronKind))
def test_relaxed_network_gradients(neuron):
    net, x, labels = _screened_network(neuron)

    def loss():
        return cross_entropy_loss(net.forward(x, keep_context=False).logits, labels)[0]

    result = net.forward(x, keep_context=True)
    _, grad_logits = cross_entropy_loss(result.logits, labels)
    net.zero_grad()
    net.backward(result, grad_logits)
    for name, pair in net.parameters().items():
        error = relative_error(pair.grad, numeric_grad(loss, pair.value))
        assert error < 1e-4, name


class CrossEntropyTestCase(unittest.TestCase):

    def test_uniform_logits(self):
        loss, _ = cross_entropy_loss(np.zeros((3, 5)), [0, 1, 4])
        self.assertAlmostEqual(loss, math.log(5), places=12)

    def test_confident_logits(self):
        loss, grad = cross_entropy_loss(np.array([[1000.0, 0.0, 0.0]]), [0])
        self.assertLess(loss, 1e-12)
        np.testing.assert_allclose(grad, 0.0, atol=1e-12)

    def test_gradient(self):
        rng = np.random.default_rng(0)
        logits = rng.standard_normal((4, 3))
        labels = [2, 0, 1, 1]
        _, grad = cross_entropy_loss(logits, labels)
        numeric = numeric_grad(lambda: cross_entropy_loss(logits, labels)[0], logits)
        self.assertLess(relative_error(grad, numeric), 1e-6)

    def test_label_out_of_range(self):
        with self.assertRaises(ValueError):
            cross_entropy_loss(np.zeros((2, 3)), [0, 3])
        with self.assertRaises(ShapeError):
            cross_entropy_loss(np.zeros((2, 3)), [0])
