from .layers import AvgPoolLayer, ConvLayer, LinearLayer, SpikingLayer, TNormLayer, build_neuron
from .graph import ForwardPass, NetworkGraph
from .architectures import ARCHITECTURES, build_spec, mlp_snn, snn6_small
from .loss import cross_entropy_loss
