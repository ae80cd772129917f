from .layer import BaseLayer
from .neuron import BaseNeuron, StepContext
