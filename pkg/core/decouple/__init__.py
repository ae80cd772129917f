from .pair import DecoupledPairNeuron
