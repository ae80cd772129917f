from core.engine.surrogate import SURROGATES, Rectangular, Sigmoid, Surrogate, get_surrogate, surrogate_grad
from .lif import LIFNeuron, lif_step
from .lifb import LIFBNeuron, lifb_backward, lifb_step
from .posneg import PosNegNeuron, posneg_step
from .ode import BurstSignature, ODETrace, burst_signature, lifb_ode_simulate, step_current
