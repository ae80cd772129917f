from .tensor import DTYPE, GradPair, Tensor, as_tensor, zeros
from .linear import linear_forward, linear_backward
from .conv import conv2d_forward, conv2d_backward
from .pool import avgpool2d_forward, avgpool2d_backward
from .norm import tnorm_forward, tnorm_backward
from .surrogate import SURROGATES, Surrogate, get_surrogate, surrogate_grad
