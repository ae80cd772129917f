import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from core.engine.tensor import DTYPE, Tensor, as_tensor
from core.errors import IntegratorInstabilityError
from core.protocol import NeuronParams, TCurrentParams

logger = logging.getLogger("lifb")

# Forward-Euler integration of the T-current burst neuron:
#
#   tau dv/dt = -v + I + g * H(v - v_h) * h * (v_T - v)
#   dh/dt     = -h / tau_minus   while v > v_h
#             =  h / tau_plus    while v < v_h
#
# h is clamped to [0, 1]; v spikes and hard-resets on v > v_th.

DIVERGENCE_FACTOR = 1e3


@dataclass
class ODETrace:
    v: Tensor
    h: Tensor
    spike_steps: np.ndarray
    dt: float

    @property
    def spike_times(self) -> Tensor:
        return (self.spike_steps + 1) * self.dt

    @property
    def isi(self) -> Tensor:
        return np.diff(self.spike_times)


@dataclass
class BurstSignature:
    """ISI statistics separating the initial spike cluster from steady firing."""
    initial_isi: float
    tail_isi: float
    tail_cv: float
    spikes: int

    @property
    def ratio(self) -> float:
        return self.initial_isi / self.tail_isi if self.tail_isi > 0 else float("nan")


def step_current(amplitude: float, steps: int, onset: int = 0) -> Tensor:
    """Zero until `onset`, then `amplitude` for the remaining steps."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    current = np.zeros(steps, dtype=DTYPE)
    current[onset:] = amplitude
    return current


def lifb_ode_simulate(
    I_trace: Tensor,
    neuron: Optional[NeuronParams] = None,
    tcurrent: Optional[TCurrentParams] = None,
    dt: float = 0.05,
    steps: Optional[int] = None,
) -> ODETrace:
    """
    Integrates the original burst neuron for `steps` steps of size `dt`.

    `I_trace` holds one current value per step; `steps` defaults to its length.
    Returns the membrane and h traces after every step and the spike steps.
    """
    neuron = neuron or NeuronParams()
    tcurrent = (tcurrent or TCurrentParams()).resolve(neuron.v_th)
    I_trace = as_tensor(I_trace).reshape(-1)
    steps = len(I_trace) if steps is None else steps
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if steps > len(I_trace):
        raise ValueError(f"current trace has {len(I_trace)} samples but {steps} steps were requested")
    if dt > neuron.tau / 10.0:
        logger.warning(f"dt={dt} exceeds tau/10={neuron.tau / 10.0}; forward Euler may be inaccurate")

    v, h = neuron.v_rst, tcurrent.h0
    v_trace = np.empty(steps, dtype=DTYPE)
    h_trace = np.empty(steps, dtype=DTYPE)
    spikes: List[int] = []
    limit = DIVERGENCE_FACTOR * max(abs(neuron.v_th), 1e-12)

    for k in range(steps):
        gate = 1.0 if v > tcurrent.v_h else 0.0
        t_current = tcurrent.g * gate * h * (tcurrent.v_T - v)
        dv = (-v + I_trace[k] + t_current) / neuron.tau
        if v > tcurrent.v_h:
            dh = -h / tcurrent.tau_minus
        elif v < tcurrent.v_h:
            dh = h / tcurrent.tau_plus
        else:
            dh = 0.0
        v = v + dt * dv
        h = min(max(h + dt * dh, 0.0), 1.0)

        if not np.isfinite(v) or abs(v) > limit:
            raise IntegratorInstabilityError(f"membrane diverged to {v} at step {k} (dt={dt})")
        if v > neuron.v_th:
            spikes.append(k)
            v = neuron.v_rst
        v_trace[k] = v
        h_trace[k] = h

    return ODETrace(v=v_trace, h=h_trace, spike_steps=np.asarray(spikes, dtype=np.int64), dt=dt)


def burst_signature(trace: ODETrace, initial: int = 3) -> BurstSignature:
    """Mean of the first `initial` ISIs against the mean ISI over the last half of the run."""
    isi = trace.isi
    if len(isi) < initial + 2:
        raise ValueError(f"need at least {initial + 3} spikes for a burst signature, got {len(trace.spike_steps)}")
    half = len(trace.v) * trace.dt / 2.0
    tail = isi[trace.spike_times[1:] > half]
    if len(tail) == 0:
        tail = isi[len(isi) // 2:]
    tail_mean = float(np.mean(tail))
    tail_cv = float(np.std(tail) / tail_mean) if tail_mean > 0 else 0.0
    return BurstSignature(
        initial_isi=float(np.mean(isi[:initial])),
        tail_isi=tail_mean,
        tail_cv=tail_cv,
        spikes=len(trace.spike_steps),
    )
