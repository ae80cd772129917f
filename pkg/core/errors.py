"""Exceptions raised across the lifb package.

Input problems derive from ValueError, failures discovered while running
derive from RuntimeError, so callers can catch either family.
"""


class ShapeError(ValueError):
    """Tensor shapes do not conform."""


class IdxFormatError(ValueError):
    """An IDX file has a bad magic number, truncated payload or bad dimensions."""


class BudgetExceededError(ValueError):
    """Exact enumeration would exceed the configured labeling budget."""


class StructureMismatchError(ValueError):
    """Two networks that should share a structure do not."""


class CheckpointFormatError(ValueError):
    """A checkpoint file is malformed or from an unsupported version."""


class MissingContextError(RuntimeError):
    """A backward pass was requested without its forward context."""


class IntegratorInstabilityError(RuntimeError):
    """The ODE integrator diverged."""


class TrainingDivergedError(RuntimeError):
    """Loss or gradients became NaN/Inf during training."""
