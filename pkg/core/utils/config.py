# The MIT License (MIT)
# Copyright © 2024 Burst SNN Contributors

# Permission is hereby granted, free of charge, to any person obtaining a copy of this software and associated
# documentation files (the “Software”), to deal in the Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the Software,
# and to permit persons to whom the Software is furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies or substantial portions of
# the Software.

# THE SOFTWARE IS PROVIDED “AS IS”, WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO
# THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
# THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION
# OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

import argparse
import os
import typing
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.protocol import NeuronKind, NeuronParams, TCurrentParams
from core.utils.logging import DEFAULT_EVENTS_RETENTION_SIZE, setup_events_logger
from core.utils.misc import atomic_write_text

SNAPSHOT_NAME = "config.resolved"


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class NeuronSection(Section):
    kind: NeuronKind = Field(NeuronKind.LIFB, description="Neuron model: lif, lifb, posneg or decoupled.")
    tau: float = Field(2.0, description="Membrane time constant.")
    v_th: float = Field(0.5, description="Firing threshold.")
    v_h: Optional[float] = Field(None, description="Burst threshold; empty means 2 * v_th.")
    v_rst: float = Field(0.0, description="Reset potential.")
    surrogate: str = Field("rectangular", description="Surrogate gradient: rectangular or sigmoid.")
    surrogate_width: float = Field(0.5, description="Surrogate half-width a.")
    kappa_policy: str = Field("learnable", description="Burst intensity policy: learnable or fixed.")
    kappa: float = Field(1.0, description="Initial (learnable) or frozen (fixed) burst intensity.")
    pair_threshold: Optional[float] = Field(None, description="Second threshold of decoupled pairs; empty means v_h.")

    @field_validator("kappa_policy")
    @classmethod
    def _check_policy(cls, value):
        if value not in ("learnable", "fixed"):
            raise ValueError(f"kappa_policy must be 'learnable' or 'fixed', got '{value}'")
        return value

    def params(self) -> NeuronParams:
        return NeuronParams(
            tau=self.tau,
            v_th=self.v_th,
            v_h=self.v_h,
            v_rst=self.v_rst,
            surrogate=self.surrogate,
            surrogate_width=self.surrogate_width,
        )


class NetSection(Section):
    arch: str = Field("mlp-snn", description="Architecture: snn6-small or mlp-snn.")
    steps: int = Field(2, ge=1, description="Simulation length T.")
    width_divisor: int = Field(8, ge=1, description="Channel divisor applied to the full SNN6 widths.")
    hidden: int = Field(64, ge=1, description="Hidden width of mlp-snn.")


class TrainSection(Section):
    seed: int = Field(0, description="Seed of initialization, shuffling and augmentation.")
    epochs: int = Field(10, ge=0, description="Training epochs.")
    batch_size: int = Field(64, ge=1, description="Mini-batch size.")
    lr: float = Field(0.1, ge=0.0, description="Weight learning rate.")
    kappa_lr: Optional[float] = Field(None, ge=0.0, description="Burst intensity learning rate; empty means lr.")
    momentum: float = Field(0.9, ge=0.0, lt=1.0, description="Weight momentum.")
    kappa_momentum: float = Field(0.9, ge=0.0, lt=1.0, description="Burst intensity momentum.")
    weight_decay: float = Field(0.0, ge=0.0, description="L2 decay on weights (never on kappa).")
    val_fraction: float = Field(0.2, gt=0.0, lt=1.0, description="Held-out fraction when no test files are given.")


class DataSection(Section):
    source: Optional[str] = Field(
        None, description="Dataset: gaussians, bars or idx; empty means bars for snn6-small, gaussians otherwise."
    )
    n: int = Field(200, ge=4, description="Synthetic sample count.")
    d: int = Field(2, ge=1, description="Dimension of the Gaussian task.")
    train_images: Optional[str] = Field(None, description="IDX training images.")
    train_labels: Optional[str] = Field(None, description="IDX training labels.")
    test_images: Optional[str] = Field(None, description="IDX test images.")
    test_labels: Optional[str] = Field(None, description="IDX test labels.")
    classes: Optional[int] = Field(None, description="Class count; empty means inferred from the labels.")
    limit: Optional[int] = Field(None, ge=1, description="Keep only the first N samples of every split.")
    crop_padding: int = Field(0, ge=0, description="Random crop padding (0 disables).")
    flip: bool = Field(False, description="Random horizontal flips.")

    @field_validator("source")
    @classmethod
    def _check_source(cls, value):
        if value is not None and value not in ("gaussians", "bars", "idx"):
            raise ValueError(f"data.source must be gaussians, bars or idx, got '{value}'")
        return value

    def resolved_source(self, arch: str) -> str:
        if self.source is not None:
            return self.source
        return "bars" if arch == "snn6-small" else "gaussians"


class CapacitySection(Section):
    t_max: int = Field(3, ge=1, description="Largest sequence length.")
    n: List[int] = Field(default_factory=lambda: [2, 3, 4], description="State counts, comma separated.")
    kappa: List[float] = Field(default_factory=list, description="Burst values used as extra states.")
    allow_large: bool = Field(False, description="Count cubes above the enumeration budget.")
    from_checkpoint: Optional[str] = Field(None, description="Take burst values from a trained checkpoint.")
    svg: bool = Field(True, description="Also write capacity.svg.")

    @field_validator("n", "kappa", mode="before")
    @classmethod
    def _split(cls, value):
        return _split_list(value)


class SimulateSection(Section):
    amplitude: float = Field(1.0, description="Step current amplitude.")
    onset: int = Field(0, ge=0, description="Step at which the current switches on.")
    dt: float = Field(0.05, gt=0.0, description="Euler step.")
    steps: int = Field(2000, ge=1, description="Integration steps.")
    g: float = Field(2.0, ge=0.0, description="T-current conductance.")
    v_T: Optional[float] = Field(None, description="T-current reversal potential; empty means 1.5 * v_th.")
    v_h: Optional[float] = Field(None, description="T-current gate threshold; empty means 0.1 * v_th.")
    tau_plus: float = Field(20.0, gt=0.0, description="Recovery time constant of h.")
    tau_minus: float = Field(5.0, gt=0.0, description="Decay time constant of h.")
    h0: float = Field(1.0, ge=0.0, le=1.0, description="Initial deactivation variable.")

    def tcurrent(self) -> TCurrentParams:
        return TCurrentParams(
            g=self.g, v_T=self.v_T, v_h=self.v_h, tau_plus=self.tau_plus, tau_minus=self.tau_minus, h0=self.h0
        )


class AblationSection(Section):
    seeds: int = Field(3, ge=1, description="Seeds per grid cell.")
    steps: List[int] = Field(default_factory=lambda: [1, 2, 4], description="Simulation lengths.")
    fixed_kappa: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0], description="Frozen burst intensities.")
    variants: List[str] = Field(
        default_factory=lambda: ["lif", "lifb", "posneg", "decoupled-scratch", "lifb-fixed"],
        description="Grid rows to train.",
    )

    @field_validator("steps", "fixed_kappa", "variants", mode="before")
    @classmethod
    def _split(cls, value):
        return _split_list(value)


class RasterSection(Section):
    neurons: int = Field(50, ge=1, description="Neurons sampled per layer.")
    samples: int = Field(1, ge=1, description="Evaluation samples forwarded to fill the neuron pool.")
    layers: List[int] = Field(default_factory=list, description="Spiking-layer indices; empty means all.")

    @field_validator("layers", mode="before")
    @classmethod
    def _split(cls, value):
        return _split_list(value)


class VerifySection(Section):
    samples: int = Field(64, ge=1, description="Random inputs of the equivalence check.")
    steps: List[int] = Field(default_factory=lambda: [1, 2, 4, 6], description="Simulation lengths checked.")
    against: Optional[str] = Field(None, description="Decoupled checkpoint to compare; empty means decouple on the fly.")

    @field_validator("steps", mode="before")
    @classmethod
    def _split(cls, value):
        return _split_list(value)


class RunSection(Section):
    out_dir: str = Field("runs/latest", description="Output directory.")
    checkpoint: Optional[str] = Field(None, description="Checkpoint to read.")


class LoggingSection(Section):
    debug: bool = Field(False, description="Log DEBUG records.")
    trace: bool = Field(False, description="Alias of debug.")
    events: bool = Field(True, description="Write EVENT records to events.log in the output directory.")
    events_retention_size: int = Field(DEFAULT_EVENTS_RETENTION_SIZE, ge=1, description="events.log rotation size.")


class RunConfig(Section):
    """
    Every knob of every subcommand.

    Resolution order: defaults, then the flat config file, then flags.
    """

    neuron: NeuronSection = Field(default_factory=NeuronSection)
    net: NetSection = Field(default_factory=NetSection)
    train: TrainSection = Field(default_factory=TrainSection)
    data: DataSection = Field(default_factory=DataSection)
    capacity: CapacitySection = Field(default_factory=CapacitySection)
    simulate: SimulateSection = Field(default_factory=SimulateSection)
    ablation: AblationSection = Field(default_factory=AblationSection)
    raster: RasterSection = Field(default_factory=RasterSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    run: RunSection = Field(default_factory=RunSection)
    logging: LoggingSection = Field(default_factory=LoggingSection)

    @classmethod
    def sections(cls) -> List[Tuple[str, type]]:
        return [(name, info.annotation) for name, info in cls.model_fields.items()]

    @classmethod
    def keys(cls) -> List[str]:
        return [f"{section}.{key}" for section, model in cls.sections() for key in model.model_fields]

    @classmethod
    def resolve(cls, values: Dict[str, Any]) -> "RunConfig":
        nested: Dict[str, Dict[str, Any]] = {}
        known = set(cls.keys())
        for dotted, value in values.items():
            if dotted not in known:
                raise ValueError(f"unknown configuration key '{dotted}'")
            section, key = dotted.split(".", 1)
            if value == "" and typing.get_origin(cls.model_fields[section].annotation.model_fields[key].annotation) is not list:
                value = None
            nested.setdefault(section, {})[key] = value
        return cls.model_validate(nested)

    def flat(self) -> Dict[str, Any]:
        values = {}
        for section, model in self.sections():
            for key in model.model_fields:
                values[f"{section}.{key}"] = getattr(getattr(self, section), key)
        return values

    def snapshot(self) -> str:
        lines = []
        for dotted, value in self.flat().items():
            lines.append(f"{dotted} = {format_value(value)}")
        return "\n".join(lines) + "\n"

    def write_snapshot(self, directory: str) -> str:
        path = os.path.join(directory, SNAPSHOT_NAME)
        atomic_write_text(path, self.snapshot())
        return path

    @property
    def kappa_lr(self) -> float:
        return self.train.lr if self.train.kappa_lr is None else self.train.kappa_lr


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, NeuronKind):
        return value.value
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config_file(path: str) -> Dict[str, str]:
    """
    Reads `section.key = value` lines; `#` starts a comment.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    values = {}
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{number}: expected 'section.key = value', got '{raw.rstrip()}'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return values


# Short flags and the dotted keys they set.
ALIASES = {
    "--arch": "net.arch",
    "--neuron": "neuron.kind",
    "--steps": "net.steps",
    "--seed": "train.seed",
    "--epochs": "train.epochs",
    "--checkpoint": "run.checkpoint",
    "--out": "run.out_dir",
    "--tmax": "capacity.t_max",
    "--n": "capacity.n",
    "--kappa": "capacity.kappa",
    "--from-checkpoint": "capacity.from_checkpoint",
}
SWITCHES = {
    "--allow-large": "capacity.allow_large",
    "--debug": "logging.debug",
}


def add_args(cls, parser: argparse.ArgumentParser):
    """
    Adds --config, one --section.key flag per configuration key and the short aliases.
    """
    parser.add_argument("--config", type=str, default=None, help="Flat section.key = value config file.")
    for section, model in RunConfig.sections():
        group = parser.add_argument_group(section)
        for key, info in model.model_fields.items():
            dotted = f"{section}.{key}"
            if info.annotation is bool:
                group.add_argument(
                    f"--{dotted}",
                    dest=dotted,
                    nargs="?",
                    const="true",
                    default=argparse.SUPPRESS,
                    help=info.description,
                )
            else:
                group.add_argument(f"--{dotted}", dest=dotted, type=str, default=argparse.SUPPRESS, help=info.description)
    for flag, dotted in ALIASES.items():
        parser.add_argument(flag, dest=dotted, type=str, default=argparse.SUPPRESS, help=f"Alias of --{dotted}.")
    for flag, dotted in SWITCHES.items():
        parser.add_argument(flag, dest=dotted, action="store_const", const="true", default=argparse.SUPPRESS, help=f"Sets {dotted}.")


def config(args: argparse.Namespace) -> RunConfig:
    """Resolves defaults, the --config file and dotted flags into a RunConfig."""
    values: Dict[str, Any] = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    values.update({key: value for key, value in vars(args).items() if "." in key})
    return RunConfig.resolve(values)


def check_config(config: RunConfig) -> str:
    """Creates the output directory and attaches the events logger; returns the directory."""
    full_path = os.path.abspath(os.path.expanduser(config.run.out_dir))
    os.makedirs(full_path, exist_ok=True)
    if config.logging.events:
        setup_events_logger(full_path, config.logging.events_retention_size)
    return full_path
