import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.capacity.bounds import capacity_bound_nstate
from core.datasets.dataset import LabeledDataset
from core.decouple.decoupler import decouple_scratch_baseline
from core.network.architectures import build_spec
from core.network.graph import NetworkGraph
from core.protocol import NeuronKind
from core.training.trainer import train
from core.utils.config import RunConfig
from core.utils.misc import format_float

logger = logging.getLogger("lifb")

# States per timestep of each neuron model, for the capacity columns.
STATES = {
    NeuronKind.LIF: 2,
    NeuronKind.DECOUPLED: 2,
    NeuronKind.LIFB: 3,
    NeuronKind.POSNEG: 3,
}


@dataclass(frozen=True)
class Variant:
    """One row of the ablation grid."""
    name: str
    neuron: NeuronKind
    kappa: float = 1.0
    kappa_trainable: bool = True
    scratch: bool = False


def expand_variants(names: List[str], fixed_kappa: List[float]) -> List[Variant]:
    variants = []
    for name in names:
        if name == "lif":
            variants.append(Variant("lif", NeuronKind.LIF))
        elif name == "lifb":
            variants.append(Variant("lifb", NeuronKind.LIFB))
        elif name == "posneg":
            variants.append(Variant("posneg", NeuronKind.POSNEG))
        elif name == "decoupled-scratch":
            variants.append(Variant("decoupled-scratch", NeuronKind.DECOUPLED, scratch=True))
        elif name == "lifb-fixed":
            for kappa in fixed_kappa:
                variants.append(Variant(f"lifb-fixed-{kappa:g}", NeuronKind.LIFB, kappa=kappa, kappa_trainable=False))
        else:
            raise ValueError(f"unknown ablation variant '{name}'")
    return variants


@dataclass
class AblationRun:
    variant: str
    steps: int
    seed: int
    accuracy: float
    loss: float


@dataclass
class AblationReport:
    variants: List[Variant]
    steps: List[int]
    runs: List[AblationRun] = field(default_factory=list)

    def accuracies(self, variant: str, steps: int) -> np.ndarray:
        return np.array([run.accuracy for run in self.runs if run.variant == variant and run.steps == steps])

    def cell(self, variant: str, steps: int) -> Tuple[float, float]:
        values = self.accuracies(variant, steps)
        return float(values.mean()), float(values.std())

    def header(self) -> List[str]:
        return (
            ["variant", "neuron", "kappa"]
            + [f"T={steps}" for steps in self.steps]
            + [f"capacity_T={steps}" for steps in self.steps]
        )

    def rows(self) -> List[list]:
        rows = []
        for variant in self.variants:
            cells = []
            for steps in self.steps:
                mean, std = self.cell(variant.name, steps)
                cells.append(f"{100 * mean:.2f}±{100 * std:.2f}")
            kappa = "learnable" if variant.kappa_trainable and variant.neuron == NeuronKind.LIFB else f"{variant.kappa:g}"
            if variant.neuron in (NeuronKind.LIF, NeuronKind.POSNEG):
                kappa = ""
            if variant.scratch:
                kappa = "learnable"
            capacity = [format_float(capacity_bound_nstate(steps, STATES[variant.neuron])) for steps in self.steps]
            rows.append([variant.name, variant.neuron.value, kappa] + cells + capacity)
        return rows

    def run_rows(self) -> List[list]:
        return [[run.variant, run.steps, run.seed, repr(run.accuracy), repr(run.loss)] for run in self.runs]


RUNS_HEADER = ("variant", "T", "seed", "accuracy", "loss")


def build_variant(variant: Variant, config: RunConfig, input_shape, classes: int, steps: int, seed: int) -> NetworkGraph:
    spec = build_spec(
        config.net.arch,
        input_shape,
        classes,
        neuron=NeuronKind.LIFB if variant.scratch else variant.neuron,
        params=config.neuron.params(),
        steps=steps,
        kappa_init=variant.kappa,
        kappa_trainable=variant.kappa_trainable,
        width_divisor=config.net.width_divisor,
        hidden=config.net.hidden,
    )
    if variant.scratch:
        return decouple_scratch_baseline(spec, seed=seed)
    return NetworkGraph(spec, seed=seed)


def ablation_suite(config: RunConfig, train_set: LabeledDataset, val_set: Optional[LabeledDataset] = None) -> AblationReport:
    """
    Trains every (variant, T, seed) cell of the grid and collects the best
    validation accuracy of each run.
    """
    variants = expand_variants(config.ablation.variants, config.ablation.fixed_kappa)
    report = AblationReport(variants=variants, steps=list(config.ablation.steps))
    for variant in variants:
        for steps in report.steps:
            for offset in range(config.ablation.seeds):
                seed = config.train.seed + offset
                run_config = config.model_copy(update={"train": config.train.model_copy(update={"seed": seed})})
                net = build_variant(variant, run_config, train_set.sample_shape, train_set.classes, steps, seed)
                result = train(net, train_set, run_config, val_set=val_set)
                evaluated = [record for record in result.history if record.split != "train"]
                best = evaluated[result.best_epoch] if result.best_epoch >= 0 else None
                report.runs.append(
                    AblationRun(
                        variant=variant.name,
                        steps=steps,
                        seed=seed,
                        accuracy=result.best_accuracy if best else 0.0,
                        loss=best.loss if best else float("nan"),
                    )
                )
                logger.info(f"ablation {variant.name} T={steps} seed={seed}: accuracy {report.runs[-1].accuracy:.4f}")
    return report
