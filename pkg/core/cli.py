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
import logging
import os
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from core import __version__
from core.capacity.curve import CURVE_HEADER, capacity_curve, curve_rows
from core.datasets import LabeledDataset, load_idx, normalize_splits, split_dataset, synth_bars, synth_gaussians
from core.decouple.decoupler import decouple_network, decouple_scratch_baseline, has_burst_layers, verify_equivalence
from core.errors import IntegratorInstabilityError
from core.network.architectures import build_spec
from core.network.graph import NetworkGraph
from core.neurons.ode import burst_signature, lifb_ode_simulate, step_current
from core.protocol import NeuronKind
from core.training.ablation import RUNS_HEADER, ablation_suite
from core.training.checkpoint import load_checkpoint, restore_network, save_checkpoint
from core.training.metrics import burst_values
from core.training.trainer import METRICS_HEADER, evaluate, metric_rows, train
from core.utils.config import RunConfig, add_args, check_config, config as resolve_config
from core.utils.logging import log_event, setup_logging
from core.utils.misc import atomic_write_text, format_float, write_csv
from core.utils.svg import line_chart, raster_chart

logger = logging.getLogger("lifb")
console = Console()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError(message)


# ---- data ----


def load_data(config: RunConfig, arch: Optional[str] = None) -> Tuple[LabeledDataset, LabeledDataset]:
    """Training and evaluation splits, normalized with training statistics."""
    data, seed = config.data, config.train.seed
    source = data.resolved_source(arch or config.net.arch)
    if source == "idx":
        if not data.train_images or not data.train_labels:
            raise UsageError("data.source=idx needs data.train_images and data.train_labels")
        train_set = load_idx(data.train_images, data.train_labels, data.classes, "train")
        if data.test_images and data.test_labels:
            val_set = load_idx(data.test_images, data.test_labels, train_set.classes, "test")
        else:
            train_set, val_set = split_dataset(train_set, config.train.val_fraction, seed)
    else:
        full = synth_gaussians(data.n, data.d, seed) if source == "gaussians" else synth_bars(data.n, seed)
        train_set, val_set = split_dataset(full, config.train.val_fraction, seed)
    if data.limit:
        train_set, val_set = train_set.head(data.limit), val_set.head(data.limit)
    train_set, val_set = normalize_splits(train_set, val_set)
    return train_set, val_set


def build_network(config: RunConfig, dataset: LabeledDataset) -> NetworkGraph:
    kind = config.neuron.kind
    pair = {}
    if kind == NeuronKind.DECOUPLED and config.neuron.pair_threshold is not None:
        pair["pair_threshold"] = config.neuron.pair_threshold
    spec = build_spec(
        config.net.arch,
        dataset.sample_shape,
        dataset.classes,
        neuron=NeuronKind.LIFB if kind == NeuronKind.DECOUPLED else kind,
        params=config.neuron.params(),
        steps=config.net.steps,
        kappa_init=config.neuron.kappa,
        kappa_trainable=config.neuron.kappa_policy == "learnable",
        width_divisor=config.net.width_divisor,
        hidden=config.net.hidden,
        **pair,
    )
    if kind == NeuronKind.DECOUPLED:
        return decouple_scratch_baseline(spec, seed=config.train.seed)
    return NetworkGraph(spec, seed=config.train.seed)


def require_checkpoint(config: RunConfig) -> str:
    if not config.run.checkpoint:
        raise UsageError("this command needs --checkpoint")
    return config.run.checkpoint


# ---- reporting ----


def firing_table(title: str, firing, synops: Optional[float] = None) -> Table:
    table = Table(title=title)
    for column in ("layer", "rest", "regular", "burst"):
        table.add_column(column, justify="right" if column != "layer" else "left")
    for layer, fractions in firing.items():
        table.add_row(layer, *(f"{fractions[key]:.4f}" for key in ("rest", "regular", "burst")))
    if synops is not None:
        table.caption = f"synaptic ops per sample: {synops:.1f}"
    return table


def kappa_table(kappa) -> Table:
    table = Table(title="burst intensity")
    for column in ("layer", "min", "max", "mean", "std"):
        table.add_column(column)
    for layer, summary in kappa.items():
        table.add_row(layer, *(f"{value:.4f}" for value in (summary.min, summary.max, summary.mean, summary.std)))
    return table


# ---- commands ----


def cmd_train(config: RunConfig, out_dir: str) -> int:
    train_set, val_set = load_data(config)
    net = build_network(config, train_set)
    logger.info(f"training {net.spec.name} ({config.neuron.kind.value}, T={net.steps}, {net.parameter_count()} parameters)")
    for name, layer_type, count in net.summary():
        logger.debug(f"  {name:<12} {layer_type:<10} {count} parameters")
    result = train(net, train_set, config, val_set=val_set, out_dir=out_dir)
    write_csv(os.path.join(out_dir, "metrics.csv"), METRICS_HEADER, metric_rows(result.history))
    console.print(f"best {val_set.split} accuracy {result.best_accuracy:.4f} at epoch {result.best_epoch + 1}")
    if result.history:
        console.print(firing_table("firing (last epoch)", result.history[-1].firing))
    return EXIT_OK


def cmd_eval(config: RunConfig, out_dir: str) -> int:
    checkpoint = load_checkpoint(require_checkpoint(config))
    net = restore_network(checkpoint)
    _, val_set = load_data(config, net.spec.name)
    metrics = evaluate(net, val_set)
    rows = [
        [layer, repr(metrics.accuracy), repr(metrics.loss), repr(f["rest"]), repr(f["regular"]), repr(f["burst"]), repr(metrics.synops)]
        for layer, f in metrics.firing.items()
    ] or [["", repr(metrics.accuracy), repr(metrics.loss), "", "", "", repr(metrics.synops)]]
    write_csv(
        os.path.join(out_dir, "eval.csv"),
        ("layer", "accuracy", "loss", "rest", "regular", "burst", "synops"),
        rows,
    )
    console.print(f"{val_set.split}: accuracy {metrics.accuracy:.4f} loss {metrics.loss:.4f} over {metrics.samples} samples")
    console.print(firing_table("firing", metrics.firing, metrics.synops))
    if metrics.kappa:
        console.print(kappa_table(metrics.kappa))
    return EXIT_OK


def cmd_ablate(config: RunConfig, out_dir: str) -> int:
    train_set, val_set = load_data(config)
    report = ablation_suite(config, train_set, val_set)
    write_csv(os.path.join(out_dir, "ablation.csv"), report.header(), report.rows())
    write_csv(os.path.join(out_dir, "ablation_runs.csv"), RUNS_HEADER, report.run_rows())
    table = Table(title="ablation (accuracy %, mean±std)")
    for column in report.header():
        table.add_column(column)
    for row in report.rows():
        table.add_row(*(str(value) for value in row))
    console.print(table)
    return EXIT_OK


def checkpoint_kappa(path: str) -> List[float]:
    """Distinct burst values of a trained network, in layer and channel order."""
    net = restore_network(load_checkpoint(path))
    values: List[float] = []
    for layer in net.spiking_layers():
        burst = burst_values(layer)
        if burst is None:
            continue
        for value in burst.tolist():
            if value not in values and value not in (0.0, 1.0):
                values.append(value)
    if not values:
        logger.warning(f"{path} has no burst values distinct from 0 and 1; using integer states")
    return values


def cmd_capacity(config: RunConfig, out_dir: str) -> int:
    settings = config.capacity
    kappa = checkpoint_kappa(settings.from_checkpoint) if settings.from_checkpoint else list(settings.kappa)
    reports = capacity_curve(settings.t_max, settings.n, kappa, allow_large=settings.allow_large)
    write_csv(os.path.join(out_dir, "capacity.csv"), CURVE_HEADER, curve_rows(reports))
    skipped = [report for report in reports if report.exact_count is None]
    if skipped:
        logger.warning(f"{len(skipped)} cubes exceed the enumeration budget; pass --allow-large to count them exactly")
    if settings.svg:
        series = {}
        for n in settings.n:
            rows = [report for report in reports if report.n == n]
            series[f"bound n={n}"] = ([r.t for r in rows], [r.bound for r in rows])
            series[f"exact n={n}"] = ([r.t for r in rows], [r.exact_capacity if r.exact_capacity is not None else float("nan") for r in rows])
        atomic_write_text(os.path.join(out_dir, "capacity.svg"), line_chart(series, "information capacity", "t", "bits"))

    table = Table(title="information capacity (bits)")
    for column in ("t", "n", "exact count", "exact", "bound", "binomial", "satisfied"):
        table.add_column(column)
    for report in reports:
        table.add_row(
            str(report.t),
            str(report.n),
            "" if report.exact_count is None else str(report.exact_count),
            "" if report.exact_capacity is None else f"{report.exact_capacity:.4f}",
            f"{report.bound:.4f}",
            f"{report.binomial_bound:.4f}",
            "yes" if report.satisfied else "NO",
        )
    console.print(table)
    return EXIT_OK if all(report.satisfied for report in reports) else EXIT_RUNTIME


def cmd_simulate(config: RunConfig, out_dir: str) -> int:
    settings = config.simulate
    params = config.neuron.params()
    current = step_current(settings.amplitude, settings.steps, settings.onset)
    try:
        trace = lifb_ode_simulate(current, params, settings.tcurrent(), settings.dt, settings.steps)
    except IntegratorInstabilityError as err:
        raise IntegratorInstabilityError(f"{err}; reduce simulate.dt to at most tau/10 = {params.tau / 10}") from err

    spiked = np.zeros(settings.steps, dtype=np.int8)
    spiked[trace.spike_steps] = 1
    times = (np.arange(settings.steps) + 1) * settings.dt
    write_csv(
        os.path.join(out_dir, "trace.csv"),
        ("step", "time", "current", "v", "h", "spike"),
        (
            [step, format_float(times[step]), format_float(current[step]), format_float(trace.v[step]), format_float(trace.h[step]), int(spiked[step])]
            for step in range(settings.steps)
        ),
    )
    svg = line_chart(
        {"v": (times, trace.v), "h": (times, trace.h)},
        "burst neuron under a step current",
        "time",
        "v, h",
        markers={"spike": trace.spike_times},
    )
    atomic_write_text(os.path.join(out_dir, "trace.svg"), svg)

    console.print(f"{len(trace.spike_steps)} spikes over {settings.steps * settings.dt:g} time units")
    if len(trace.spike_steps) >= 5:
        signature = burst_signature(trace)
        write_csv(
            os.path.join(out_dir, "burst.csv"),
            ("spikes", "initial_isi", "tail_isi", "ratio", "tail_cv"),
            [[signature.spikes, format_float(signature.initial_isi), format_float(signature.tail_isi), format_float(signature.ratio), format_float(signature.tail_cv)]],
        )
        console.print(
            f"initial ISI {signature.initial_isi:.4f} | tail ISI {signature.tail_isi:.4f} | "
            f"ratio {signature.ratio:.3f} | tail CV {signature.tail_cv:.4f}"
        )
    return EXIT_OK


def cmd_decouple(config: RunConfig, out_dir: str) -> int:
    checkpoint = load_checkpoint(require_checkpoint(config))
    net = restore_network(checkpoint)
    if not has_burst_layers(net.spec):
        logger.warning(f"{config.run.checkpoint} has no LIFB layers; nothing written")
        log_event(f"decouple: {config.run.checkpoint} has no LIFB layers; nothing written")
        return EXIT_OK
    decoupled = decouple_network(net)
    path = os.path.join(out_dir, "decoupled.ckpt")
    save_checkpoint(path, decoupled, config=checkpoint.config, epoch=checkpoint.epoch, history=checkpoint.history)
    console.print(f"wrote {path} ({decoupled.threshold_units()} threshold units, was {net.threshold_units()})")
    return EXIT_OK


def cmd_verify(config: RunConfig, out_dir: str) -> int:
    net = restore_network(load_checkpoint(require_checkpoint(config)))
    if not has_burst_layers(net.spec):
        logger.warning(f"{config.run.checkpoint} has no LIFB layers; nothing to verify")
        log_event(f"verify: {config.run.checkpoint} has no LIFB layers; nothing to verify")
        return EXIT_OK
    settings = config.verify
    decoupled = restore_network(load_checkpoint(settings.against)) if settings.against else decouple_network(net)
    inputs = np.random.default_rng(config.train.seed).standard_normal((settings.samples,) + tuple(net.spec.input_shape))

    rows, passed = [], True
    table = Table(title="decoupling equivalence")
    for column in ("T", "max |logit deviation|", "worst layer deviation", "result"):
        table.add_column(column)
    for steps in settings.steps:
        report = verify_equivalence(net, decoupled, inputs, steps)
        worst = max(report.layer_deviation.values(), default=0.0)
        passed &= report.passed
        rows.append([steps, repr(report.max_logit_deviation), repr(worst), "pass" if report.passed else "fail"])
        table.add_row(str(steps), repr(report.max_logit_deviation), repr(worst), "pass" if report.passed else "FAIL")
    write_csv(os.path.join(out_dir, "verify.csv"), ("T", "max_logit_deviation", "max_layer_deviation", "result"), rows)
    console.print(table)
    return EXIT_OK if passed else EXIT_RUNTIME


def cmd_raster(config: RunConfig, out_dir: str) -> int:
    net = restore_network(load_checkpoint(require_checkpoint(config)))
    _, val_set = load_data(config, net.spec.name)
    settings = config.raster
    images = val_set.images[: settings.samples]
    forward_pass = net.eval().forward(images, keep_context=False)

    layers = forward_pass.raster.layers
    selection = settings.layers or list(range(len(layers)))
    for index in selection:
        if not 0 <= index < len(layers):
            raise ValueError(f"layer index {index} out of range; the network has {len(layers)} spiking layers")

    rng = np.random.default_rng(config.train.seed)
    rows, panels = [], []
    for index in selection:
        layer = layers[index]
        codes = layer.per_neuron()
        chosen = np.sort(rng.choice(codes.shape[0], size=min(settings.neurons, codes.shape[0]), replace=False))
        for neuron in chosen:
            rows.append([layer.name, layer.neuron.value, int(neuron)] + [int(code) for code in codes[neuron]])
        panels.append((f"{layer.name} ({layer.neuron.value})", codes[chosen]))

    header = ["layer", "neuron_model", "neuron"] + [f"t{step}" for step in range(forward_pass.steps)]
    write_csv(os.path.join(out_dir, "raster.csv"), header, rows)
    atomic_write_text(os.path.join(out_dir, "raster.svg"), raster_chart(panels, "neural activity"))
    console.print(f"wrote raster of {len(rows)} neurons across {len(selection)} layers")
    return EXIT_OK


COMMANDS = {
    "train": (cmd_train, "Train a network and write checkpoints plus metrics.csv."),
    "eval": (cmd_eval, "Evaluate a checkpoint: accuracy, firing statistics, burst intensities."),
    "ablate": (cmd_ablate, "Train the neuron-type x T ablation grid."),
    "capacity": (cmd_capacity, "Information-capacity bounds and exact threshold-function counts."),
    "simulate": (cmd_simulate, "Integrate the T-current burst neuron under a step current."),
    "decouple": (cmd_decouple, "Rewrite LIFB layers as pairs of binary threshold units."),
    "verify": (cmd_verify, "Check bit-exact equivalence of a network and its decoupled image."),
    "raster": (cmd_raster, "Export a spike raster of sampled neurons."),
}


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="lifb", description="Burst spiking neural networks.", allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    for name, (_, help_text) in COMMANDS.items():
        add_args(None, commands.add_parser(name, help=help_text, description=help_text, allow_abbrev=False))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"choose a command: {', '.join(COMMANDS)}")
        config = resolve_config(args)
    except UsageError as err:
        console.print(f"[red]usage error:[/red] {err}")
        return EXIT_USAGE
    except (ValidationError, ValueError, FileNotFoundError) as err:
        console.print(f"[red]configuration error:[/red] {err}")
        return EXIT_USAGE

    setup_logging("DEBUG" if config.logging.debug or config.logging.trace else "INFO")
    try:
        out_dir = check_config(config)
        config.write_snapshot(out_dir)
        handler, _ = COMMANDS[args.command]
        return handler(config, out_dir)
    except UsageError as err:
        console.print(f"[red]usage error:[/red] {err}")
        return EXIT_USAGE
    except Exception as err:
        logger.error(f"{args.command} failed: {type(err).__name__}: {err}")
        logger.debug("traceback", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
