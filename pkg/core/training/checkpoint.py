import json
import logging
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from core import CHECKPOINT_FORMAT_VERSION
from core.engine.tensor import DTYPE, Tensor
from core.errors import CheckpointFormatError
from core.network.graph import NetworkGraph
from core.protocol import NetworkSpec
from core.utils.misc import atomic_write_bytes

logger = logging.getLogger("lifb")

# Checkpoint layout, little-endian throughout:
#
#   b"LIFB"                     magic
#   u32                         format version
#   u32 + bytes                 JSON header (spec, config, counters, history,
#                               optimizer hyperparameters, RNG state)
#   u32                         tensor record count
#   records:
#     u16 + bytes               UTF-8 name ("param/...", "buffer/...", "optim/...")
#     u8                        dtype code (1 = float64)
#     u8                        ndim
#     ndim * u32                dims
#     prod(dims) * 8 bytes      data, C order

MAGIC = b"LIFB"
DTYPE_CODES = {1: np.dtype("<f8")}
FLOAT64 = 1


@dataclass
class Checkpoint:
    spec: NetworkSpec
    tensors: Dict[str, Tensor]
    config: Dict[str, str] = field(default_factory=dict)
    epoch: int = 0
    step: int = 0
    history: List[Dict[str, Any]] = field(default_factory=list)
    optimizer: Dict[str, float] = field(default_factory=dict)
    rng_state: Optional[Dict[str, Any]] = None
    version: int = CHECKPOINT_FORMAT_VERSION

    def group(self, prefix: str) -> Dict[str, Tensor]:
        start = len(prefix) + 1
        return {name[start:]: value for name, value in self.tensors.items() if name.startswith(prefix + "/")}


def _encode_tensor(name: str, value: Tensor) -> bytes:
    encoded = name.encode("utf-8")
    array = np.ascontiguousarray(value, dtype="<f8")
    head = struct.pack("<H", len(encoded)) + encoded + struct.pack("<BB", FLOAT64, array.ndim)
    head += struct.pack(f"<{array.ndim}I", *array.shape)
    return head + array.tobytes()


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    header = {
        "spec": checkpoint.spec.model_dump(mode="json"),
        "config": checkpoint.config,
        "epoch": checkpoint.epoch,
        "step": checkpoint.step,
        "history": checkpoint.history,
        "optimizer": checkpoint.optimizer,
        "rng_state": checkpoint.rng_state,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<I", checkpoint.version), struct.pack("<I", len(header_bytes)), header_bytes]
    parts.append(struct.pack("<I", len(checkpoint.tensors)))
    for name, value in checkpoint.tensors.items():
        parts.append(_encode_tensor(name, value))
    return b"".join(parts)


class _Reader:

    def __init__(self, payload: bytes, source: str):
        self.payload, self.source, self.offset = payload, source, 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CheckpointFormatError(f"{self.source}: truncated at byte {self.offset} (need {size} more)")
        chunk = self.payload[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_checkpoint(payload: bytes, source: str = "<bytes>") -> Checkpoint:
    reader = _Reader(payload, source)
    if reader.take(4) != MAGIC:
        raise CheckpointFormatError(f"{source}: not a checkpoint (bad magic)")
    (version,) = reader.unpack("<I")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointFormatError(f"{source}: unsupported format version {version}, expected {CHECKPOINT_FORMAT_VERSION}")
    (header_len,) = reader.unpack("<I")
    try:
        header = json.loads(reader.take(header_len).decode("utf-8"))
        spec = NetworkSpec.model_validate(header["spec"])
    except (ValueError, KeyError) as err:
        raise CheckpointFormatError(f"{source}: unreadable header: {err}") from err

    tensors = {}
    (count,) = reader.unpack("<I")
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        code, ndim = reader.unpack("<BB")
        if code not in DTYPE_CODES:
            raise CheckpointFormatError(f"{source}: tensor '{name}' has unknown dtype code {code}")
        dims = reader.unpack(f"<{ndim}I") if ndim else ()
        dtype = DTYPE_CODES[code]
        size = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
        tensors[name] = np.frombuffer(reader.take(size), dtype=dtype).reshape(dims).astype(DTYPE)
    if reader.offset != len(payload):
        raise CheckpointFormatError(f"{source}: {len(payload) - reader.offset} trailing bytes")

    return Checkpoint(
        spec=spec,
        tensors=tensors,
        config=header.get("config", {}),
        epoch=header.get("epoch", 0),
        step=header.get("step", 0),
        history=header.get("history", []),
        optimizer=header.get("optimizer", {}),
        rng_state=header.get("rng_state"),
        version=version,
    )


def network_tensors(net: NetworkGraph) -> Dict[str, Tensor]:
    tensors = {f"param/{name}": pair.value for name, pair in net.parameters().items()}
    tensors.update({f"buffer/{name}": value for name, value in net.buffers().items()})
    return tensors


def save_checkpoint(
    path: str,
    net: NetworkGraph,
    optimizer=None,
    config: Optional[Dict[str, str]] = None,
    epoch: int = 0,
    history: Optional[List[Dict[str, Any]]] = None,
    rng: Optional[np.random.Generator] = None,
) -> Checkpoint:
    tensors = network_tensors(net)
    hyperparameters, step = {}, 0
    if optimizer is not None:
        hyperparameters = optimizer.hyperparameters()
        step = optimizer.state.steps
        tensors.update({f"optim/{name}": value for name, value in optimizer.state.buffers.items()})
    checkpoint = Checkpoint(
        spec=net.spec,
        tensors=tensors,
        config=config or {},
        epoch=epoch,
        step=step,
        history=history or [],
        optimizer=hyperparameters,
        rng_state=None if rng is None else rng.bit_generator.state,
    )
    atomic_write_bytes(path, encode_checkpoint(checkpoint))
    logger.debug(f"saved checkpoint {path} (epoch {epoch}, {len(tensors)} tensors)")
    return checkpoint


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, "rb") as handle:
        return decode_checkpoint(handle.read(), path)


def restore_network(checkpoint: Checkpoint) -> NetworkGraph:
    """Rebuilds the network of a checkpoint with every parameter and buffer loaded."""
    net = NetworkGraph(checkpoint.spec)
    params, buffers = checkpoint.group("param"), checkpoint.group("buffer")
    for name, pair in net.parameters().items():
        if name not in params:
            raise CheckpointFormatError(f"checkpoint lacks parameter '{name}'")
        if params[name].shape != pair.shape:
            raise CheckpointFormatError(f"parameter '{name}' has shape {params[name].shape}, network expects {pair.shape}")
        pair.value[...] = params[name]
    for name, buffer in net.buffers().items():
        if name not in buffers:
            raise CheckpointFormatError(f"checkpoint lacks buffer '{name}'")
        buffer[...] = buffers[name]
    return net
