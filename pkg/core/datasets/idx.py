import gzip
import os
import struct
from typing import Optional

import numpy as np

from core.datasets.dataset import LabeledDataset
from core.errors import IdxFormatError
from core.utils.misc import atomic_write_bytes

# IDX layout (big-endian):
#   [0:2]  zero bytes
#   [2]    type code, 0x08 for unsigned bytes
#   [3]    number of dimensions
#   then one u32 per dimension, then the raw payload in C order.
#
# Image files are 3-d (magic 0x00000803), label files 1-d (0x00000801).

UBYTE = 0x08
IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
MAX_ELEMENTS = 1 << 32


def _open(path: str):
    if not os.path.exists(path):
        raise FileNotFoundError(f"IDX file not found: {path} (datasets are never downloaded automatically)")
    return gzip.open(path, "rb") if path.endswith(".gz") else open(path, "rb")


def parse_idx(payload: bytes, source: str = "<bytes>") -> np.ndarray:
    if len(payload) < 4:
        raise IdxFormatError(f"{source}: {len(payload)} bytes is too short for an IDX header")
    zeros, type_code, ndim = struct.unpack(">HBB", payload[:4])
    if zeros != 0 or type_code != UBYTE:
        raise IdxFormatError(f"{source}: bad magic 0x{struct.unpack('>I', payload[:4])[0]:08x}")
    header = 4 + 4 * ndim
    if len(payload) < header:
        raise IdxFormatError(f"{source}: truncated header, {ndim} dimensions need {header} bytes")
    dims = struct.unpack(f">{ndim}I", payload[4:header])
    count = 1
    for dim in dims:
        count *= dim
        if count > MAX_ELEMENTS:
            raise IdxFormatError(f"{source}: dimensions {dims} overflow the element limit {MAX_ELEMENTS}")
    if len(payload) - header < count:
        raise IdxFormatError(f"{source}: truncated payload, expected {count} bytes, found {len(payload) - header}")
    if len(payload) - header > count:
        raise IdxFormatError(f"{source}: {len(payload) - header - count} trailing bytes after the payload")
    return np.frombuffer(payload, dtype=np.uint8, count=count, offset=header).reshape(dims)


def read_idx(path: str) -> np.ndarray:
    with _open(path) as handle:
        return parse_idx(handle.read(), path)


def idx_bytes(array: np.ndarray) -> bytes:
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise IdxFormatError(f"only unsigned-byte IDX files are supported, got {array.dtype}")
    header = struct.pack(">HBB", 0, UBYTE, array.ndim) + struct.pack(f">{array.ndim}I", *array.shape)
    return header + np.ascontiguousarray(array).tobytes()


def write_idx(path: str, array: np.ndarray):
    payload = idx_bytes(array)
    if path.endswith(".gz"):
        payload = gzip.compress(payload, mtime=0)
    atomic_write_bytes(path, payload)


def load_idx(images_path: str, labels_path: str, classes: Optional[int] = None, split: str = "train") -> LabeledDataset:
    """
    Loads an image/label IDX pair as [N, 1, H, W] pixels scaled to [0, 1].

    Normalization is left to `normalize_splits` so that statistics come from
    the training split only.
    """
    images = read_idx(images_path)
    labels = read_idx(labels_path)
    if images.ndim != 3:
        raise IdxFormatError(f"{images_path}: image files must be 3-d (magic 0x{IMAGES_MAGIC:08x}), got {images.ndim}-d")
    if labels.ndim != 1:
        raise IdxFormatError(f"{labels_path}: label files must be 1-d (magic 0x{LABELS_MAGIC:08x}), got {labels.ndim}-d")
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    classes = int(labels.max()) + 1 if classes is None and labels.size else (classes or 1)
    pixels = images.astype(np.float64)[:, np.newaxis] / 255.0
    return LabeledDataset(pixels, labels.astype(np.int64), classes, split)
