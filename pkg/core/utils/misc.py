import csv
import io
import os
import tempfile
from typing import Iterable, Sequence

THREADS_ENV = "LIFB_THREADS"


def atomic_write_bytes(path: str, payload: bytes):
    """
    Writes `payload` to `path` through a temporary file in the same directory
    followed by an atomic rename, so readers never observe a partial file.

    Args:
        path (str): Destination file path. Parent directories are created.
        payload (bytes): Content to write.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def atomic_write_text(path: str, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Renders an RFC-4180 CSV document (CRLF line endings, header first)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if value is None else value for value in row])
    return buffer.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]):
    atomic_write_text(path, csv_text(header, rows))


def resolve_threads(default: int = 1) -> int:
    """Worker cap taken from LIFB_THREADS; invalid or missing values fall back to `default`."""
    raw = os.getenv(THREADS_ENV)
    if raw is None:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def format_float(value: float) -> str:
    """Shortest round-trip representation, so CSVs reproduce bit-identically."""
    return repr(float(value))
