"""File formats and atomic persistence.

Every writer goes through a temp-file-plus-rename so failed commands never
leave partial artifacts behind.  Formats are deliberately plain: CSV for
tables, JSON for structured records, ASCII PGM (P2) for images so golden
files diff bit-exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .dataset import Dataset, Sample
from .errors import ValidationError
from .qke import KernelMatrix


def atomic_write_text(path: Path, content: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(content)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def sha256_of_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_json(path: Path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_json(path: Path):
    with open(path) as handle:
        return json.load(handle)


def _format_float(value: float) -> str:
    return repr(float(value))


def write_dataset_csv(path: Path, samples) -> None:
    """Columns x0..x{f-1},y with labels written as +1/-1."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    n_features = len(samples[0].x) if samples else 3
    writer.writerow([f"x{i}" for i in range(n_features)] + ["y"])
    for sample in samples:
        writer.writerow([_format_float(v) for v in sample.x] + [str(int(sample.y))])
    atomic_write_text(path, buffer.getvalue())


def read_dataset_csv(path: Path) -> list[Sample]:
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise ValidationError(f"{path} is empty")
    header = rows[0]
    if header[-1] != "y":
        raise ValidationError(f"{path} lacks a trailing label column")
    samples = []
    for row in rows[1:]:
        if not row:
            continue
        x = np.array([float(v) for v in row[:-1]])
        samples.append(Sample(x=x, y=int(row[-1])))
    return samples


def write_kernel_csv(path: Path, kernel: KernelMatrix) -> None:
    """Header row of column sample ids, then one row of values per row id.

    Row identifiers and estimation metadata live in the JSON sidecar
    written by `write_kernel_sidecar`.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(kernel.col_ids)
    for row in kernel.values:
        writer.writerow([_format_float(v) for v in row])
    atomic_write_text(path, buffer.getvalue())


def write_kernel_sidecar(path: Path, kernel: KernelMatrix) -> None:
    payload = dict(kernel.metadata)
    payload["row_ids"] = list(kernel.row_ids)
    payload["col_ids"] = list(kernel.col_ids)
    write_json(path, payload)


def read_kernel_csv(path: Path, sidecar: Path | None = None) -> KernelMatrix:
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise ValidationError(f"{path} is empty")
    col_ids = tuple(rows[0])
    values = np.array([[float(v) for v in row] for row in rows[1:] if row])
    if values.ndim != 2 or values.shape[1] != len(col_ids):
        raise ValidationError(f"{path} is not a rectangular kernel table")
    metadata = {}
    row_ids = tuple(f"r{i}" for i in range(values.shape[0]))
    if sidecar is not None and Path(sidecar).exists():
        metadata = read_json(sidecar)
        row_ids = tuple(metadata.pop("row_ids", row_ids))
        metadata.pop("col_ids", None)
    return KernelMatrix(
        values=values, row_ids=row_ids, col_ids=col_ids, metadata=metadata
    )


def write_pgm(path: Path, pixels: np.ndarray) -> None:
    """ASCII PGM (P2), maxval 255."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise ValidationError("PGM needs a 2-D pixel array")
    if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
        raise ValidationError("PGM pixels must lie in 0..255")
    height, width = pixels.shape
    lines = ["P2", f"{width} {height}", "255"]
    for row in pixels.astype(int):
        lines.append(" ".join(str(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def kernel_to_pixels(values: np.ndarray) -> np.ndarray:
    """Grayscale heatmap mapping: pixel = round(255 * K)."""
    values = np.asarray(values, dtype=float)
    if values.size and (values.min() < -1e-9 or values.max() > 1 + 1e-9):
        raise ValidationError("kernel values for plotting must lie in [0, 1]")
    return np.rint(255.0 * np.clip(values, 0.0, 1.0)).astype(int)


def region_to_pixels(grid: np.ndarray) -> np.ndarray:
    """Region labels to grayscale: +1 -> 255, -1 -> 0, gap -> 128."""
    grid = np.asarray(grid, dtype=int)
    pixels = np.full(grid.shape, 128, dtype=int)
    pixels[grid == 1] = 255
    pixels[grid == -1] = 0
    return pixels


def write_region_csv(path: Path, grid: np.ndarray) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in np.asarray(grid, dtype=int):
        writer.writerow([str(int(v)) for v in row])
    atomic_write_text(path, buffer.getvalue())


def read_region_csv(path: Path) -> np.ndarray:
    with open(path, newline="") as handle:
        rows = [[int(v) for v in row] for row in csv.reader(handle) if row]
    return np.array(rows, dtype=int)


def dataset_from_files(train_path: Path, test_path: Path, metadata=None) -> Dataset:
    return Dataset(
        train=tuple(read_dataset_csv(train_path)),
        test=tuple(read_dataset_csv(test_path)),
        metadata=metadata or {},
    )
