"""Dataset files, config files, and hashed CSV emission.

Binary dataset layout: magic "DMRL1", u32 n, u32 d (little-endian), n*d
little-endian float64 row-major, then an optional section of n label bytes
(0/1, or 255 for "no label").  The CSV alternative is one row per vector
with a `# n=<n> d=<d>` header and an optional trailing integer label column.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .core import Dataset

MAGIC = b"DMRL1"


def write_dataset_binary(path, dataset: Dataset) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", dataset.n, dataset.d))
        fh.write(dataset.rows.astype("<f8").tobytes(order="C"))
        if dataset.labels is not None:
            enc = np.where(np.asarray(dataset.labels) > 0, 1, 0).astype(np.uint8)
            fh.write(enc.tobytes())


def read_dataset_binary(path) -> Dataset:
    raw = Path(path).read_bytes()
    if raw[:5] != MAGIC:
        raise ValueError(f"{path}: not a DMRL1 dataset file")
    n, d = struct.unpack("<II", raw[5:13])
    body = 13 + 8 * n * d
    if len(raw) < body:
        raise ValueError(f"{path}: truncated dataset file")
    rows = np.frombuffer(raw[13:body], dtype="<f8").reshape(n, d).copy()
    labels = None
    if len(raw) >= body + n:
        enc = np.frombuffer(raw[body:body + n], dtype=np.uint8)
        if not np.all(enc == 255):
            labels = enc.astype(int)
    return Dataset(rows, labels)


def write_dataset_csv(path, dataset: Dataset) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={dataset.n} d={dataset.d}\n")
        for i in range(dataset.n):
            cells = [repr(float(v)) for v in dataset.rows[i]]
            if dataset.labels is not None:
                cells.append(str(int(dataset.labels[i])))
            fh.write(",".join(cells) + "\n")


def read_dataset_csv(path) -> Dataset:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing '# n=... d=...' header")
    header = dict(kv.split("=") for kv in lines[0].lstrip("# ").split())
    n, d = int(header["n"]), int(header["d"])
    rows = np.empty((n, d))
    labels = None
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != n:
        raise ValueError(f"{path}: expected {n} rows, found {len(body)}")
    for i, line in enumerate(body):
        cells = line.split(",")
        if len(cells) == d + 1:
            if labels is None:
                labels = np.empty(n, dtype=int)
            labels[i] = int(cells[-1])
            cells = cells[:-1]
        elif len(cells) != d:
            raise ValueError(f"{path}: row {i} has {len(cells)} cells, expected {d}")
        rows[i] = [float(c) for c in cells]
    return Dataset(rows, labels)


def read_dataset(path) -> Dataset:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(5)
    return read_dataset_binary(path) if head == MAGIC else read_dataset_csv(path)


def read_config(path) -> dict[str, str]:
    """Plain `key = value` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: malformed config line {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def manifest_hash(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_manifest(out_dir, manifest: dict) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _format_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))        # shortest round-trip representation
    return str(v)


def write_csv(path, columns: dict, digest: str) -> None:
    """CSV with a '#' header carrying column names and the manifest hash."""
    names = list(columns)
    arrays = [np.asarray(columns[k]) for k in names]
    length = arrays[0].shape[0]
    if any(a.shape[0] != length for a in arrays):
        raise ValueError("all columns must have the same length")
    with open(path, "w") as fh:
        fh.write("# " + ",".join(names) + "\n")
        fh.write(f"# manifest={digest}\n")
        for i in range(length):
            fh.write(",".join(_format_cell(a[i]) for a in arrays) + "\n")


def read_csv(path):
    """Read back a hashed CSV; returns (columns dict, manifest hash)."""
    lines = Path(path).read_text().splitlines()
    if len(lines) < 2 or not lines[0].startswith("# ") or not lines[1].startswith("# manifest="):
        raise ValueError(f"{path}: missing hashed CSV header")
    names = lines[0][2:].split(",")
    digest = lines[1].split("=", 1)[1]
    rows = [ln.split(",") for ln in lines[2:] if ln.strip()]
    cols = {}
    for j, name in enumerate(names):
        vals = [r[j] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in vals])
        except ValueError:
            cols[name] = np.array(vals)
    return cols, digest
