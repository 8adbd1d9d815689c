"""Deterministic file emission: CSV with 17-significant-digit floats, binary
8-bit PGM heatmaps, a strict CSV reader, and the per-run manifest."""
from __future__ import annotations

import hashlib
import json
import math
import time
from pathlib import Path

import numpy as np


def format_value(x) -> str:
    """Lossless-for-double text: 17 significant digits for floats, plain
    repr for integers and strings."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, header: list[str], columns: list) -> Path:
    """Write parallel columns as CSV; bytes are a pure function of the data."""
    path = Path(path)
    if len(header) != len(columns):
        raise ValueError("header and column counts differ")
    columns = [np.asarray(c) for c in columns]
    n = len(columns[0]) if columns else 0
    for c in columns:
        if len(c) != n:
            raise ValueError("columns have unequal lengths")
    lines = [",".join(header)]
    for row in range(n):
        lines.append(",".join(format_value(c[row]) for c in columns))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    return path


def read_csv_strict(path) -> tuple[list[str], list[list[str]]]:
    """Parse a CSV produced by write_csv, enforcing the output contract:
    header present, constant column count, and no non-finite numeric tokens."""
    path = Path(path)
    text = path.read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    if not header or any(not h for h in header):
        raise ValueError(f"{path}: malformed header")
    ncol = len(header)
    rows = []
    for m, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != ncol:
            raise ValueError(f"{path}:{m}: expected {ncol} fields, got {len(fields)}")
        for tok in fields:
            try:
                val = float(tok)
            except ValueError:
                continue  # non-numeric token (e.g. a label) is fine
            if math.isnan(val) or math.isinf(val):
                raise ValueError(f"{path}:{m}: non-finite token {tok!r}")
        rows.append(fields)
    return header, rows


def write_pgm(path, data, normalization: str = "global") -> Path:
    """Binary P5, 8-bit, row-major grayscale image of a 2-d array.

    The comment line records the min/max used for normalization.  With
    normalization="rows", each row is scaled by its own maximum instead
    (per-time-slice view for trajectory heatmaps).
    """
    path = Path(path)
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError("PGM export needs a 2-d array")
    if not np.all(np.isfinite(data)):
        raise ValueError("PGM export with non-finite values")
    lo = float(data.min()) if data.size else 0.0
    hi = float(data.max()) if data.size else 0.0
    if normalization == "global":
        span = hi - lo
        scaled = (data - lo) / span if span > 0 else np.zeros_like(data)
    elif normalization == "rows":
        row_max = data.max(axis=1, keepdims=True)
        safe = np.where(row_max > 0, row_max, 1.0)
        scaled = np.clip(data / safe, 0.0, 1.0)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    pixels = np.round(scaled * 255.0).astype(np.uint8)
    header = (
        f"P5\n# min={lo:.17g} max={hi:.17g} normalization={normalization}\n"
        f"{data.shape[1]} {data.shape[0]}\n255\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels.tobytes())
    return path


def read_pgm(path) -> tuple[np.ndarray, str]:
    """Read back a P5 image written by write_pgm; returns (pixels, comment)."""
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P5\n"):
        raise ValueError("not a binary PGM (P5) file")
    rest = raw[3:]
    comment = ""
    while rest.startswith(b"#"):
        eol = rest.index(b"\n")
        comment = rest[1:eol].decode("ascii").strip()
        rest = rest[eol + 1:]
    dims, rest = rest.split(b"\n", 1)
    w, h = (int(tok) for tok in dims.split())
    maxval, rest = rest.split(b"\n", 1)
    if int(maxval) != 255:
        raise ValueError("expected 8-bit PGM")
    pixels = np.frombuffer(rest[: w * h], dtype=np.uint8).reshape(h, w)
    return pixels, comment


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


class ManifestTimer:
    """Wall-clock scope for a run; produces the manifest dict."""

    def __init__(self, command: str, config: dict, version: str, backend: str):
        self.command = command
        self.config = config
        self.version = version
        self.backend = backend
        self.extra: dict = {}
        self._t0 = time.perf_counter()

    def finish(self, files: list[Path]) -> dict:
        entries = [
            {
                "name": Path(f).name,
                "sha256": sha256_of(f),
                "bytes": Path(f).stat().st_size,
            }
            for f in files
        ]
        return {
            "tool": "moire-ladder",
            "version": self.version,
            "backend": self.backend,
            "command": self.command,
            "config": self.config,
            "duration_seconds": time.perf_counter() - self._t0,
            "files": entries,
            **({"extra": self.extra} if self.extra else {}),
        }


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="ascii")
    return path
