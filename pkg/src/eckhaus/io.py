"""Deterministic JSON/CSV output with a run manifest."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

SIG_FIGS = 10


def round_sig(x: float, sig: int = SIG_FIGS) -> float:
    if x == 0 or not np.isfinite(x):
        return float(x)
    return float(f"{x:.{sig}g}")


def clean(obj, sig: int = SIG_FIGS):
    """Recursively convert numpy/complex values to JSON-friendly, rounded types."""
    if isinstance(obj, dict):
        return {str(k): clean(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v, sig) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist(), sig)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_sig(obj.real, sig), round_sig(obj.imag, sig)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return round_sig(x, sig) if np.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def manifest_hash(manifest: dict) -> str:
    """Hash of the manifest's deterministic part (timing and outputs excluded)."""
    core = {k: v for k, v in manifest.items() if k not in ("wall_clock_s", "outputs", "manifest_sha256")}
    return hashlib.sha256(dumps(core).encode()).hexdigest()


def csv_text(header, rows, digest: str) -> str:
    buf = io.StringIO()
    buf.write(f"# manifest_sha256={digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(round_sig(float(v)))
    return v


def read_csv(path):
    """Return ``(digest, header, rows)``; rows are lists of floats where parseable."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        digest = first.split("=", 1)[1] if first.startswith("# manifest_sha256=") else None
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for r in reader:
            out = []
            for x in r:
                try:
                    out.append(float(x))
                except ValueError:
                    out.append(x)
            rows.append(out)
    return digest, header, rows
