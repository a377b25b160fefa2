"""CSV and metadata writers.

All writers produce ``\\n`` line endings and locale-independent decimals
so that identical runs give byte-identical files.
"""
import json
import platform
from pathlib import Path

import numpy as np

from .rng import RNG_ALGORITHM


def fmt_real(value: float) -> str:
    """Positional decimal rounded to 12 significant digits, trailing zeros dropped."""
    return np.format_float_positional(float(value), precision=12, unique=True,
                                      fractional=False, trim="-")


def _write(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return path


def write_trajectory(path, species, traj):
    """Concentration (or expected count) trajectory: ``t,<species...>``."""
    rows = ([str(t)] + [fmt_real(v) for v in row] for t, row in enumerate(traj))
    return _write(path, ["t", *species], rows)


def write_counts(path, species, counts):
    rows = ([str(t)] + [str(int(v)) for v in row] for t, row in enumerate(counts))
    return _write(path, ["t", *species], rows)


def write_ensemble(path, species, mean, std):
    header = ["t"] + [f"{s}_mean" for s in species] + [f"{s}_std" for s in species]
    rows = ([str(t)] + [fmt_real(v) for v in mu] + [fmt_real(v) for v in sd]
            for t, (mu, sd) in enumerate(zip(mean, std)))
    return _write(path, header, rows)


def write_runs(path, species, runs):
    """All replicates in long form: ``replicate,t,<species...>``."""
    rows = ([str(r), str(t)] + [str(int(v)) for v in row]
            for r, run in enumerate(runs) for t, row in enumerate(run))
    return _write(path, ["replicate", "t", *species], rows)


def write_frame(path, species, ids, states, pos):
    rows = ([str(int(g)), species[q], f"{x:.6f}", f"{y:.6f}"]
            for g, q, (x, y) in zip(ids, states, pos))
    return _write(path, ["id", "species", "x", "y"], rows)


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_metadata(data_path, **fields):
    from . import __version__

    meta = {
        "tool_version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
        "numpy_version": np.__version__,
        "python": platform.python_version(),
        "data_file": Path(data_path).name,
    }
    meta.update(fields)
    target = sidecar_path(data_path)
    target.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_jsonable) + "\n",
                      encoding="utf-8")
    return target


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")
