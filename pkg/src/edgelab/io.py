"""CSV and JSON record formats shared by the experiment runner and the CLI."""
from __future__ import annotations

import csv
import io
import json
import math

OVERLAP_HEADER = ("N", "d", "seed", "t", "index", "test_vector_id", "value")
LOCAL_LAW_HEADER = ("N", "d", "seed", "E", "eta", "deviation")
SPACING_HEADER = ("N", "d", "seed", "k", "edge_distance")
SUMMARY_KEYS = ("statistic_name", "N", "d", "epsilon", "trials", "value", "std_error", "seed_range")
RATE_KEYS = ("exponent", "intercept", "residual")


def fmt(x) -> str:
    """Round-trip exact text for floats, plain text for everything else."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path_or_file, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="") as fh:
            fh.write(text)


def read_csv(path_or_file) -> list[dict]:
    if hasattr(path_or_file, "read"):
        return list(csv.DictReader(path_or_file))
    with open(path_or_file, newline="") as fh:
        return list(csv.DictReader(fh))


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def summary(statistic_name, n, d, epsilon, trials, value, std_error, seed_range, **extra) -> dict:
    """One summary entry in the shared JSON schema (extra keys are appended)."""
    out = dict(
        statistic_name=statistic_name,
        N=int(n),
        d=int(d),
        epsilon=float(epsilon),
        trials=int(trials),
        value=float(value),
        std_error=None if std_error is None else float(std_error),
        seed_range=list(seed_range),
    )
    out.update(extra)
    return out
