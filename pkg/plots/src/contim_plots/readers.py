"""Parsers for the harness CSV schemas.

Deliberately written against the documented file formats rather than any
shared library code: training logs are `step,loss,val_mean,val_std`,
results files are `method,graph_id,run_id,influence,normalized_influence,
inference_seconds` with at most one extra sweep column and `# summary`
trailer lines.
"""

from __future__ import annotations

LOG_COLUMNS = ("step", "loss", "val_mean", "val_std")
RESULT_COLUMNS = (
    "method",
    "graph_id",
    "run_id",
    "influence",
    "normalized_influence",
    "inference_seconds",
)


def read_training_log(path):
    """Parse one training log into row tuples.

    Args:
        path: CSV file with the training-log header.

    Returns:
        List of (step, loss, val_mean, val_std) tuples, ints then floats.

    Raises:
        ValueError: on a header that is not the training-log schema; the
            message names the first missing column.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",") if lines else []
    for column in LOG_COLUMNS:
        if column not in header:
            raise ValueError(f"{path}: missing column {column}")
    if tuple(header) != LOG_COLUMNS:
        raise ValueError(f"{path}: unexpected training log header {lines[0]!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"{path}: wrong field count at line {lineno}")
        rows.append((int(parts[0]), float(parts[1]), float(parts[2]),
                     float(parts[3])))
    return rows


def read_results(path):
    """Parse a results file into (rows, summaries, sweep_column).

    Args:
        path: CSV file with the results header, optionally one extra sweep
            column and `# summary,<method>,<mean>,<std>` trailer lines.

    Returns:
        rows: list of dicts keyed by column name.
        summaries: {method: (mean, std)} from the summary trailer.
        sweep_column: name of the seventh column, or None.

    Raises:
        ValueError: on a header or row that breaks the schema; the message
            names the first missing column when one is absent.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",") if lines else []
    for column in RESULT_COLUMNS:
        if column not in header:
            raise ValueError(f"{path}: missing column {column}")
    if tuple(header[:6]) != RESULT_COLUMNS or len(header) > 7:
        raise ValueError(f"{path}: unexpected results header {lines[0]!r}")
    sweep_column = header[6] if len(header) == 7 else None
    rows = []
    summaries = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# summary,"):
                parts = line[len("# summary,"):].split(",")
                if len(parts) != 3:
                    raise ValueError(f"{path}: bad summary at line {lineno}")
                summaries[parts[0]] = (float(parts[1]), float(parts[2]))
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValueError(f"{path}: wrong field count at line {lineno}")
        row = {
            "method": parts[0],
            "graph_id": int(parts[1]),
            "run_id": int(parts[2]),
            "influence": float(parts[3]),
            "normalized_influence": float(parts[4]),
            "inference_seconds": float(parts[5]),
        }
        if sweep_column is not None:
            row[sweep_column] = float(parts[6])
        rows.append(row)
    return rows, summaries, sweep_column
