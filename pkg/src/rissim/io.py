"""CSV, provenance and gnuplot emission for sweep results."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from rissim.transceiver import BerRecord

__all__ = ["CSV_COLUMNS", "emit_csv", "write_csv", "read_csv", "format_float", "emit_provenance", "emit_gnuplot"]

CSV_COLUMNS = ("scheme", "tx", "rx", "n_ris", "mod_order", "variant", "quant_levels",
               "sigma_e2", "d1", "d2", "esn0_db", "source", "trials", "bit_errors", "ber")

_INT_COLUMNS = {"tx", "rx", "n_ris", "mod_order", "quant_levels", "trials", "bit_errors"}
_FLOAT_COLUMNS = {"sigma_e2", "d1", "d2", "esn0_db", "ber"}


def format_float(x: float) -> str:
    """Nine significant digits."""
    return f"{x:.9g}"


def _cell(name, value) -> str:
    if value is None:
        return ""
    if name in _FLOAT_COLUMNS:
        return format_float(float(value))
    return str(value)


def write_csv(result, fh) -> None:
    """Write the CSV rows of ``result`` to an open text stream."""
    records = getattr(result, "records", result)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_cell(c, getattr(r, c)) for c in CSV_COLUMNS])


def emit_csv(result, path) -> None:
    """Write one row per record of ``result`` (a SweepResult or list of records).

    Raises
    ------
    OSError
        With the offending path in the message.
    """
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            write_csv(result, fh)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV to {path}: {exc.strerror}") from exc


def _parse(name, text):
    if text == "":
        return 0.0 if name == "sigma_e2" else None
    if name in _INT_COLUMNS:
        return int(text)
    if name in _FLOAT_COLUMNS:
        return float(text)
    return text


def read_csv(path) -> list[BerRecord]:
    """Parse a file written by :func:`emit_csv`.  Config hashes are not stored in CSV."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [BerRecord(**{k: _parse(k, v) for k, v in row.items()}) for row in reader]


def emit_provenance(result, path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(result.provenance, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write provenance to {path}: {exc.strerror}") from exc


_GNUPLOT = """\
# BER curves from {csv}
set datafile separator ","
set logscale y
set format y "10^{{%L}}"
set xlabel "E_s/N_0 (dB)"
set ylabel "BER"
set yrange [1e-6:1]
set grid
set key bottom left
plot \\
  "{csv}" using (strcol(12) eq "simulated" ? $11 : 1/0):15 skip 1 with linespoints pt 7 title "simulation", \\
  "{csv}" using (strcol(12) eq "theory" ? $11 : 1/0):15 skip 1 with lines lw 2 title "theory"
"""


def emit_gnuplot(csv_path, script_path) -> None:
    """Write a gnuplot script that plots simulated points and theory lines from ``csv_path``."""
    script_path = Path(script_path)
    try:
        script_path.write_text(_GNUPLOT.format(csv=Path(csv_path).name))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write plot script to {script_path}: {exc.strerror}") from exc
