"""CSV and JSON file formats used by the command-line tools."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from .apparatus import ScanRecord
from .tomography import TomoCounts, TomoSetting, TomographyInputError

SCAN_HEADER = ["theta1_deg", "theta2_deg", "slit_x_mm", "p1_hbar_per_mm", "model_rate", "observed_counts"]
TOMO_HEADER = ["setting", "counts"]


class DataFileError(ValueError):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def write_scan_csv(path: str | Path, theta1: float, theta2: float, records: Iterable[ScanRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for r in records:
            w.writerow(
                [
                    _fmt(theta1),
                    _fmt(theta2),
                    _fmt(r.slit_position_x),
                    _fmt(r.momentum_p1),
                    _fmt(r.model_rate),
                    _fmt(r.observed_counts),
                ]
            )


def _parse_float(text: str, column: str, line: int, path) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataFileError(f"{path}, line {line}: column '{column}' is not a number: {text!r}") from None
    if not math.isfinite(v):
        raise DataFileError(f"{path}, line {line}: column '{column}' is not finite")
    return v


def read_scan_csv(path: str | Path) -> dict[tuple[float, float], list[ScanRecord]]:
    """Scan records grouped by (theta1, theta2).

    ``observed_counts`` may be blank (noiseless model output); it is then
    left as ``None``. Counts that are present must be non-negative.
    """
    out: dict[tuple[float, float], list[ScanRecord]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFileError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        missing = [c for c in SCAN_HEADER if c not in header]
        if missing:
            raise DataFileError(f"{path}: missing column(s): {', '.join(missing)}")
        idx = {c: header.index(c) for c in SCAN_HEADER}
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataFileError(f"{path}, line {line}: expected {len(header)} fields, got {len(row)}")
            vals = {c: row[i].strip() for c, i in idx.items()}
            t1 = _parse_float(vals["theta1_deg"], "theta1_deg", line, path)
            t2 = _parse_float(vals["theta2_deg"], "theta2_deg", line, path)
            x = _parse_float(vals["slit_x_mm"], "slit_x_mm", line, path) if vals["slit_x_mm"] else None
            p = _parse_float(vals["p1_hbar_per_mm"], "p1_hbar_per_mm", line, path)
            rate = _parse_float(vals["model_rate"], "model_rate", line, path) if vals["model_rate"] else math.nan
            obs = None
            if vals["observed_counts"]:
                obs = _parse_float(vals["observed_counts"], "observed_counts", line, path)
                if obs < 0:
                    raise DataFileError(f"{path}, line {line}: observed_counts is negative")
                if obs == int(obs):
                    obs = int(obs)
            if obs is None and math.isnan(rate):
                raise DataFileError(f"{path}, line {line}: row has neither model_rate nor observed_counts")
            out.setdefault((t1, t2), []).append(ScanRecord(x, p, rate, obs))
    if not out:
        raise DataFileError(f"{path}: no data rows")
    return out


def write_tomo_counts(path: str | Path, data: TomoCounts) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TOMO_HEADER)
        for s, c in zip(data.settings, data.counts):
            w.writerow([s.label, _fmt(c)])


def read_tomo_counts(path: str | Path) -> TomoCounts:
    settings, counts = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFileError(f"{path}: file is empty") from None
        missing = [c for c in TOMO_HEADER if c not in header]
        if missing:
            raise DataFileError(f"{path}: missing column(s): {', '.join(missing)}")
        i_set, i_cnt = header.index("setting"), header.index("counts")
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataFileError(f"{path}, line {line}: expected {len(header)} fields, got {len(row)}")
            try:
                settings.append(TomoSetting.from_label(row[i_set]))
            except TomographyInputError as exc:
                raise DataFileError(f"{path}, line {line}: {exc}") from None
            c = _parse_float(row[i_cnt].strip(), "counts", line, path)
            if c < 0:
                raise DataFileError(f"{path}, line {line}: counts is negative")
            counts.append(c)
    return TomoCounts(settings, counts)


def dump_json(obj, path: str | Path | None = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
