"""File formats: signal CSV, subjects CSV, features CSV, JSON, run manifests.

All text is UTF-8 with LF line endings and `.` decimal separators, locale
notwithstanding.  Floats are written with Python's repr, the shortest string
that round-trips the exact double, so rewriting parsed output reproduces it
byte for byte.  Parse errors carry 1-based line numbers.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidInputError
from .features import SubjectRecord
from .respsignal import RespiratorySignal

SIGNAL_HEADER = ["time_s", "force_n"]
SUBJECTS_HEADER = [
    "subject_id",
    "age_y",
    "height_cm",
    "weight_kg",
    "bmi",
    "fev1_l",
    "fvc_l",
    "fev1_fvc",
    "fev1_pct_pred",
]
FEATURES_HEADER = ["subject_id", "fit", "rr", "tv", "n_cycles", "quality_score"]

# Allowed relative deviation of any sample interval from the median interval.
SPACING_RTOL = 0.001


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_float(text: str, path, line: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise InvalidInputError(
            f"{path}:{line}: column {column!r} has non-numeric value {text!r}"
        ) from None


def _parse_opt_float(text: str, path, line: int, column: str) -> float | None:
    if text == "":
        return None
    return _parse_float(text, path, line, column)


def _check_header(row: list[str] | None, expected: list[str], path):
    if row != expected:
        raise InvalidInputError(
            f"{path}:1: expected header {','.join(expected)!r}, got "
            f"{','.join(row) if row else '<empty file>'!r}"
        )


def read_signal_csv(path) -> RespiratorySignal:
    """Read a `time_s,force_n` waveform; sample rate inferred from spacing.

    Rows must be strictly increasing in time with uniform spacing (each
    interval within 0.1% of the median interval).
    """
    path = Path(path)
    times: list[float] = []
    forces: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, SIGNAL_HEADER, path)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InvalidInputError(
                    f"{path}:{line}: expected 2 columns, got {len(row)}"
                )
            times.append(_parse_float(row[0], path, line, "time_s"))
            forces.append(_parse_float(row[1], path, line, "force_n"))
    if len(times) < 2:
        raise InvalidInputError(f"{path}: need at least 2 samples")
    t = np.array(times)
    dt = np.diff(t)
    if not (dt > 0).all():
        bad = int(np.argmin(dt > 0))
        raise InvalidInputError(
            f"{path}:{bad + 3}: time_s not strictly increasing"
        )
    med = float(np.median(dt))
    if (np.abs(dt - med) > SPACING_RTOL * med).any():
        bad = int(np.argmax(np.abs(dt - med) > SPACING_RTOL * med))
        raise InvalidInputError(
            f"{path}:{bad + 3}: non-uniform sample spacing "
            f"({dt[bad]:.6g} s vs median {med:.6g} s)"
        )
    return RespiratorySignal(
        samples=np.array(forces), sample_rate_hz=1.0 / med, subject_id=path.stem
    )


def write_signal_csv(path, signal: RespiratorySignal):
    path = Path(path)
    fs = signal.sample_rate_hz
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SIGNAL_HEADER)
        for i, v in enumerate(signal.samples):
            writer.writerow([_fmt(i / fs), _fmt(float(v))])


def read_subjects_csv(path) -> list[SubjectRecord]:
    path = Path(path)
    out: list[SubjectRecord] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, SUBJECTS_HEADER, path)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SUBJECTS_HEADER):
                raise InvalidInputError(
                    f"{path}:{line}: expected {len(SUBJECTS_HEADER)} columns, "
                    f"got {len(row)}"
                )
            sid = row[0]
            if not sid:
                raise InvalidInputError(f"{path}:{line}: empty subject_id")
            if sid in seen:
                raise InvalidInputError(
                    f"{path}:{line}: duplicate subject_id {sid!r}"
                )
            seen.add(sid)
            vals = {
                name: _parse_opt_float(row[i], path, line, name)
                for i, name in enumerate(SUBJECTS_HEADER)
                if name != "subject_id"
            }
            try:
                out.append(SubjectRecord(subject_id=sid, **vals))
            except InvalidInputError as exc:
                raise InvalidInputError(f"{path}:{line}: {exc}") from exc
    return out


def write_subjects_csv(path, records: list[SubjectRecord]):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUBJECTS_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.subject_id,
                    _fmt(r.age_y),
                    _fmt(r.height_cm),
                    _fmt(r.weight_kg),
                    _fmt(r.bmi),
                    _fmt(r.fev1_l),
                    _fmt(r.fvc_l),
                    _fmt(r.fev1_fvc),
                    _fmt(r.fev1_pct_pred),
                ]
            )


@dataclass(frozen=True)
class FeatureRow:
    """One row of the extracted-features CSV."""

    subject_id: str
    fit: float
    rr: float
    tv: float
    n_cycles: int
    quality_score: float


def read_features_csv(path) -> list[FeatureRow]:
    path = Path(path)
    out: list[FeatureRow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, FEATURES_HEADER, path)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(FEATURES_HEADER):
                raise InvalidInputError(
                    f"{path}:{line}: expected {len(FEATURES_HEADER)} columns, "
                    f"got {len(row)}"
                )
            out.append(
                FeatureRow(
                    subject_id=row[0],
                    fit=_parse_float(row[1], path, line, "fit"),
                    rr=_parse_float(row[2], path, line, "rr"),
                    tv=_parse_float(row[3], path, line, "tv"),
                    n_cycles=int(_parse_float(row[4], path, line, "n_cycles")),
                    quality_score=_parse_float(
                        row[5], path, line, "quality_score"
                    ),
                )
            )
    return out


def write_features_csv(path, rows: list[FeatureRow]):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURES_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.subject_id,
                    _fmt(r.fit),
                    _fmt(r.rr),
                    _fmt(r.tv),
                    str(r.n_cycles),
                    _fmt(r.quality_score),
                ]
            )


def write_json(path, doc: dict):
    """Write a JSON document with LF endings and a trailing newline."""
    text = json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}:{exc.lineno}: {exc.msg}") from exc


@dataclass(frozen=True)
class RunManifest:
    """Record of one CLI invocation, written alongside its output."""

    command: str
    input_paths: tuple[str, ...]
    parameters: dict
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_paths": list(self.input_paths),
            "parameters": dict(self.parameters),
            "tool_version": self.tool_version,
        }


def manifest_path_for(out_path) -> Path:
    """Sibling manifest path: `<output>.manifest.json`."""
    p = Path(out_path)
    return p.with_name(p.name + ".manifest.json")


def write_manifest(out_path, manifest: RunManifest) -> Path:
    mp = manifest_path_for(out_path)
    write_json(mp, manifest.to_dict())
    return mp
