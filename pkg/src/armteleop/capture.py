"""Reading, writing, and resampling of skeleton-frame streams.

The interchange schema is a flat record of 22 numeric fields:

    t,sx,sy,sz,ex,ey,ez,wx,wy,wz,quw,qux,quy,quz,qfw,qfx,qfy,qfz,qhw,qhx,qhy,qhz

available as delimited columns (csv) or line-delimited JSON objects (jsonl)
with the same field names. Metadata rides in ``# key: value`` preamble
comments (csv) or a first ``{"meta": {...}}`` record (jsonl). Quaternions
are renormalized on load when their norm is within [0.99, 1.01] and
rejected otherwise.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import quat
from .retarget import SkeletonFrame

FIELD_NAMES = (
    "t",
    "sx", "sy", "sz",
    "ex", "ey", "ez",
    "wx", "wy", "wz",
    "quw", "qux", "quy", "quz",
    "qfw", "qfx", "qfy", "qfz",
    "qhw", "qhx", "qhy", "qhz",
)

QUAT_NORM_MIN = 0.99
QUAT_NORM_MAX = 1.01


class ParseError(ValueError):
    def __init__(self, line: int, column: int | None, reason: str):
        self.line = line
        self.column = column
        at = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{at}: {reason}")


class SchemaError(ParseError):
    """A required field is missing from a record."""


class NormError(ParseError):
    """A quaternion field is too far from unit length to trust."""


class InsufficientData(ValueError):
    """Too few records for the requested operation."""


class DomainError(ValueError):
    """Argument outside the function's domain."""


@dataclass(frozen=True)
class RecordingMeta:
    capture_rate: float = 60.0
    upper_length: float = 0.30
    fore_length: float = 0.27
    hand_length: float = 0.08
    convention: str = "y-up-left-handed"

    def __post_init__(self):
        if self.capture_rate <= 0.0:
            raise ValueError("capture_rate must be positive")

    def to_dict(self) -> dict:
        return {
            "capture_rate": self.capture_rate,
            "upper_length": self.upper_length,
            "fore_length": self.fore_length,
            "hand_length": self.hand_length,
            "convention": self.convention,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RecordingMeta":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


def frame_to_record(frame: SkeletonFrame) -> dict:
    """Flatten a frame into the interchange field order."""
    values = [
        frame.timestamp,
        *frame.shoulder, *frame.elbow, *frame.wrist,
        *frame.q_upper, *frame.q_fore, *frame.q_hand,
    ]
    return {name: float(v) for name, v in zip(FIELD_NAMES, values)}


def record_to_frame(rec: dict, line: int = 0) -> SkeletonFrame:
    """Validate and structure one flat record; raises Schema/Norm/ParseError."""
    values = []
    for i, name in enumerate(FIELD_NAMES):
        if name not in rec:
            raise SchemaError(line, i, f"missing field '{name}'")
        try:
            values.append(float(rec[name]))
        except (TypeError, ValueError):
            raise ParseError(line, i, f"field '{name}' is not numeric: {rec[name]!r}")
    t = values[0]
    if not math.isfinite(t) or t < 0.0:
        raise ParseError(line, 0, f"timestamp must be finite and non-negative, got {t!r}")
    if not all(math.isfinite(v) for v in values):
        raise ParseError(line, None, "record contains non-finite values")
    pos = np.array(values[1:10]).reshape(3, 3)
    quats = []
    for qi, name in enumerate(("q_upper", "q_fore", "q_hand")):
        q = np.array(values[10 + 4 * qi : 14 + 4 * qi])
        n = quat.norm(q)
        if not QUAT_NORM_MIN <= n <= QUAT_NORM_MAX:
            raise NormError(line, 10 + 4 * qi, f"{name} norm {n:.4f} outside [0.99, 1.01]")
        # skip the division when already unit so write/parse round-trips bitwise
        quats.append(q if abs(n - 1.0) <= 1e-9 else q / n)
    return SkeletonFrame(t, pos[0], pos[1], pos[2], quats[0], quats[1], quats[2])


def _format(v: float) -> str:
    return repr(float(v))


def write_frames(frames, fmt: str = "csv", meta: RecordingMeta | None = None) -> str:
    """Serialize frames (and optional metadata) to csv or jsonl text."""
    if fmt == "csv":
        out = io.StringIO()
        if meta is not None:
            for k, v in meta.to_dict().items():
                out.write(f"# {k}: {v}\n")
        out.write(",".join(FIELD_NAMES) + "\n")
        for f in frames:
            rec = frame_to_record(f)
            out.write(",".join(_format(rec[name]) for name in FIELD_NAMES) + "\n")
        return out.getvalue()
    if fmt == "jsonl":
        out = io.StringIO()
        if meta is not None:
            out.write(json.dumps({"meta": meta.to_dict()}) + "\n")
        for f in frames:
            out.write(json.dumps(frame_to_record(f)) + "\n")
        return out.getvalue()
    raise ValueError(f"unknown format {fmt!r} (expected 'csv' or 'jsonl')")


def parse_frames(
    text: str, fmt: str = "csv", strict: bool = True
) -> tuple[list[SkeletonFrame], RecordingMeta]:
    """Parse a frame stream; under strict mode timestamp regressions are errors.

    Lenient mode drops out-of-order frames instead and keeps going.
    """
    if fmt == "csv":
        frames, meta = _parse_csv(text)
    elif fmt == "jsonl":
        frames, meta = _parse_jsonl(text)
    else:
        raise ValueError(f"unknown format {fmt!r} (expected 'csv' or 'jsonl')")

    checked: list[SkeletonFrame] = []
    for lineno, frame in frames:
        if checked and frame.timestamp < checked[-1].timestamp:
            if strict:
                raise ParseError(
                    lineno, 0,
                    f"timestamp {frame.timestamp!r} decreases below {checked[-1].timestamp!r}",
                )
            continue
        checked.append(frame)
    return checked, meta


def _parse_csv(text: str) -> tuple[list[tuple[int, SkeletonFrame]], RecordingMeta]:
    meta_fields: dict = {}
    header: list[str] | None = None
    frames: list[tuple[int, SkeletonFrame]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if ":" in line:
                k, _, v = line[1:].partition(":")
                meta_fields[k.strip()] = _coerce(v.strip())
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            header = cells
            missing = [n for n in FIELD_NAMES if n not in header]
            if missing:
                raise SchemaError(lineno, None, f"header missing fields {missing}")
            continue
        if len(cells) != len(header):
            raise ParseError(lineno, len(cells), f"expected {len(header)} cells, got {len(cells)}")
        rec = dict(zip(header, cells))
        frames.append((lineno, record_to_frame(rec, line=lineno)))
    if header is None:
        raise SchemaError(1, None, "no header row found")
    return frames, RecordingMeta.from_dict(meta_fields)


def _parse_jsonl(text: str) -> tuple[list[tuple[int, SkeletonFrame]], RecordingMeta]:
    meta = RecordingMeta()
    frames: list[tuple[int, SkeletonFrame]] = []
    seen_record = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, exc.colno, f"invalid JSON: {exc.msg}")
        if not isinstance(obj, dict):
            raise ParseError(lineno, None, "expected a JSON object per line")
        if "meta" in obj and not seen_record:
            meta = RecordingMeta.from_dict(obj["meta"])
            continue
        seen_record = True
        frames.append((lineno, record_to_frame(obj, line=lineno)))
    return frames, meta


def _coerce(value: str):
    try:
        return float(value)
    except ValueError:
        return value


def resample_frames(frames, target_rate: float) -> list[SkeletonFrame]:
    """Resample onto an exact 1/target_rate grid spanning the input.

    Positions interpolate linearly, orientations along the shortest arc.
    """
    if target_rate <= 0.0:
        raise ValueError("target_rate must be positive")
    frames = list(frames)
    if len(frames) < 2:
        raise InsufficientData("resampling needs at least two frames")
    times = [f.timestamp for f in frames]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("frame timestamps must be non-decreasing")

    t0 = times[0]
    span = times[-1] - t0
    n = int(span * target_rate + 1e-9) + 1
    out = []
    idx = 0
    for k in range(n):
        t = t0 + k / target_rate
        while idx + 1 < len(frames) and times[idx + 1] <= t:
            idx += 1
        if idx + 1 >= len(frames):
            out.append(_with_time(frames[-1], t))
            continue
        a, b = frames[idx], frames[idx + 1]
        gap = b.timestamp - a.timestamp
        w = 0.0 if gap <= 0.0 else (t - a.timestamp) / gap
        if w <= 0.0:
            out.append(_with_time(a, t))
            continue
        out.append(
            SkeletonFrame(
                timestamp=t,
                shoulder=(1.0 - w) * a.shoulder + w * b.shoulder,
                elbow=(1.0 - w) * a.elbow + w * b.elbow,
                wrist=(1.0 - w) * a.wrist + w * b.wrist,
                q_upper=quat.slerp(a.q_upper, b.q_upper, w),
                q_fore=quat.slerp(a.q_fore, b.q_fore, w),
                q_hand=quat.slerp(a.q_hand, b.q_hand, w),
            )
        )
    return out


def _with_time(frame: SkeletonFrame, t: float) -> SkeletonFrame:
    return SkeletonFrame(
        t, frame.shoulder, frame.elbow, frame.wrist,
        frame.q_upper, frame.q_fore, frame.q_hand,
    )


def minimum_jerk(tau: float) -> float:
    """Quintic minimum-jerk progress profile on [0, 1].

    s(0)=0, s(1)=1, with zero velocity and acceleration at both ends.
    """
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau={tau!r} outside [0, 1]")
    return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))


__all__ = [
    "DomainError",
    "FIELD_NAMES",
    "InsufficientData",
    "NormError",
    "ParseError",
    "RecordingMeta",
    "SchemaError",
    "frame_to_record",
    "minimum_jerk",
    "parse_frames",
    "record_to_frame",
    "resample_frames",
    "write_frames",
]
