"""Audio, label and report file I/O.

WAV files are parsed directly from the RIFF chunk layout so that every
failure maps onto a specific error class. Only PCM16 and float32 payloads
are decoded. Label files use the tab-separated ``start<TAB>end<TAB>label``
layout understood by common audio editors.
"""

from __future__ import annotations

import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import (
    AudioIOError,
    FormatError,
    ParseError,
    RateError,
    UnsupportedError,
    ValidationError,
)

MIN_SAMPLE_RATE = 4000
LABELS = ("inhale", "exhale")

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono audio samples with their sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValidationError("audio must be mono (1-D)")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("audio contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValidationError(f"sample rate must be positive, got {self.sample_rate}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate

    def power(self) -> float:
        """Mean squared amplitude."""
        return float(np.mean(self.samples**2)) if len(self) else 0.0


@dataclass(frozen=True)
class Phase:
    start_s: float
    end_s: float
    label: str


@dataclass(frozen=True)
class LabelTrack:
    """Contiguous, alternating inhale/exhale phases."""

    phases: tuple[Phase, ...] = field(default_factory=tuple)

    def __post_init__(self):
        phases = tuple(p if isinstance(p, Phase) else Phase(*p) for p in self.phases)
        object.__setattr__(self, "phases", phases)
        for i, p in enumerate(phases):
            if p.label not in LABELS:
                raise ParseError(f"unknown label {p.label!r} in phase {i}")
            if not (math.isfinite(p.start_s) and math.isfinite(p.end_s)):
                raise ValidationError(f"phase {i} has non-finite times")
            if not p.start_s < p.end_s:
                raise ValidationError(f"phase {i} has start {p.start_s} >= end {p.end_s}")
            if i:
                prev = phases[i - 1]
                if abs(p.start_s - prev.end_s) > 1e-9:
                    raise ValidationError(
                        f"phases {i - 1} and {i} are not contiguous "
                        f"({prev.end_s:.6f} -> {p.start_s:.6f})"
                    )
                if p.label == prev.label:
                    raise ValidationError(f"phases {i - 1} and {i} do not alternate labels")

    @classmethod
    def from_boundaries(cls, times: Sequence[float], first_label: str = "inhale") -> "LabelTrack":
        if first_label not in LABELS:
            raise ValidationError(f"unknown label {first_label!r}")
        start = LABELS.index(first_label)
        phases = [
            Phase(float(a), float(b), LABELS[(start + i) % 2])
            for i, (a, b) in enumerate(zip(times[:-1], times[1:]))
        ]
        return cls(tuple(phases))

    @property
    def boundaries(self) -> np.ndarray:
        """Sorted union of all phase endpoints, in seconds."""
        if not self.phases:
            return np.empty(0)
        pts = [self.phases[0].start_s] + [p.end_s for p in self.phases]
        return np.asarray(pts, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.phases)


def _atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise AudioIOError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise AudioIOError(f"cannot write {path}: {exc}") from exc


# --------------------------------------------------------------------------- WAV


def _iter_chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        yield cid, pos + 8, size
        pos += 8 + size + (size & 1)


def read_wav(path: str | os.PathLike) -> AudioBuffer:
    """Decode a PCM16 or float32 WAV file into a mono buffer.

    Multi-channel audio is averaged to mono; PCM16 values are scaled by
    1/32768.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise AudioIOError(f"cannot read {path}: {exc}") from exc

    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    for cid, start, size in _iter_chunks(data):
        if cid == b"fmt ":
            if size < 16 or start + size > len(data):
                raise FormatError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", data, start)
            if fmt[0] == _WAVE_FORMAT_EXTENSIBLE:
                if size < 40:
                    raise FormatError(f"{path}: truncated extensible fmt chunk")
                (sub,) = struct.unpack_from("<H", data, start + 24)
                fmt = (sub,) + fmt[1:]
        elif cid == b"data":
            if fmt is None:
                raise FormatError(f"{path}: data chunk precedes fmt chunk")
            if start + size > len(data):
                raise FormatError(
                    f"{path}: data chunk declares {size} bytes, {len(data) - start} present"
                )
            payload = data[start : start + size]
            break
    if fmt is None:
        raise FormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise FormatError(f"{path}: missing data chunk")

    tag, channels, rate, _byte_rate, block_align, bits = fmt
    if channels < 1 or block_align == 0:
        raise FormatError(f"{path}: invalid channel layout")
    if tag == _WAVE_FORMAT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif tag == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedError(f"{path}: unsupported encoding (format tag {tag}, {bits} bits)")
    if block_align != channels * dtype.itemsize:
        raise FormatError(f"{path}: block align {block_align} inconsistent with format")
    if rate < MIN_SAMPLE_RATE:
        raise RateError(f"{path}: sample rate {rate} Hz below {MIN_SAMPLE_RATE} Hz")

    n_frames = len(payload) // block_align
    if n_frames == 0:
        raise FormatError(f"{path}: no audio frames")
    raw = np.frombuffer(payload[: n_frames * block_align], dtype=dtype)
    frames = raw.reshape(n_frames, channels).astype(np.float64) * scale
    samples = frames.mean(axis=1) if channels > 1 else frames[:, 0]
    if not np.all(np.isfinite(samples)):
        raise FormatError(f"{path}: non-finite sample values")
    return AudioBuffer(samples, rate)


def encode_wav(audio: AudioBuffer, encoding: str = "pcm16") -> bytes:
    if encoding == "pcm16":
        ints = np.clip(np.round(audio.samples * 32768.0), -32768, 32767)
        payload = ints.astype("<i2").tobytes()
        tag, bits = _WAVE_FORMAT_PCM, 16
    elif encoding == "float32":
        payload = audio.samples.astype("<f4").tobytes()
        tag, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
    else:
        raise UnsupportedError(f"unknown encoding {encoding!r}")
    block = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, audio.sample_rate, audio.sample_rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        body += b"\x00"
    return b"RIFF" + struct.pack("<I", len(body)) + body


def write_wav(audio: AudioBuffer, path: str | os.PathLike, encoding: str = "pcm16") -> None:
    _atomic_write(path, encode_wav(audio, encoding))


# ------------------------------------------------------------------------ labels


def format_labels(track: LabelTrack) -> str:
    return "".join(f"{p.start_s:.6f}\t{p.end_s:.6f}\t{p.label}\n" for p in track.phases)


def write_labels(track: LabelTrack, path: str | os.PathLike) -> None:
    if not isinstance(track, LabelTrack):
        track = LabelTrack(tuple(track))
    _atomic_write(path, format_labels(track).encode("ascii"))


def parse_labels(text: str, source: str = "<labels>") -> LabelTrack:
    phases = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t") if "\t" in stripped else stripped.split()
        parts = [p.strip() for p in parts]
        if len(parts) != 3:
            raise ParseError(f"{source}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            start, end = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ParseError(f"{source}:{lineno}: bad time value") from exc
        label = parts[2].lower()
        if label not in LABELS:
            raise ParseError(f"{source}:{lineno}: unknown label {parts[2]!r}")
        phases.append(Phase(start, end, label))
    return LabelTrack(tuple(phases))


def read_labels(path: str | os.PathLike) -> LabelTrack:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise AudioIOError(f"cannot read {path}: {exc}") from exc
    return parse_labels(text, str(path))


# ----------------------------------------------------------------------- reports


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps_report(report: Any) -> str:
    doc = report.to_dict() if hasattr(report, "to_dict") else report
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def write_report(report: Any, path: str | os.PathLike) -> None:
    """Write ``report`` (anything with ``to_dict()`` or a dict) as key-sorted JSON."""
    _atomic_write(path, dumps_report(report).encode("utf-8"))


def write_text(text: str, path: str | os.PathLike) -> None:
    _atomic_write(path, text.encode("utf-8"))

