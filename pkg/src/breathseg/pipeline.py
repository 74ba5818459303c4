"""End-to-end segmentation: audio in, labelled phases out."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .dp import SegmentationResult, boundaries_to_track, segment
from .errors import AudioIOError, ParseError, ValidationError
from .preprocess import (
    EnergySignal,
    design_butterworth_lowpass,
    downsample_energy,
    filter_signal,
    short_time_energy,
)
from .rate import ROUND_MODES, RateEstimate, estimate_rate
from .signal_io import LABELS, AudioBuffer, LabelTrack

CONFIG_ENV = "BREATHSEG_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    cutoff_hz: float = 2000.0
    filter_order: int = 6
    win_s: float = 0.1
    hop_s: float = 0.01
    downsample: int = 10
    delta: float = 0.3
    fmin: float = 0.089
    fmax: float = 0.833
    rounding: str = "nearest"
    match_threshold_s: float = 0.5
    phases: int | None = None
    duration: float | None = None
    first_label: str = "inhale"

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.fmin < self.fmax:
            raise ValidationError(f"need 0 < fmin < fmax, got {self.fmin}, {self.fmax}")
        if not 0 < self.hop_s <= self.win_s:
            raise ValidationError(f"need 0 < hop_s <= win_s, got {self.hop_s}, {self.win_s}")
        if self.downsample < 1:
            raise ValidationError("downsample factor must be >= 1")
        if self.rounding not in ROUND_MODES:
            raise ValidationError(f"rounding must be one of {sorted(ROUND_MODES)}")
        if self.first_label not in LABELS:
            raise ValidationError(f"first_label must be one of {LABELS}")
        if self.match_threshold_s <= 0:
            raise ValidationError("match threshold must be positive")
        if self.phases is not None and self.phases < 1:
            raise ValidationError("phases override must be >= 1")
        if self.duration is not None and self.duration <= 0:
            raise ValidationError("duration override must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    if name not in types:
        raise ParseError(f"unknown config key {name!r}")
    kind = types[name]
    if raw.lower() in ("", "none", "null"):
        return None
    try:
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError as exc:
        raise ParseError(f"config key {name!r}: cannot parse {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"config line {lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        values[key] = _coerce(key, raw)
    return values


def load_config(path: str | os.PathLike | None = None, **overrides) -> PipelineConfig:
    """Defaults, then the config file (explicit or via env var), then overrides."""
    values: dict = {}
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise AudioIOError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_config_text(text))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**values)


@dataclass
class PipelineOutput:
    result: SegmentationResult
    track: LabelTrack
    energy: EnergySignal
    energy_d: EnergySignal
    estimate: RateEstimate | None = None
    config: PipelineConfig = field(default_factory=PipelineConfig)

    def to_dict(self) -> dict:
        doc = self.result.to_dict()
        doc["f_peak_hz"] = self.estimate.f_peak if self.estimate else None
        doc["n_breaths"] = self.estimate.n_breaths if self.estimate else None
        doc["estimated"] = self.estimate is not None
        doc["config"] = self.config.to_dict()
        doc["phases"] = [
            {"start_s": p.start_s, "end_s": p.end_s, "label": p.label} for p in self.track.phases
        ]
        return doc


def compute_energy(audio: AudioBuffer, config: PipelineConfig) -> tuple[EnergySignal, EnergySignal]:
    filt = design_butterworth_lowpass(config.filter_order, config.cutoff_hz, audio.sample_rate)
    filtered = filter_signal(audio, filt)
    energy = short_time_energy(filtered, config.win_s, config.hop_s)
    return energy, downsample_energy(energy, config.downsample)


def run_pipeline(audio: AudioBuffer, config: PipelineConfig | None = None) -> PipelineOutput:
    """Filter, frame, estimate P and d (unless overridden), segment, label.

    A ``phases`` override without ``duration`` uses d = len(E_d)/P; a
    ``duration`` override is the mean phase length in seconds.
    """
    config = config or PipelineConfig()
    energy, energy_d = compute_energy(audio, config)
    estimate = None
    if config.phases is None:
        estimate = estimate_rate(
            energy, config.fmin, config.fmax, config.downsample, config.rounding
        )
        P = estimate.P
    else:
        P = config.phases
    if config.duration is not None:
        d = config.duration * energy_d.frame_rate
    elif estimate is not None:
        d = estimate.d
    else:
        d = len(energy_d) / P
    result = segment(energy_d, P, d, config.delta)
    track = boundaries_to_track(result, config.first_label)
    return PipelineOutput(result, track, energy, energy_d, estimate, config)
