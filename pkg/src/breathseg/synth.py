"""Synthetic breath recordings with exactly known phase boundaries.

Each phase is band-limited white noise whose amplitude follows the square
root of a triangle, so the short-time energy of the phase is triangular:
the generative counterpart of the triangle-train model the segmenter fits.
Inhale phases are scaled by ``inhale_gain`` so that the breath (two-phase)
periodicity dominates the energy spectrum, as it does for mouth-recorded
breathing where inhalation is the quieter phase.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import BreathSegError, SpecError
from .preprocess import design_butterworth_lowpass, filter_signal
from .signal_io import LABELS, AudioBuffer, LabelTrack, Phase, write_labels, write_report, write_wav

CARRIER_CUTOFF_HZ = 1500.0
MIN_PHASE_S = 0.03  # three 10 ms energy frames


@dataclass(frozen=True)
class SynthSpec:
    n_breaths: int = 4
    mean_phase_s: float = 2.0
    jitter: float = 0.2
    amp_range: tuple[float, float] = (0.08, 0.15)
    sample_rate: int = 16000
    seed: int = 0
    inhale_gain: float = 0.4

    def __post_init__(self):
        if int(self.n_breaths) != self.n_breaths or self.n_breaths < 1:
            raise SpecError(f"n_breaths must be a positive integer, got {self.n_breaths}")
        if not self.mean_phase_s > 0:
            raise SpecError("mean_phase_s must be positive")
        if not 0 <= self.jitter < 1:
            raise SpecError(f"jitter must lie in [0, 1), got {self.jitter}")
        lo, hi = self.amp_range
        if not 0 < lo <= hi:
            raise SpecError(f"amp_range must satisfy 0 < min <= max, got {self.amp_range}")
        if self.sample_rate < 4000:
            raise SpecError("sample_rate must be at least 4000 Hz")
        if not 0 < self.inhale_gain <= 1:
            raise SpecError("inhale_gain must lie in (0, 1]")
        object.__setattr__(self, "amp_range", (float(lo), float(hi)))


def _phase_edges(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    n_phases = 2 * spec.n_breaths
    durations = spec.mean_phase_s * (1.0 + spec.jitter * rng.uniform(-1.0, 1.0, n_phases))
    edges = np.round(np.concatenate(([0.0], np.cumsum(durations))) * spec.sample_rate)
    edges = edges.astype(np.int64)
    shortest = int(np.min(np.diff(edges)))
    if shortest < MIN_PHASE_S * spec.sample_rate:
        raise SpecError(f"a phase of {shortest} samples is shorter than {MIN_PHASE_S} s")
    return edges


def synth_breath(spec: SynthSpec) -> tuple[AudioBuffer, LabelTrack]:
    rng = np.random.default_rng(spec.seed)
    edges = _phase_edges(spec, rng)
    n_phases = len(edges) - 1
    amps = rng.uniform(*spec.amp_range, n_phases)
    amps[0::2] *= spec.inhale_gain  # phases alternate starting with inhale

    fs = spec.sample_rate
    carrier = rng.standard_normal(int(edges[-1]))
    lowpass = design_butterworth_lowpass(6, min(CARRIER_CUTOFF_HZ, 0.4 * fs), fs)
    carrier = filter_signal(AudioBuffer(carrier, fs), lowpass).samples
    carrier = carrier / np.sqrt(np.mean(carrier**2))

    env = np.empty_like(carrier)
    for p in range(n_phases):
        a, b = int(edges[p]), int(edges[p + 1])
        t = (np.arange(a, b) + 0.5 - a) / (b - a)
        env[a:b] = amps[p] * np.sqrt(1.0 - np.abs(2.0 * t - 1.0))
    audio = AudioBuffer(carrier * env, fs)

    times = edges / fs
    phases = tuple(
        Phase(float(times[p]), float(times[p + 1]), LABELS[p % 2]) for p in range(n_phases)
    )
    return audio, LabelTrack(phases)


def synth_corpus(specs, out_dir: str | os.PathLike, prefix: str = "breath") -> dict:
    """Write one WAV and one label file per spec plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, spec in enumerate(specs):
        stem = f"{prefix}_{i:03d}"
        entry = {"index": i, "seed": spec.seed, "spec": asdict(spec)}
        try:
            audio, track = synth_breath(spec)
            write_wav(audio, out / f"{stem}.wav")
            write_labels(track, out / f"{stem}.txt")
            entry.update(wav=f"{stem}.wav", labels=f"{stem}.txt", status="ok",
                         duration_s=audio.duration_s, n_phases=len(track))
        except (BreathSegError, OSError) as exc:
            entry.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        entries.append(entry)
    manifest = {"count": len(entries), "entries": entries}
    write_report(manifest, out / "manifest.json")
    return manifest
