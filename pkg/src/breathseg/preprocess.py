"""Low-pass filtering and short-time energy extraction.

The raw recording is low-pass filtered with a 6th-order Butterworth
biquad cascade, cut into overlapping frames whose energies form E[n], and
E[n] is block-averaged to the coarse rate the segmenter searches over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import DesignError, ValidationError
from .signal_io import AudioBuffer


@dataclass(frozen=True)
class Biquad:
    b: tuple[float, float, float]
    a: tuple[float, float, float]  # a[0] == 1

    def poles(self) -> np.ndarray:
        return np.roots(self.a)


@dataclass(frozen=True)
class FilterCascade:
    sections: tuple[Biquad, ...]
    order: int
    cutoff_hz: float
    sample_rate: int

    @property
    def sos(self) -> np.ndarray:
        """Second-order sections in the ``[b0 b1 b2 1 a1 a2]`` row layout."""
        return np.array([s.b + s.a for s in self.sections], dtype=np.float64)

    def is_stable(self) -> bool:
        return all(np.all(np.abs(s.poles()) < 1.0) for s in self.sections)

    def response(self, freqs_hz) -> np.ndarray:
        """Complex frequency response evaluated at ``freqs_hz``."""
        z = np.exp(2j * np.pi * np.asarray(freqs_hz, dtype=np.float64) / self.sample_rate)
        h = np.ones_like(z)
        for s in self.sections:
            num = s.b[0] * z**2 + s.b[1] * z + s.b[2]
            den = s.a[0] * z**2 + s.a[1] * z + s.a[2]
            h = h * num / den
        return h

    def gain_db(self, freqs_hz) -> np.ndarray:
        return 20.0 * np.log10(np.abs(self.response(freqs_hz)))


def design_butterworth_lowpass(order: int, cutoff_hz: float, sample_rate: int) -> FilterCascade:
    """Butterworth low-pass as a cascade of biquads.

    Analog prototype poles are placed on a circle of radius equal to the
    pre-warped cutoff and mapped with the bilinear transform, one conjugate
    pair per section. Odd orders get a trailing first-order section stored
    as a biquad with zero second-order terms.
    """
    if order < 1:
        raise DesignError(f"filter order must be >= 1, got {order}")
    if not 0 < cutoff_hz < sample_rate / 2:
        raise DesignError(
            f"cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({sample_rate / 2} Hz)"
        )
    fs2 = 2.0 * sample_rate
    wc = fs2 * math.tan(math.pi * cutoff_hz / sample_rate)

    sections = []
    for k in range(order // 2):
        theta = math.pi * (2 * k + order + 1) / (2 * order)
        re = wc * math.cos(theta)  # < 0 for left half-plane poles
        mag2 = wc * wc
        a0 = fs2 * fs2 - 2.0 * re * fs2 + mag2
        a1 = 2.0 * (mag2 - fs2 * fs2)
        a2 = fs2 * fs2 + 2.0 * re * fs2 + mag2
        g = mag2 / a0
        sections.append(Biquad((g, 2.0 * g, g), (1.0, a1 / a0, a2 / a0)))
    if order % 2:
        a0 = fs2 + wc
        g = wc / a0
        sections.append(Biquad((g, g, 0.0), (1.0, (wc - fs2) / a0, 0.0)))
    return FilterCascade(tuple(sections), order, float(cutoff_hz), int(sample_rate))


def filter_signal(audio: AudioBuffer, filt: FilterCascade) -> AudioBuffer:
    """Single causal pass through the cascade from zero initial state."""
    if filt.sample_rate != audio.sample_rate:
        raise ValidationError(
            f"filter designed for {filt.sample_rate} Hz applied to {audio.sample_rate} Hz audio"
        )
    y = sps.sosfilt(filt.sos, audio.samples)
    return AudioBuffer(y, audio.sample_rate)


@dataclass(frozen=True, eq=False)
class EnergySignal:
    """Frame-wise energies and the rate at which frames occur."""

    values: np.ndarray
    frame_rate: float
    win_s: float
    hop_s: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValidationError("energy must be 1-D")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValidationError("energy values must be finite and non-negative")
        if not self.frame_rate > 0:
            raise ValidationError("frame rate must be positive")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.frame_rate


def frame_count(n_samples: int, win: int, hop: int) -> int:
    if n_samples < win:
        return 0
    return (n_samples - win) // hop + 1


def short_time_energy(audio: AudioBuffer, win_s: float = 0.1, hop_s: float = 0.01) -> EnergySignal:
    """Sum of squared samples per frame; frames overrunning the end are dropped."""
    if not 0 < hop_s <= win_s:
        raise ValidationError(f"need 0 < hop ({hop_s}) <= window ({win_s})")
    fs = audio.sample_rate
    win = int(math.floor(win_s * fs + 1e-9))
    hop = int(math.floor(hop_s * fs + 1e-9))
    if win < 1 or hop < 1:
        raise ValidationError("window and hop must span at least one sample")
    n = frame_count(len(audio), win, hop)
    if n == 0:
        raise ValidationError(
            f"audio of {len(audio)} samples is shorter than one {win}-sample window"
        )
    frames = np.lib.stride_tricks.sliding_window_view(audio.samples, win)[::hop][:n]
    energy = np.einsum("ij,ij->i", frames, frames)
    return EnergySignal(energy, fs / hop, win_s, hop / fs)


def downsample_energy(energy: EnergySignal, factor: int = 10) -> EnergySignal:
    """Non-overlapping block means; a partial trailing block is averaged too."""
    if int(factor) != factor or factor < 1:
        raise ValidationError(f"downsample factor must be a positive integer, got {factor}")
    factor = int(factor)
    if len(energy) == 0:
        raise ValidationError("cannot downsample an empty energy signal")
    if factor == 1:
        return energy
    x = energy.values
    n_blocks = -(-len(x) // factor)
    starts = np.arange(n_blocks) * factor
    sums = np.add.reduceat(x, starts)
    counts = np.minimum(starts + factor, len(x)) - starts
    return EnergySignal(
        sums / counts, energy.frame_rate / factor, energy.win_s, energy.hop_s * factor
    )
