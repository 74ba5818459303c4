"""Breath-rate estimation from the periodicity of the energy envelope.

The strongest spectral peak of the mean-removed energy inside the
physiological band is taken as the breathing frequency. Doubling the number
of breaths it implies gives the phase count P, and d = len(E_d)/P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, NoPeriodicityError, ValidationError
from .preprocess import EnergySignal

ROUND_MODES = {
    "nearest": lambda v: math.floor(v + 0.5),
    "floor": math.floor,
    "ceil": math.ceil,
}

# Peak height relative to a full-depth modulation of the mean energy below
# which the envelope is treated as flat.
MIN_MODULATION = 1e-4


@dataclass(frozen=True)
class RateEstimate:
    f_peak: float
    n_breaths: int
    P: int
    d: float
    duration_s: float
    n_downsampled: int

    def to_dict(self) -> dict:
        return {
            "f_peak_hz": self.f_peak,
            "n_breaths": self.n_breaths,
            "P": self.P,
            "d": self.d,
            "duration_s": self.duration_s,
            "n_downsampled": self.n_downsampled,
        }


def magnitude_spectrum(energy: EnergySignal, nfft: int | None = None):
    """One-sided DFT magnitude of the mean-removed energy.

    ``nfft`` defaults to twice the signal length.
    """
    n = len(energy)
    if n < 4:
        raise ValidationError(f"energy signal of {n} frames is too short for a spectrum")
    nfft = 2 * n if nfft is None else int(nfft)
    if nfft < n:
        raise ValidationError(f"nfft={nfft} shorter than the signal ({n})")
    x = energy.values - energy.values.mean()
    mags = np.abs(np.fft.rfft(x, nfft))
    freqs = np.arange(len(mags)) * energy.frame_rate / nfft
    return freqs, mags


def estimate_rate(
    energy: EnergySignal,
    fmin: float = 0.089,
    fmax: float = 0.833,
    downsample: int = 10,
    rounding: str = "nearest",
    nfft: int | None = None,
    min_modulation: float = MIN_MODULATION,
) -> RateEstimate:
    """Estimate breathing frequency, phase count and mean phase length.

    Args:
        energy: full-rate short-time energy E[n].
        fmin, fmax: breathing-frequency search band in Hz (inclusive).
        downsample: factor the segmenter's energy will be reduced by; d is
            expressed in those coarse frames.
        rounding: how f_peak * duration becomes a breath count.
    """
    if not 0 < fmin < fmax:
        raise ValidationError(f"need 0 < fmin < fmax, got {fmin}, {fmax}")
    if rounding not in ROUND_MODES:
        raise ValidationError(f"rounding must be one of {sorted(ROUND_MODES)}")
    freqs, mags = magnitude_spectrum(energy, nfft)
    band = np.flatnonzero((freqs >= fmin) & (freqs <= fmax))
    if band.size == 0:
        raise EstimationError(
            f"no spectral bin falls in [{fmin}, {fmax}] Hz "
            f"(bin spacing {freqs[1]:.4f} Hz); use a longer recording or a larger nfft"
        )
    peak = band[np.argmax(mags[band])]
    peak_mag = mags[peak]
    total_energy = float(np.sum(energy.values))
    if peak_mag <= 1e-12 * float(np.sum(mags)) or 2.0 * peak_mag <= min_modulation * total_energy:
        raise NoPeriodicityError(
            f"energy envelope shows no periodicity between {fmin} and {fmax} Hz"
        )

    f_peak = float(freqs[peak])
    duration = energy.duration_s
    n_breaths = max(int(ROUND_MODES[rounding](f_peak * duration)), 1)
    P = 2 * n_breaths
    n_down = -(-len(energy) // int(downsample))
    return RateEstimate(f_peak, n_breaths, P, n_down / P, duration, n_down)
