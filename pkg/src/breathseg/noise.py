"""Additive-noise robustness bench.

Noise sources are seeded NumPy ``Generator`` streams (PCG64), so a given
seed reproduces the same samples on every platform NumPy supports.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BreathSegError, PowerError, ValidationError
from .signal_io import AudioBuffer, LabelTrack, read_wav

NOISE_KINDS = ("gaussian", "pink", "file")
PINK_ROWS = 16


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "gaussian"
    path: str | None = None
    seed: int = 0
    snr_db: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValidationError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ValidationError("file noise requires a path")
        if not math.isfinite(self.snr_db):
            raise ValidationError("snr_db must be finite")


def _unit_power(x: np.ndarray) -> np.ndarray:
    x = x - x.mean()
    return x / math.sqrt(float(np.mean(x * x)))


def gen_gaussian(n: int, seed: int = 0) -> np.ndarray:
    """Unit-power white Gaussian noise."""
    if n <= 0:
        raise ValidationError("noise length must be positive")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    return x / math.sqrt(float(np.mean(x * x)))


def gen_pink(n: int, seed: int = 0, rows: int = PINK_ROWS) -> np.ndarray:
    """Voss-McCartney pink noise with ``rows`` octave-spaced generators.

    Row r holds a random value that is redrawn every 2**r samples, the
    update instants staggered so that at most one row changes per sample
    (row r changes when the sample counter has exactly r trailing zeros).
    A per-sample white term fills in the top octave.
    """
    if n <= 0:
        raise ValidationError("noise length must be positive")
    rng = np.random.default_rng(seed)
    idx = np.arange(n, dtype=np.int64)
    total = rng.standard_normal(n)
    for r in range(rows):
        period = 1 << r
        # row r redraws at counters with exactly r trailing zeros
        n_draws = (n + period) // (2 * period) + 1
        draws = rng.standard_normal(n_draws)
        total += draws[(idx + period) // (2 * period)]
    return _unit_power(total)


def load_noise(path: str) -> AudioBuffer:
    return read_wav(path)


def _fit_length(noise: np.ndarray, n: int) -> np.ndarray:
    reps = -(-n // len(noise))
    return np.tile(noise, reps)[:n]


def _resample_linear(x: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    if rate_in == rate_out:
        return x
    n_out = max(int(round(len(x) * rate_out / rate_in)), 1)
    t_out = np.arange(n_out) * (rate_in / rate_out)
    return np.interp(t_out, np.arange(len(x)), x)


def mix_at_snr(audio: AudioBuffer, noise, snr_db: float, noise_rate: int | None = None) -> AudioBuffer:
    """Add ``noise`` scaled so the whole-signal SNR equals ``snr_db``.

    ``noise`` may be an ``AudioBuffer`` (resampled linearly to the signal
    rate if needed) or a bare array taken to be at the signal rate. It is
    looped or truncated to the signal length before scaling.
    """
    if isinstance(noise, AudioBuffer):
        raw = _resample_linear(noise.samples, noise.sample_rate, audio.sample_rate)
    else:
        raw = np.asarray(noise, dtype=np.float64)
        if noise_rate is not None:
            raw = _resample_linear(raw, noise_rate, audio.sample_rate)
    if raw.size == 0:
        raise PowerError("noise is empty")
    p_sig = audio.power()
    if not p_sig > 0:
        raise PowerError("signal has zero power")
    n = _fit_length(raw, len(audio))
    p_noise = float(np.mean(n * n))
    if not p_noise > 0:
        raise PowerError("noise has zero power over the signal length")
    scale = math.sqrt(p_sig / (p_noise * 10.0 ** (snr_db / 10.0)))
    return AudioBuffer(audio.samples + scale * n, audio.sample_rate)


def snr_db(clean: AudioBuffer, noisy: AudioBuffer) -> float:
    resid = noisy.samples - clean.samples
    return 10.0 * math.log10(clean.power() / float(np.mean(resid * resid)))


def snr_grid(snr_from: float = -30.0, snr_to: float = 20.0, step: float = 5.0) -> list[float]:
    if step <= 0 or snr_to < snr_from:
        raise ValidationError("need step > 0 and snr_to >= snr_from")
    count = int(math.floor((snr_to - snr_from) / step + 1e-9)) + 1
    return [snr_from + i * step for i in range(count)]


def make_noise(spec: NoiseSpec, n: int, sample_rate: int):
    if spec.kind == "gaussian":
        return gen_gaussian(n, spec.seed)
    if spec.kind == "pink":
        return gen_pink(n, spec.seed)
    return load_noise(spec.path)


@dataclass
class SweepRow:
    snr_db: float
    ok: bool
    match_pct: float = float("nan")
    deletion_pct: float = float("nan")
    insertion_pct: float = float("nan")
    segment_match_pct: float = float("nan")
    ovr_mean: float = float("nan")
    ovr_std: float = float("nan")
    P: int | None = None
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "snr_db": self.snr_db,
            "status": "ok" if self.ok else "failed",
            "match_pct": self.match_pct,
            "deletion_pct": self.deletion_pct,
            "insertion_pct": self.insertion_pct,
            "segment_match_pct": self.segment_match_pct,
            "ovr_mean": self.ovr_mean,
            "ovr_std": self.ovr_std,
            "P": self.P,
            "error": self.error,
        }


CSV_FIELDS = (
    "snr_db", "status", "match_pct", "deletion_pct", "insertion_pct",
    "segment_match_pct", "ovr_mean", "ovr_std", "P", "error",
)


def noise_sweep(
    audio: AudioBuffer,
    ref: LabelTrack,
    kind: str = "gaussian",
    snrs: Sequence[float] | None = None,
    config=None,
    seed: int = 0,
    noise_path: str | None = None,
    runner: Callable | None = None,
) -> list[SweepRow]:
    """Mix, segment and score at each SNR; one row per SNR even on failure.

    The same noise realisation is used at every SNR so rows differ only in
    the noise level.
    """
    from .metrics import compute_report
    from .pipeline import PipelineConfig, run_pipeline

    config = config or PipelineConfig()
    runner = runner or run_pipeline
    snrs = snr_grid() if snrs is None else list(snrs)
    base = NoiseSpec(kind=kind, path=noise_path, seed=seed)
    noise = make_noise(base, len(audio), audio.sample_rate)

    rows = []
    for snr in snrs:
        try:
            noisy = mix_at_snr(audio, noise, snr)
            out = runner(noisy, config)
            rep = compute_report(ref, out.track, config.match_threshold_s)
        except BreathSegError as exc:
            rows.append(SweepRow(float(snr), False, error=f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(
            SweepRow(
                float(snr), True, rep.match_pct, rep.deletion_pct, rep.insertion_pct,
                rep.segment_match_pct, rep.ovr_mean, rep.ovr_std, out.result.P,
            )
        )
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else f"{v:.4f}"
    return str(v)


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in rows:
        d = row.to_dict()
        w.writerow([_fmt(d[k]) for k in CSV_FIELDS])
    return buf.getvalue()
