import math

import numpy as np
import pytest
from scipy.signal import welch

from breathseg.errors import NoPeriodicityError, PowerError, ValidationError
from breathseg.noise import (
    NoiseSpec,
    gen_gaussian,
    gen_pink,
    mix_at_snr,
    noise_sweep,
    snr_db,
    snr_grid,
    sweep_to_csv,
)
from breathseg.signal_io import AudioBuffer, write_wav


def test_gaussian():
    x = gen_gaussian(10**6, seed=3)
    assert abs(x.mean()) < 0.01
    assert np.mean(x * x) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(x, gen_gaussian(10**6, seed=3))
    assert not np.array_equal(x[:100], gen_gaussian(100, seed=4))


def test_pink_power_and_determinism():
    x = gen_pink(50000, seed=1)
    assert np.mean(x * x) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(x, gen_pink(50000, seed=1))


def test_pink_slope():
    x = gen_pink(2**20, seed=0)
    f, p = welch(x, fs=1.0, nperseg=2**14)

    def band(center):
        sel = (f >= center / math.sqrt(2)) & (f < center * math.sqrt(2))
        return p[sel].mean()

    # ten octave pairs from fs/2**13 up to fs/2**4 (about 2 Hz to 2 kHz at 32 kHz)
    ratios = [band(2.0 ** -(j - 1)) / band(2.0**-j) for j in range(13, 3, -1)]
    assert np.mean(ratios) == pytest.approx(0.5, rel=0.25)


def test_mix_exact_snr():
    rng = np.random.default_rng(0)
    sig = AudioBuffer(rng.standard_normal(8000) * 0.1, 8000)
    noise = gen_gaussian(3000, seed=9)  # shorter than the signal, gets looped
    for target in (0.0, 10.0, -30.0, 17.5):
        noisy = mix_at_snr(sig, noise, target)
        added = noisy.samples - sig.samples
        assert np.mean(added**2) == pytest.approx(sig.power() / 10 ** (target / 10), rel=1e-9)
        assert snr_db(sig, noisy) == pytest.approx(target, abs=1e-9)


def test_mix_resamples_noise_buffer():
    sig = AudioBuffer(np.sin(np.arange(16000) / 5.0), 16000)
    noise = AudioBuffer(gen_gaussian(4000, seed=2), 8000)
    noisy = mix_at_snr(sig, noise, 5.0)
    assert len(noisy) == len(sig)
    assert snr_db(sig, noisy) == pytest.approx(5.0, abs=1e-9)


def test_mix_power_errors():
    sig = AudioBuffer(np.ones(100), 8000)
    with pytest.raises(PowerError):
        mix_at_snr(sig, np.zeros(100), 0.0)
    with pytest.raises(PowerError):
        mix_at_snr(AudioBuffer(np.zeros(100), 8000), np.ones(100), 0.0)


def test_noise_spec_validation():
    with pytest.raises(ValidationError):
        NoiseSpec(kind="file")
    with pytest.raises(ValidationError):
        NoiseSpec(kind="brown")
    with pytest.raises(ValidationError):
        NoiseSpec(snr_db=math.inf)


def test_snr_grid():
    grid = snr_grid()
    assert len(grid) == 11
    assert grid[0] == -30 and grid[-1] == 20


def test_sweep_rows_and_determinism(synth_file):
    audio, ref = synth_file
    rows = noise_sweep(audio, ref, "gaussian", snr_grid(), seed=4)
    assert [r.snr_db for r in rows] == snr_grid()
    assert rows[-1].match_pct >= rows[0].match_pct
    assert sweep_to_csv(rows) == sweep_to_csv(noise_sweep(audio, ref, "gaussian", snr_grid(), seed=4))
    assert sweep_to_csv(rows).count("\n") == 12


def test_sweep_marks_failed_rows(synth_file):
    audio, ref = synth_file

    def flaky(noisy, config):
        raise NoPeriodicityError("flat")

    rows = noise_sweep(audio, ref, "pink", [-5.0, 0.0, 5.0], runner=flaky)
    assert len(rows) == 3
    assert all(not r.ok and "NoPeriodicityError" in r.error for r in rows)
    assert "failed" in sweep_to_csv(rows)


def test_sweep_with_noise_file(synth_file, tmp_path):
    audio, ref = synth_file
    babble = AudioBuffer(0.1 * gen_pink(8000 * 3, seed=7), 8000)
    write_wav(babble, tmp_path / "babble.wav")
    rows = noise_sweep(audio, ref, "file", [10.0], noise_path=str(tmp_path / "babble.wav"))
    assert rows[0].ok
