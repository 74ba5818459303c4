import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal as sps

from breathseg.errors import DesignError, ValidationError
from breathseg.preprocess import (
    EnergySignal,
    design_butterworth_lowpass,
    downsample_energy,
    filter_signal,
    short_time_energy,
)
from breathseg.signal_io import AudioBuffer


@pytest.fixture(scope="module")
def lp44():
    return design_butterworth_lowpass(6, 2000.0, 44100)


def test_cascade_shape(lp44):
    assert len(lp44.sections) == 3
    assert lp44.is_stable()
    assert lp44.sos.shape == (3, 6)


def test_response_landmarks(lp44):
    assert lp44.gain_db([2000.0])[0] == pytest.approx(-3.0103, abs=0.1)
    assert lp44.gain_db([0.0])[0] == pytest.approx(0.0, abs=0.01)
    assert lp44.gain_db([4000.0])[0] <= -30.0


def test_octave_above_cutoff_follows_warped_prototype(lp44):
    ratio = math.tan(math.pi * 4000 / 44100) / math.tan(math.pi * 2000 / 44100)
    expected = -10 * math.log10(1 + ratio**12)  # -37.21 dB
    assert lp44.gain_db([4000.0])[0] == pytest.approx(expected, abs=1e-9)


@pytest.mark.xfail(
    strict=True,
    reason="frequency warping puts the digital response at 4 kHz 1.08 dB below the analog -36.12 dB",
)
def test_octave_above_cutoff_near_analog_value(lp44):
    analog = -10 * math.log10(1 + 2**12)
    assert lp44.gain_db([4000.0])[0] == pytest.approx(analog, abs=0.5)


def test_matches_prewarped_analog_prototype(lp44):
    fs, fc = 44100, 2000.0
    f = np.linspace(10, 20000, 200)
    warp = lambda v: math.tan(math.pi * v / fs)  # noqa: E731
    expected = 1.0 / (1.0 + (np.tan(np.pi * f / fs) / warp(fc)) ** 12)
    np.testing.assert_allclose(np.abs(lp44.response(f)) ** 2, expected, rtol=1e-9, atol=1e-15)


@pytest.mark.parametrize("fs", [8000, 16000, 44100, 48000])
def test_agrees_with_scipy_design(fs):
    ours = design_butterworth_lowpass(6, 2000.0, fs)
    ref = sps.butter(6, 2000.0, fs=fs, output="sos")
    f = np.linspace(0, fs / 2 * 0.99, 300)
    _, h_ref = sps.sosfreqz(ref, worN=f, fs=fs)
    np.testing.assert_allclose(np.abs(ours.response(f)), np.abs(h_ref), atol=1e-10)


def test_odd_order_is_still_butterworth():
    filt = design_butterworth_lowpass(5, 1000.0, 16000)
    assert len(filt.sections) == 3
    assert filt.gain_db([1000.0])[0] == pytest.approx(-3.0103, abs=1e-6)


@pytest.mark.parametrize("cutoff", [8000.0, 9000.0, 0.0, -1.0])
def test_design_rejects_bad_cutoff(cutoff):
    with pytest.raises(DesignError):
        design_butterworth_lowpass(6, cutoff, 16000)


def _direct_form(filt, x):
    y = np.asarray(x, dtype=float)
    for s in filt.sections:
        b, a = s.b, s.a
        out = np.zeros_like(y)
        for n in range(len(y)):
            acc = b[0] * y[n]
            if n >= 1:
                acc += b[1] * y[n - 1] - a[1] * out[n - 1]
            if n >= 2:
                acc += b[2] * y[n - 2] - a[2] * out[n - 2]
            out[n] = acc
        y = out
    return y


def test_filter_matches_difference_equation():
    filt = design_butterworth_lowpass(6, 2000.0, 16000)
    x = np.random.default_rng(0).standard_normal(600)
    y = filter_signal(AudioBuffer(x, 16000), filt).samples
    np.testing.assert_allclose(y, _direct_form(filt, x), atol=1e-12)


def test_filter_basic_cases():
    filt = design_butterworth_lowpass(6, 2000.0, 16000)
    zeros = filter_signal(AudioBuffer(np.zeros(1000), 16000), filt)
    assert len(zeros) == 1000 and not zeros.samples.any()

    dc = filter_signal(AudioBuffer(np.full(4000, 0.3), 16000), filt).samples
    assert np.max(np.abs(dc[2000:] - 0.3)) < 1e-3

    t = np.arange(16000) / 16000
    tone = filter_signal(AudioBuffer(np.sin(2 * np.pi * 4000 * t), 16000), filt).samples
    steady = np.max(np.abs(tone[8000:]))
    assert 20 * np.log10(steady) <= -30.0


def test_filter_rate_mismatch():
    filt = design_butterworth_lowpass(6, 2000.0, 16000)
    with pytest.raises(ValidationError):
        filter_signal(AudioBuffer(np.zeros(10), 44100), filt)


def _impulse_tail(fs, n):
    filt = design_butterworth_lowpass(6, 2000.0, fs)
    imp = np.zeros(n + 50)
    imp[0] = 1.0
    h = filter_signal(AudioBuffer(imp, fs), filt).samples
    return np.max(np.abs(h[n:]))


@pytest.mark.parametrize("fs", [8000, 16000, 44100])
def test_impulse_response_decays(fs):
    # slowest pole pair decays as exp(-sin(pi/12) * wc * t); 1e-9 needs ~12-19 fs/fc samples
    assert _impulse_tail(fs, int(20 * fs / 2000.0)) < 1e-9


@pytest.mark.xfail(strict=True, reason="1e-9 is unreachable within 10*fs/fc samples for order 6")
@pytest.mark.parametrize("fs", [8000, 16000, 44100])
def test_impulse_response_decays_within_ten_cutoff_periods(fs):
    filt = design_butterworth_lowpass(6, 2000.0, fs)
    n = int(10 * fs / 2000.0)
    imp = np.zeros(n + 50)
    imp[0] = 1.0
    h = filter_signal(AudioBuffer(imp, fs), filt).samples
    assert np.max(np.abs(h[n:])) < 1e-9


# ----------------------------------------------------------------- energy


def test_energy_constant():
    e = short_time_energy(AudioBuffer(np.ones(1000), 1000), 0.1, 0.01)
    assert np.all(e.values == 100.0)
    assert e.frame_rate == 100.0


def test_energy_zero():
    e = short_time_energy(AudioBuffer(np.zeros(5000), 1000))
    assert not e.values.any()


def test_energy_hand_case():
    e = short_time_energy(AudioBuffer([1.0, 2.0, 3.0, 4.0], 20), win_s=0.1, hop_s=0.05)
    assert e.values.tolist() == [5.0, 13.0, 25.0]


def test_energy_too_short():
    with pytest.raises(ValidationError):
        short_time_energy(AudioBuffer(np.ones(50), 1000), 0.1, 0.01)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(100, 3000),
    win=st.integers(1, 100),
    hop=st.integers(1, 100),
    seed=st.integers(0, 2**16),
)
def test_energy_frame_count_and_sign(n, win, hop, seed):
    if hop > win or n < win:
        return
    x = np.random.default_rng(seed).standard_normal(n)
    e = short_time_energy(AudioBuffer(x, 1000), win / 1000, hop / 1000)
    assert len(e) == (n - win) // hop + 1
    assert np.all(e.values >= 0)
    k = len(e) - 1
    assert e.values[k] == pytest.approx(np.sum(x[k * hop : k * hop + win] ** 2))


def _energy(values, rate=100.0):
    return EnergySignal(np.asarray(values, dtype=float), rate, 0.1, 1 / rate)


def test_downsample_examples():
    assert downsample_energy(_energy(np.arange(1, 11)), 10).values.tolist() == [5.5]
    assert downsample_energy(_energy(np.arange(1, 13)), 10).values.tolist() == [5.5, 11.5]
    same = _energy([3.0, 1.0, 2.0])
    assert downsample_energy(same, 1).values.tolist() == [3.0, 1.0, 2.0]
    assert downsample_energy(_energy(np.ones(30)), 10).frame_rate == 10.0


def test_downsample_bad_factor():
    with pytest.raises(ValidationError):
        downsample_energy(_energy([1.0]), 0)


@settings(max_examples=60, deadline=None)
@given(
    values=st.lists(st.floats(0, 1e3, allow_nan=False), min_size=1, max_size=300),
    factor=st.integers(1, 14),
)
def test_downsample_preserves_mean(values, factor):
    e = _energy(values)
    d = downsample_energy(e, factor)
    assert len(d) == math.ceil(len(values) / factor)
    bound = max(values) * factor / len(values) + 1e-9
    assert abs(d.values.mean() - e.values.mean()) <= bound
