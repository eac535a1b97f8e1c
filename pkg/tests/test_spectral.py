import numpy as np
import pytest

from curvestego import AudioClip, istft, stft, sws, sws_adjoint
from curvestego.spectral import Spectrogram


def naive_sws(row, ell):
    n = len(row)
    return np.array([row[j : j + ell].sum() for j in range(n - ell + 1)])


def test_stft_constant_signal_is_dc_only():
    clip = AudioClip(samples=np.ones(16), sample_rate=8000)
    spec = stft(clip, 4)
    assert np.allclose(spec.mag[0], 4.0)
    assert np.allclose(spec.mag[1:], 0.0, atol=1e-12)


def test_stft_cosine_at_bin_one():
    n = np.arange(64)
    clip = AudioClip(samples=np.cos(2 * np.pi * n / 8), sample_rate=8000)
    spec = stft(clip, 8)
    assert np.allclose(spec.mag[1], 4.0)  # w/2 for a unit cosine


def test_stft_frame_count():
    rng = np.random.default_rng(0)
    clip = AudioClip(samples=rng.uniform(-1, 1, 10 * 32), sample_rate=8000)
    assert stft(clip, 32).n_frames == 10


def test_stft_rejects_short_clip():
    clip = AudioClip(samples=np.ones(7), sample_rate=8000)
    with pytest.raises(ValueError):
        stft(clip, 8)


def test_istft_roundtrip_white_noise():
    rng = np.random.default_rng(3)
    x = rng.uniform(-1, 1, 12 * 64 + 23)
    clip = AudioClip(samples=x, sample_rate=44100)
    spec = stft(clip, 64)
    out = istft(spec, remainder=x[12 * 64 :])
    assert len(out.samples) == len(x)
    assert np.max(np.abs(out.samples - x)) < 1e-9


def test_istft_empty_remainder_length():
    rng = np.random.default_rng(4)
    clip = AudioClip(samples=rng.uniform(-1, 1, 5 * 16), sample_rate=8000)
    out = istft(stft(clip, 16))
    assert len(out.samples) == 5 * 16


def test_istft_single_bin_change_adds_one_sinusoid_per_frame():
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.5, 0.5, 4 * 32)
    clip = AudioClip(samples=x, sample_rate=8000)
    spec = stft(clip, 32)
    mag2 = spec.mag.copy()
    mag2[3] *= 2.0
    out = istft(
        Spectrogram(mag=mag2, phase=spec.phase, window_length=32, sample_rate=8000)
    )
    diff = (out.samples - x).reshape(4, 32)
    # each frame's difference must be a pure bin-3 sinusoid
    d_spec = np.fft.rfft(diff, axis=1)
    power = np.abs(d_spec) ** 2
    assert np.all(power[:, 3] > 1e-12)
    power[:, 3] = 0
    assert np.max(power) < 1e-18


def test_real_bins_have_real_phase():
    rng = np.random.default_rng(6)
    clip = AudioClip(samples=rng.uniform(-1, 1, 8 * 16), sample_rate=8000)
    spec = stft(clip, 16)
    for row in (spec.phase[0], spec.phase[-1]):
        assert np.all(np.isin(np.round(row / np.pi), (-0.0, 0.0, 1.0)))


def test_sws_direct_example():
    assert np.allclose(sws([1, 2, 3, 4], 2), [3, 5, 7])


def test_sws_identity_window():
    rng = np.random.default_rng(7)
    row = rng.uniform(0, 1, 50)
    assert np.allclose(sws(row, 1), row)


def test_sws_matches_naive_oracle():
    rng = np.random.default_rng(8)
    row = rng.uniform(0, 1, 1000)
    for ell in (1, 2, 16, 1000):
        assert np.max(np.abs(sws(row, ell) - naive_sws(row, ell))) <= 1e-9


def test_sws_window_out_of_range():
    with pytest.raises(ValueError):
        sws([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        sws([1.0, 2.0], 0)


def test_sws_linearity():
    rng = np.random.default_rng(9)
    u = rng.normal(size=300)
    v = rng.normal(size=300)
    a, b = 2.5, -1.25
    lhs = sws(a * u + b * v, 7)
    rhs = a * sws(u, 7) + b * sws(v, 7)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_sws_adjoint_inner_product():
    rng = np.random.default_rng(10)
    for ell in (1, 4, 33):
        u = rng.normal(size=200)
        v = rng.normal(size=200 - ell + 1)
        lhs = float(sws(u, ell) @ v)
        rhs = float(u @ sws_adjoint(v, 200, ell))
        assert abs(lhs - rhs) <= 1e-9


def test_spectrogram_validation():
    with pytest.raises(ValueError):
        Spectrogram(
            mag=-np.ones((3, 2)), phase=np.zeros((3, 2)),
            window_length=4, sample_rate=8000,
        )
    with pytest.raises(ValueError):
        Spectrogram(
            mag=np.ones((3, 2)), phase=np.zeros((4, 2)),
            window_length=4, sample_rate=8000,
        )


def test_perfect_reconstruction_sweep():
    rng = np.random.default_rng(11)
    for w in (2, 8, 64, 256):
        x = rng.uniform(-1, 1, w * 7 + w // 2)
        clip = AudioClip(samples=x, sample_rate=44100)
        out = istft(stft(clip, w), remainder=x[(len(x) // w) * w :])
        assert np.max(np.abs(out.samples - x)) < 1e-9
