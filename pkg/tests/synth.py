"""Deterministic synthetic inputs shared across the test suite.

Carriers imitate the parts of real music the embedding cares about: sustained
low-frequency content in the carrier bins, melodic tones with note onsets,
percussive transients (frame-to-frame spectral movement is what makes
misaligned reads jittery), and a noise floor.
"""

from __future__ import annotations

import numpy as np

from curvestego import AudioClip, Curve


def synth_carrier(n_samples: int, sample_rate: int = 44100, seed: int = 0,
                  bass: float = 0.03) -> AudioClip:
    rng = np.random.default_rng(seed)
    n = int(n_samples)
    t = np.arange(n) / sample_rate
    x = np.zeros(n)

    def envelope(rate_hz, lo=0.15, hi=1.0):
        k = max(int(n * rate_hz / sample_rate), 4)
        knots = rng.uniform(lo, hi, k)
        return np.interp(np.arange(n), np.linspace(0, n - 1, k), knots)

    # sustained bass around the lowest analysis bins
    for f, amp in ((43.0, bass), (88.0, 0.8 * bass)):
        x += amp * envelope(1.5) * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))

    # melodic notes with sharp attacks and exponential decays
    n_notes = max(int(3.0 * n / sample_rate), 3)
    onsets = np.sort(rng.integers(0, n, n_notes))
    for onset in onsets:
        f = rng.uniform(150, 2500)
        dur = int(rng.uniform(0.1, 0.5) * sample_rate)
        dur = min(dur, n - onset)
        if dur < 100:
            continue
        tt = np.arange(dur) / sample_rate
        tone = np.sin(2 * np.pi * f * tt + rng.uniform(0, 2 * np.pi))
        tone += 0.4 * np.sin(2 * np.pi * 2 * f * tt)
        x[onset : onset + dur] += 0.18 * rng.uniform(0.4, 1.0) * tone * np.exp(-tt * 8)

    # percussive noise bursts
    n_hits = max(int(2.0 * n / sample_rate), 2)
    for onset in np.sort(rng.integers(0, n, n_hits)):
        dur = min(int(0.06 * sample_rate), n - onset)
        if dur < 50:
            continue
        burst = rng.normal(size=dur) * np.exp(-np.arange(dur) / (0.01 * sample_rate))
        x[onset : onset + dur] += 0.15 * burst

    x += 0.01 * rng.normal(size=n)
    x *= 0.5 / np.max(np.abs(x))
    return AudioClip(samples=x, sample_rate=sample_rate)


def tonal_carrier(n_samples: int, sample_rate: int = 44100, seed: int = 0,
                  window: int = 1024, carrier_level: float = 1e-5) -> AudioClip:
    """Carrier with almost nothing in the embedding bins.

    All strong content sits exactly on analysis-bin frequencies >= 4, so it
    leaks nothing into bins 1 and 2; those bins get only a faint enveloped
    tone (nonzero variance, negligible energy).  Useful for limit cases where
    the perturbation must vanish.
    """
    rng = np.random.default_rng(seed)
    n = int(n_samples)
    t = np.arange(n) / sample_rate
    bin_hz = sample_rate / window
    x = np.zeros(n)

    def envelope(rate_hz):
        k = max(int(n * rate_hz / sample_rate), 4)
        knots = rng.uniform(0.3, 1.0, k)
        return np.interp(np.arange(n), np.linspace(0, n - 1, k), knots)

    for k in (4, 7, 11, 18, 29, 47):
        x += 0.12 * envelope(2.0) * np.sin(2 * np.pi * (k * bin_hz) * t
                                           + rng.uniform(0, 2 * np.pi))
    for k in (1, 2):
        x += carrier_level * envelope(1.0) * np.sin(2 * np.pi * (k * bin_hz) * t)
    x *= 0.5 / np.max(np.abs(x))
    return AudioClip(samples=x, sample_rate=sample_rate)


def ellipse_curve(a: float = 2.0, b: float = 1.0, n: int = 600) -> Curve:
    th = 2 * np.pi * np.arange(n) / n
    return Curve(points=np.column_stack([a * np.cos(th), b * np.sin(th)]))


def star_curve(n: int = 600, points: int = 5, inner: float = 0.45) -> Curve:
    th = 2 * np.pi * np.arange(n) / n
    r = 1.0 + (inner - 1.0) * (np.cos(points * th) < 0)
    # smooth the radius so the outline is a gentle star
    k = np.exp(-0.5 * (np.arange(-25, 26) / 8.0) ** 2)
    k /= k.sum()
    r = np.convolve(np.tile(r, 3), k, mode="same")[n : 2 * n]
    return Curve(points=np.column_stack([r * np.cos(th), r * np.sin(th)]))


def trefoil_curve(n: int = 600) -> Curve:
    th = 2 * np.pi * np.arange(n) / n
    x = np.sin(th) + 2 * np.sin(2 * th)
    y = np.cos(th) - 2 * np.cos(2 * th)
    z = -np.sin(3 * th)
    return Curve(points=np.column_stack([x, y, z]))


def checker_image(h: int = 96, w: int = 96) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.where(((yy // 16) + (xx // 16)) % 2 == 0, 0.95, 0.25)
    return img.astype(np.float64)


def disk_image(h: int = 96, w: int = 96, r: float = 28.0) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    d = np.hypot(yy - h / 2, xx - w / 2)
    return np.where(d <= r, 0.0, 1.0).astype(np.float64)
