"""Shared bits for the demo scripts: a synthetic music-like carrier and
simple closed curves, so the demos run without any bundled media files."""

import os

import numpy as np

from curvestego import AudioClip, Curve

OUT_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "output")


def out_path(name):
    os.makedirs(OUT_DIR, exist_ok=True)
    return os.path.join(OUT_DIR, name)


def synth_carrier(n_samples, sample_rate=44100, seed=0, bass=0.03):
    """Music-ish test signal: bass near the carrier bins, melodic notes with
    sharp attacks, percussive bursts, and a noise floor."""
    rng = np.random.default_rng(seed)
    n = int(n_samples)
    t = np.arange(n) / sample_rate
    x = np.zeros(n)

    def envelope(rate_hz, lo=0.15, hi=1.0):
        k = max(int(n * rate_hz / sample_rate), 4)
        knots = rng.uniform(lo, hi, k)
        return np.interp(np.arange(n), np.linspace(0, n - 1, k), knots)

    for f, amp in ((43.0, bass), (88.0, 0.8 * bass)):
        x += amp * envelope(1.5) * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    n_notes = max(int(3.0 * n / sample_rate), 3)
    for onset in np.sort(rng.integers(0, n, n_notes)):
        f = rng.uniform(150, 2500)
        dur = min(int(rng.uniform(0.1, 0.5) * sample_rate), n - onset)
        if dur < 100:
            continue
        tt = np.arange(dur) / sample_rate
        tone = np.sin(2 * np.pi * f * tt + rng.uniform(0, 2 * np.pi))
        tone += 0.4 * np.sin(2 * np.pi * 2 * f * tt)
        x[onset : onset + dur] += 0.18 * rng.uniform(0.4, 1.0) * tone * np.exp(-tt * 8)
    for onset in np.sort(rng.integers(0, n, max(int(2.0 * n / sample_rate), 2))):
        dur = min(int(0.06 * sample_rate), n - onset)
        if dur < 50:
            continue
        burst = rng.normal(size=dur) * np.exp(-np.arange(dur) / (0.01 * sample_rate))
        x[onset : onset + dur] += 0.15 * burst
    x += 0.01 * rng.normal(size=n)
    x *= 0.5 / np.max(np.abs(x))
    return AudioClip(samples=x, sample_rate=sample_rate)


def heart_curve(n=600):
    """A recognizable asymmetric test shape."""
    th = 2 * np.pi * np.arange(n) / n
    x = 16 * np.sin(th) ** 3
    y = 13 * np.cos(th) - 5 * np.cos(2 * th) - 2 * np.cos(3 * th) - np.cos(4 * th)
    return Curve(points=np.column_stack([x, y]) / 16.0)


def test_image(h=128, w=128):
    """Gradient background with a dark disk and a few strokes."""
    yy, xx = np.mgrid[0:h, 0:w]
    img = 0.55 + 0.4 * xx / w
    d = np.hypot(yy - h * 0.45, xx - w * 0.38)
    img[d < h * 0.22] = 0.15
    img[int(h * 0.78), int(w * 0.15) : int(w * 0.9)] = 0.05
    img[int(h * 0.2) : int(h * 0.9), int(w * 0.72)] = 0.05
    return np.clip(img, 0, 1)
