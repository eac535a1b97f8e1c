"""Non-overlapping STFT and the sliding window sum operator.

The transform splits a mono signal into back-to-back rectangular windows of
length ``w`` and takes a real FFT of each, so the inverse is exact: no
overlap, no taper, no synthesis window bookkeeping.  Exact invertibility is
what lets us perturb individual magnitude rows and resynthesize without
smearing the change across neighboring bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip


@dataclass
class Spectrogram:
    """Magnitude/phase factorization of a non-overlapping STFT.

    ``mag`` and ``phase`` are (w/2+1, n_frames) arrays; frame ``j`` covers
    samples ``[j*w, (j+1)*w)`` of the analyzed signal.
    """

    mag: np.ndarray
    phase: np.ndarray
    window_length: int
    sample_rate: int

    def __post_init__(self):
        self.mag = np.asarray(self.mag, dtype=np.float64)
        self.phase = np.asarray(self.phase, dtype=np.float64)
        w = self.window_length
        if w <= 0 or w % 2 != 0:
            raise ValueError("window_length must be a positive even integer")
        if self.mag.shape != self.phase.shape:
            raise ValueError("mag and phase must have identical shapes")
        if self.mag.shape[0] != w // 2 + 1:
            raise ValueError(
                f"expected {w // 2 + 1} frequency bins for window {w}, "
                f"got {self.mag.shape[0]}"
            )
        if np.any(self.mag < 0):
            raise ValueError("magnitudes must be nonnegative")

    @property
    def n_frames(self) -> int:
        return self.mag.shape[1]

    @property
    def n_bins(self) -> int:
        return self.mag.shape[0]

    def complex_values(self) -> np.ndarray:
        return self.mag * np.exp(1j * self.phase)


def stft(clip: AudioClip, window_length: int) -> Spectrogram:
    """Forward non-overlapping STFT with a rectangular window.

    Uses ``floor(len/w)`` frames; trailing samples that do not fill a whole
    window are simply not transformed (the inverse carries them through via
    its ``remainder`` argument).
    """
    w = int(window_length)
    if w <= 0 or w % 2 != 0:
        raise ValueError("window_length must be a positive even integer")
    x = clip.samples
    if len(x) < w:
        raise ValueError(f"clip has {len(x)} samples, shorter than window {w}")
    n_frames = len(x) // w
    frames = x[: n_frames * w].reshape(n_frames, w)
    spec = np.fft.rfft(frames, axis=1)
    return Spectrogram(
        mag=np.abs(spec).T,
        phase=np.angle(spec).T,
        window_length=w,
        sample_rate=clip.sample_rate,
    )


def istft(spec: Spectrogram, remainder=()) -> AudioClip:
    """Inverse STFT; ``remainder`` is appended verbatim after the last frame."""
    s = spec.complex_values()
    frames = np.fft.irfft(s.T, n=spec.window_length, axis=1)
    tail = np.asarray(remainder, dtype=np.float64)
    samples = np.concatenate([frames.ravel(), tail])
    return AudioClip(samples=samples, sample_rate=spec.sample_rate)


def sws(row, ell: int) -> np.ndarray:
    """Sliding window sum: out[j] = sum(row[j : j + ell]), length N - ell + 1.

    Computed from a prefix sum, O(N) regardless of ``ell``.
    """
    row = np.asarray(row, dtype=np.float64)
    n = len(row)
    if not 1 <= ell <= n:
        raise ValueError(f"window {ell} out of range for row of length {n}")
    c = np.concatenate([[0.0], np.cumsum(row)])
    return c[ell:] - c[:-ell]


def sws_adjoint(res, n: int, ell: int) -> np.ndarray:
    """Adjoint of the sliding window sum operator, also via prefix sums.

    Maps a length ``n - ell + 1`` vector back to length ``n``:
    out[i] = sum of res[j] over all windows j that cover position i.
    """
    res = np.asarray(res, dtype=np.float64)
    m = len(res)
    if m != n - ell + 1:
        raise ValueError(f"adjoint input length {m} != {n} - {ell} + 1")
    c = np.concatenate([[0.0], np.cumsum(res)])
    i = np.arange(n)
    upper = np.minimum(i, n - ell) + 1
    lower = np.maximum(i - ell + 1, 0)
    return c[upper] - c[lower]
