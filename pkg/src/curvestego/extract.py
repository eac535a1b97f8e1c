"""Recovering hidden curves from audio alone.

Decoding is cheap: window sums of a few magnitude rows, z-normalized and
rescaled by the phase-coded ratios.  When the stream is not aligned to the
window grid, the right offset is the one whose decoded curve is shortest,
because the true curve moves gently from sample to sample while a misaligned
read produces jitter; the search tries every offset up to the window length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip
from .embed import EncodingConfig, MIN_EMBED_FRAMES
from .spectral import stft, sws
from .tour import Curve, curve_length

SCALE_FLOOR = 0.05


def _phase_ratio(phases: np.ndarray, weights: np.ndarray) -> float:
    """Scale ratio from a row of phases: weighted median of |phase| over pi.

    Absolute values keep a ratio of 1 (phase pi) robust: codec noise wraps
    some of those frames to -pi, and a signed median would land near zero.
    Weighting by frame magnitude keeps the estimate on the loud frames, whose
    phases survive lossy codecs, and guarantees it lands inside the encoder's
    stamped majority.
    """
    vals = np.abs(phases)
    order = np.argsort(vals, kind="stable")
    w = np.maximum(weights[order], 0.0)
    cum = np.cumsum(w)
    if cum[-1] <= 0:
        med = float(np.median(vals))
    else:
        med = float(vals[order][np.searchsorted(cum, 0.5 * cum[-1])])
    return float(np.clip(med / np.pi, SCALE_FLOOR, 1.0))


def _znorm(sums: np.ndarray) -> np.ndarray:
    mu = sums.mean(axis=1, keepdims=True)
    sd = sums.std(axis=1, keepdims=True)
    if np.any(sd == 0):
        raise ValueError("window-sum row has zero variance (degenerate carrier)")
    return (sums - mu) / sd


def _assemble(sums: np.ndarray, phases: np.ndarray, mags: np.ndarray) -> np.ndarray:
    """Z-normalize window-sum rows, apply phase ratios, mean-center."""
    z = _znorm(sums)
    for i in range(z.shape[0]):
        z[i] *= _phase_ratio(phases[i], mags[i])
    z -= z.mean(axis=1, keepdims=True)
    return z.T


@dataclass
class DecodedCurve:
    """Alignment-search result: best decode, its offset, and the full profile.

    ``lengths_by_shift[s]`` is the length of the unit-variance decode at
    shift s.  The search compares curves before the phase-decoded scale
    ratios are applied: a misaligned read rotates the carrier bins' phases by
    2*pi*k*s/w, so the decoded ratios at wrong shifts are arbitrary and would
    otherwise shrink some wrong-shift curves below the true one.
    """

    curve: Curve
    shift: int
    lengths_by_shift: np.ndarray


def decode_at_shift(clip: AudioClip, shift: int, cfg: EncodingConfig,
                    dimension: int | None = None) -> Curve:
    """Decode assuming the window grid starts ``shift`` samples in.

    Returns the mean-centered curve with per-dimension spread equal to the
    phase-decoded scale ratios.  Works on any clip; callers must not assume
    an embedding is present.
    """
    w = cfg.window_length
    if not 0 <= shift < w:
        raise ValueError(f"shift must lie in [0, {w})")
    freqs = cfg.resolve_freqs(dimension) if dimension else (cfg.freqs or (1, 2))
    x = clip.samples[shift:]
    if len(x) < w * MIN_EMBED_FRAMES:
        raise ValueError(
            f"need at least {w * MIN_EMBED_FRAMES} samples past the shift"
        )
    spec = stft(AudioClip(samples=x, sample_rate=clip.sample_rate), w)
    sums = np.vstack([sws(spec.mag[k], cfg.sliding_window) for k in freqs])
    phases = np.vstack([spec.phase[k] for k in freqs])
    mags = np.vstack([spec.mag[k] for k in freqs])
    return Curve(points=_assemble(sums, phases, mags))


def recover_alignment(clip: AudioClip, cfg: EncodingConfig,
                      dimension: int | None = None) -> DecodedCurve:
    """Search every sample offset in [0, w) for the shortest decoded curve.

    Lengths are compared on unit-variance decodes (see DecodedCurve); the
    winning offset is then decoded normally.  Only the carrier bins are
    needed, so instead of a full FFT per offset the per-frame bin values come
    from one prefix sum of the demodulated signal per bin; each offset is
    then a constant-time gather.
    """
    w = cfg.window_length
    ell = cfg.sliding_window
    freqs = cfg.resolve_freqs(dimension) if dimension else (cfg.freqs or (1, 2))
    x = clip.samples
    n = len(x)
    if n < (MIN_EMBED_FRAMES + 1) * w:
        raise ValueError(
            f"need at least {(MIN_EMBED_FRAMES + 1) * w} samples to search shifts"
        )

    # S_k(shift, j) = e^{2 pi i k shift / w} * (Z_k[shift + (j+1)w] - Z_k[shift + jw])
    # where Z_k is the prefix sum of x[m] e^{-2 pi i k m / w}
    m = np.arange(n)
    prefix = {}
    for k in freqs:
        table = np.exp(-2j * np.pi * k * np.arange(w) / w)
        z = x * table[m % w]
        prefix[k] = np.concatenate([[0.0 + 0.0j], np.cumsum(z)])

    lengths = np.full(w, np.inf)
    for s in range(w):
        nf = (n - s) // w
        idx = s + w * np.arange(nf + 1)
        sums_rows = []
        degenerate = False
        for k in freqs:
            seg = prefix[k][idx]
            row = sws(np.abs(seg[1:] - seg[:-1]), ell)
            if row.std() == 0:
                degenerate = True
                break
            sums_rows.append(row)
        if degenerate:
            continue
        lengths[s] = curve_length(_znorm(np.vstack(sums_rows)).T)

    best = int(np.argmin(lengths))
    curve = decode_at_shift(clip, best, cfg, dimension=dimension)
    return DecodedCurve(curve=curve, shift=best, lengths_by_shift=lengths)
