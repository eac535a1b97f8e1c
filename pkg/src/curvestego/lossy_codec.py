"""Bundled lossy transform codec, used when no mp3 tool is installed.

Band-adaptive quantization of an overlapped FFT: each analysis frame's
spectrum is split into log-spaced bands and quantized with a step
proportional to the band RMS, so quantization noise is shaped like the
signal, low-energy coefficients collapse to zero, and phases get noisier as
the bitrate drops.  The encoder also prepends a fixed delay, mimicking the
leading-silence behavior of common mp3 encoders.

This is not an mp3 implementation; it is a stand-in degradation with the
same qualitative failure modes, driven through the same subprocess codec
interface (see ``audio_io.bundled_codec``).

Usage:
    python -m curvestego.lossy_codec encode in.wav out.lsc --kbps 64
    python -m curvestego.lossy_codec decode in.lsc out.wav
"""

from __future__ import annotations

import argparse
import struct
import sys
import zlib

import numpy as np

MAGIC = b"LSC1"
FRAME = 2048
HOP = 1024
ENCODER_DELAY = 576

# quantizer step = _quality(kbps) * band weight * band RMS; calibrated so
# nominal 64 kbps lands near 64 kbps of actual compressed payload on music
_REF_KBPS = 64.0
_BASE_Q = 3.0
_OCTAVE_KBPS = 24.0


def _quality(kbps: float) -> float:
    return _BASE_Q * 2.0 ** ((_REF_KBPS - kbps) / _OCTAVE_KBPS)


def _band_weights(edges: np.ndarray, n_bins: int) -> np.ndarray:
    """Coarser quantization in the treble, finer in the bass and mids.

    The low end gets small steps the way perceptual coders do (few bins, so
    the bit cost is negligible, and low-frequency quantization noise is the
    most audible kind).
    """
    centers = 0.5 * (edges[:-1] + edges[1:]) / n_bins  # 0..1 of Nyquist
    return 0.05 + 11.0 * centers**1.4


def _window() -> np.ndarray:
    n = np.arange(FRAME)
    return np.sin(np.pi * n / FRAME)


def _band_edges(n_bins: int) -> np.ndarray:
    edges = np.unique(np.round(np.geomspace(1, n_bins, 28)).astype(int))
    return np.concatenate([[0], edges])


def encode_file(in_wav: str, out_path: str, kbps: int) -> None:
    from .audio_io import load_wav

    clip = load_wav(in_wav)
    x = np.concatenate([np.zeros(ENCODER_DELAY), clip.samples])
    n_keep = len(x)

    # full zero padding on both sides so every kept sample has COLA coverage
    n_frames = int(np.ceil((n_keep + FRAME) / HOP)) + 1
    padded = np.zeros(FRAME + n_frames * HOP + FRAME)
    padded[FRAME : FRAME + n_keep] = x
    offsets = np.arange(n_frames) * HOP
    win = _window()
    frames = np.stack([padded[o : o + FRAME] for o in offsets]) * win
    spec = np.fft.rfft(frames, axis=1)

    n_bins = spec.shape[1]
    edges = _band_edges(n_bins)
    q = _quality(kbps)
    weights = _band_weights(edges, n_bins)
    steps = np.empty((n_frames, len(edges) - 1), dtype=np.float32)
    qr = np.empty_like(spec, dtype=np.int16)
    qi = np.empty_like(spec, dtype=np.int16)
    for b in range(len(edges) - 1):
        lo, hi = edges[b], edges[b + 1]
        band = spec[:, lo:hi]
        rms = np.sqrt(np.mean(np.abs(band) ** 2, axis=1))
        peak = np.maximum(
            np.max(np.abs(band.real), axis=1), np.max(np.abs(band.imag), axis=1)
        )
        step = np.maximum(q * weights[b] * rms, peak / 30000.0)
        step = np.maximum(step, 1e-9)
        steps[:, b] = step.astype(np.float32)
        s = step[:, None]
        qr[:, lo:hi] = np.clip(np.round(band.real / s), -32767, 32767)
        qi[:, lo:hi] = np.clip(np.round(band.imag / s), -32767, 32767)

    blob = zlib.compress(
        steps.tobytes() + qr.tobytes() + qi.tobytes(), level=6
    )
    header = MAGIC + struct.pack(
        "<IIHII", clip.sample_rate, n_keep, int(kbps), n_frames, n_bins
    )
    with open(out_path, "wb") as fh:
        fh.write(header)
        fh.write(blob)


def decode_file(in_path: str, out_wav: str) -> None:
    from .audio_io import AudioClip, save_wav

    with open(in_path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"{in_path} is not a bundled-codec stream")
        rate, n_keep, _kbps, n_frames, n_bins = struct.unpack("<IIHII", fh.read(18))
        blob = zlib.decompress(fh.read())

    edges = _band_edges(n_bins)
    n_steps = n_frames * (len(edges) - 1)
    steps = np.frombuffer(blob[: 4 * n_steps], dtype=np.float32).reshape(
        n_frames, len(edges) - 1
    )
    ints = np.frombuffer(blob[4 * n_steps :], dtype=np.int16)
    qr = ints[: n_frames * n_bins].reshape(n_frames, n_bins).astype(np.float64)
    qi = ints[n_frames * n_bins :].reshape(n_frames, n_bins).astype(np.float64)

    spec = np.empty((n_frames, n_bins), dtype=np.complex128)
    for b in range(len(edges) - 1):
        lo, hi = edges[b], edges[b + 1]
        s = steps[:, b].astype(np.float64)[:, None]
        spec[:, lo:hi] = (qr[:, lo:hi] + 1j * qi[:, lo:hi]) * s

    win = _window()
    frames = np.fft.irfft(spec, n=FRAME, axis=1) * win
    total = FRAME + n_frames * HOP + FRAME
    out = np.zeros(total)
    for j in range(n_frames):
        o = j * HOP
        out[o : o + FRAME] += frames[j]
    y = out[FRAME : FRAME + n_keep]
    y = np.clip(y, -1.0, 1.0)
    save_wav(AudioClip(samples=y, sample_rate=int(rate)), out_wav, fmt="float32")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    enc = sub.add_parser("encode")
    enc.add_argument("infile")
    enc.add_argument("outfile")
    enc.add_argument("--kbps", type=int, default=64)
    dec = sub.add_parser("decode")
    dec.add_argument("infile")
    dec.add_argument("outfile")
    args = parser.parse_args(argv)
    if args.mode == "encode":
        encode_file(args.infile, args.outfile, args.kbps)
    else:
        decode_file(args.infile, args.outfile)
    return 0


if __name__ == "__main__":
    sys.exit(main())
