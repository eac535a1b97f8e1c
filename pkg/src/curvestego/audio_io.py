"""Carrier audio I/O: WAV load/save, mono conversion, lossy codec round trips.

Audio is held internally as double-precision samples in [-1, 1]; quantization
happens only when writing integer formats.  Lossy codecs are external
programs driven through command templates, so any encoder/decoder pair can be
swapped in without touching this module.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile
from scipy.signal import fftconvolve, resample_poly

SCRATCH_ENV_VAR = "CURVESTEGO_SCRATCH"

# mp3 encoders prepend a decoder-visible delay; this window bounds the search
# that undoes it.
DELAY_SEARCH_WINDOW = 4096


@dataclass
class AudioClip:
    """Mono audio: samples in [-1, 1] plus a sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioClip samples must be one-dimensional")
        if len(self.samples) < 1:
            raise ValueError("AudioClip must contain at least one sample")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("AudioClip samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample rate must be positive")
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class CodecSpec:
    """External codec invocation: command templates with {in}/{out} slots."""

    encode_command: str
    decode_command: str
    bitrate_kbps: int

    def __post_init__(self):
        for name, cmd in (("encode", self.encode_command),
                          ("decode", self.decode_command)):
            if cmd.count("{in}") != 1 or cmd.count("{out}") != 1:
                raise ValueError(
                    f"{name}_command must contain exactly one {{in}} and one {{out}}"
                )
        if int(self.bitrate_kbps) <= 0:
            raise ValueError("bitrate_kbps must be positive")


def load_wav(path) -> AudioClip:
    """Load a WAV file as mono float64, averaging channels, rescaling ints."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"could not read WAV file {path}: {exc}") from exc
    if data.size == 0:
        raise ValueError(f"zero-length audio in {path}")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype} in {path}")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioClip(samples=samples, sample_rate=int(rate))


def save_wav(clip: AudioClip, path, fmt: str = "float32") -> None:
    """Write a clip as float32 (lossless for our purposes) or pcm16 WAV."""
    if fmt == "float32":
        wavfile.write(path, clip.sample_rate, clip.samples.astype(np.float32))
    elif fmt == "pcm16":
        q = np.round(clip.samples * 32768.0)
        q = np.clip(q, -32768, 32767).astype(np.int16)
        wavfile.write(path, clip.sample_rate, q)
    else:
        raise ValueError(f"unknown WAV format {fmt!r} (use 'float32' or 'pcm16')")


def scratch_dir(override=None) -> str | None:
    """Resolve the scratch directory: explicit argument, then env var."""
    if override is not None:
        return str(override)
    return os.environ.get(SCRATCH_ENV_VAR)


def _run_template(template: str, in_path: str, out_path: str) -> None:
    cmd = shlex.split(template.format_map({"in": in_path, "out": out_path}))
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True)
    except FileNotFoundError as exc:
        raise RuntimeError(f"codec binary not found: {cmd[0]}") from exc
    if proc.returncode != 0:
        raise RuntimeError(
            f"codec command failed ({proc.returncode}): {' '.join(cmd)}\n"
            f"{proc.stderr.strip()}"
        )


def _estimate_delay(reference: np.ndarray, decoded: np.ndarray,
                    window: int = DELAY_SEARCH_WINDOW) -> int:
    """Lag of ``decoded`` relative to ``reference`` by normalized cross-correlation.

    Positive lag means the decoded stream starts ``lag`` samples late.
    Searches lags in [-window, window].
    """
    n = min(len(reference), len(decoded))
    x = reference[:n] - reference[:n].mean()
    y = decoded[: n + window] - decoded[: n + window].mean()
    corr = fftconvolve(y, x[::-1])
    # index n-1 in `corr` corresponds to lag 0
    lags = np.arange(-window, window + 1)
    idx = lags + n - 1
    valid = (idx >= 0) & (idx < len(corr))
    lags = lags[valid]
    vals = corr[idx[valid]]
    # normalize by the energy of the overlapping stretch of y
    cy = np.concatenate([[0.0], np.cumsum(y * y)])
    ex = float(np.dot(x, x))
    norms = np.empty(len(lags))
    for k, lag in enumerate(lags):
        lo = max(lag, 0)
        hi = min(lag + n, len(y))
        norms[k] = np.sqrt(max(cy[hi] - cy[lo], 1e-30) * max(ex, 1e-30))
    return int(lags[int(np.argmax(vals / norms))])


def codec_roundtrip(clip: AudioClip, codec: CodecSpec, scratch=None) -> AudioClip:
    """Push a clip through an external lossy codec and realign the result.

    The decoded audio is resampled to the clip's rate if needed, the codec's
    leading delay is undone by cross-correlation (lags up to
    ±``DELAY_SEARCH_WINDOW``), and the output is padded/trimmed to the exact
    input length.
    """
    base = scratch_dir(scratch)
    with tempfile.TemporaryDirectory(dir=base) as tmp:
        in_wav = os.path.join(tmp, "in.wav")
        mid = os.path.join(tmp, "compressed.bin")
        out_wav = os.path.join(tmp, "out.wav")
        save_wav(clip, in_wav, fmt="float32")
        _run_template(codec.encode_command, in_wav, mid)
        _run_template(codec.decode_command, mid, out_wav)
        decoded = load_wav(out_wav)

    y = decoded.samples
    if decoded.sample_rate != clip.sample_rate:
        y = resample_poly(y, clip.sample_rate, decoded.sample_rate)
    n = len(clip.samples)
    if abs(len(y) - n) > 0.1 * n:
        raise RuntimeError(
            f"codec output duration {len(y)} differs from input {n} by more than 10%"
        )

    lag = _estimate_delay(clip.samples, y)
    if lag > 0:
        y = y[lag:]
    elif lag < 0:
        y = np.concatenate([np.zeros(-lag), y])
    if len(y) < n:
        y = np.concatenate([y, np.zeros(n - len(y))])
    else:
        y = y[:n]
    return AudioClip(samples=np.clip(y, -1.0, 1.0), sample_rate=clip.sample_rate)


def identity_codec() -> CodecSpec:
    """A passthrough codec (file copy); useful as a baseline and in tests."""
    cp = f"{shlex.quote(sys.executable)} -c " + shlex.quote(
        "import shutil,sys; shutil.copyfile(sys.argv[1], sys.argv[2])"
    )
    return CodecSpec(
        encode_command=cp + " {in} {out}",
        decode_command=cp + " {in} {out}",
        bitrate_kbps=1411,
    )


def bundled_codec(bitrate_kbps: int = 64) -> CodecSpec:
    """The built-in lossy transform codec, run as a subprocess."""
    py = shlex.quote(sys.executable)
    return CodecSpec(
        encode_command=(
            f"{py} -m curvestego.lossy_codec encode {{in}} {{out}} "
            f"--kbps {int(bitrate_kbps)}"
        ),
        decode_command=f"{py} -m curvestego.lossy_codec decode {{in}} {{out}}",
        bitrate_kbps=int(bitrate_kbps),
    )


def default_mp3_codec(bitrate_kbps: int = 64) -> CodecSpec | None:
    """Build an mp3 CodecSpec from binaries on PATH, or None if there are none.

    Prefers ffmpeg (encode+decode); falls back to lame + mpg123.
    """
    kbps = int(bitrate_kbps)
    if shutil.which("ffmpeg"):
        return CodecSpec(
            encode_command=(
                f"ffmpeg -y -hide_banner -loglevel error -i {{in}} "
                f"-codec:a libmp3lame -b:a {kbps}k -f mp3 {{out}}"
            ),
            decode_command=(
                "ffmpeg -y -hide_banner -loglevel error -i {in} -f wav {out}"
            ),
            bitrate_kbps=kbps,
        )
    if shutil.which("lame") and shutil.which("mpg123"):
        return CodecSpec(
            encode_command=f"lame --quiet -b {kbps} {{in}} {{out}}",
            decode_command="mpg123 -q -w {out} {in}",
            bitrate_kbps=kbps,
        )
    return None


def best_available_codec(bitrate_kbps: int = 64) -> CodecSpec:
    """An mp3 codec if binaries exist, otherwise the bundled lossy codec."""
    return default_mp3_codec(bitrate_kbps) or bundled_codec(bitrate_kbps)
