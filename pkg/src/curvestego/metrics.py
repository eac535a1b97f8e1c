"""Fidelity measurements for the carrier audio and the recovered geometry."""

from __future__ import annotations

import numpy as np

from .audio_io import AudioClip
from .tour import Curve


def snr(y: AudioClip, x: AudioClip) -> float:
    """Signal-to-perturbation ratio in dB of a modified clip y against x.

    10*log10(sum x^2) - 10*log10(sum (y-x)^2); +inf if y equals x exactly.
    """
    if len(y.samples) != len(x.samples):
        raise ValueError("clips must have equal length")
    if y.sample_rate != x.sample_rate:
        raise ValueError("clips must share a sample rate")
    err = y.samples - x.samples
    e2 = float(err @ err)
    if e2 == 0:
        return float("inf")
    x2 = float(x.samples @ x.samples)
    return 10.0 * np.log10(x2) - 10.0 * np.log10(e2)


def distortion(decoded: Curve, target: Curve) -> float:
    """Mean Euclidean distance between corresponding points."""
    y = decoded.points
    x = target.points
    if y.shape != x.shape:
        raise ValueError(
            f"point arrays must match: {y.shape} vs {x.shape}"
        )
    return float(np.mean(np.linalg.norm(x - y, axis=1)))


def aligned_distortion(decoded: Curve, sidecar) -> float:
    """Mean distance to the embedded target after per-dimension affine fit.

    The decoder outputs a normalized curve (absolute scale and offset are not
    recoverable by design), so each dimension is first mapped onto the
    prepared target by least squares; the mean Euclidean distance is then
    reported in prepared-target units.  ``sidecar`` is the encoder's
    evaluation record (StegoResult or a loaded sidecar dict).
    """
    values = _sidecar_values(sidecar)
    pts = decoded.points.T
    if pts.shape != values.shape:
        raise ValueError(
            f"decoded curve shape {pts.shape} does not match sidecar {values.shape}"
        )
    mapped = np.empty_like(values)
    for i in range(values.shape[0]):
        dec = pts[i]
        tgt = values[i]
        var = dec.var()
        if var == 0:
            alpha, beta = 0.0, tgt.mean()
        else:
            alpha = float(np.cov(dec, tgt, bias=True)[0, 1] / var)
            beta = float(tgt.mean() - alpha * dec.mean())
        mapped[i] = alpha * dec + beta
    return float(np.mean(np.linalg.norm(mapped - values, axis=0)))


def _sidecar_values(sidecar) -> np.ndarray:
    if hasattr(sidecar, "prepared"):
        return np.asarray(sidecar.prepared.values, dtype=np.float64)
    if isinstance(sidecar, dict) and "values" in sidecar:
        return np.asarray(sidecar["values"], dtype=np.float64)
    raise ValueError("sidecar must be a StegoResult or a sidecar record dict")
