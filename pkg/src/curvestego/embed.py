"""Hiding a closed curve in a carrier clip.

Each curve dimension goes into one STFT frequency row: the target is shifted
and scaled to the row's sliding-window-sum statistics, reparameterized in
time so a full loop lines up cheaply with the row's existing shape, and then
the row's magnitudes are nudged by a bound-constrained least squares solve so
their window sums trace the target.  Relative scales between dimensions ride
along in the rows' phases.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, asdict

import numpy as np

from .audio_io import AudioClip
from .spectral import Spectrogram, istft, stft, sws, sws_adjoint
from .tour import Curve, resample_closed

MIN_EMBED_FRAMES = 64


@dataclass
class EncodingConfig:
    """All embedding knobs; decode uses the same values by convention."""

    window_length: int = 1024
    sliding_window: int = 16
    lam: float = 0.1
    freqs: tuple | None = None
    target_samples: int = 2000
    viterbi: bool = True
    solver_tol: float = 1e-8
    solver_max_iter: int = 5000
    max_step: int = 32
    phase_write_fraction: float = 0.8

    def __post_init__(self):
        if self.window_length <= 0 or self.window_length % 2 != 0:
            raise ValueError("window_length must be a positive even integer")
        if self.sliding_window < 1:
            raise ValueError("sliding_window must be at least 1")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.target_samples < 3:
            raise ValueError("target_samples must be at least 3")
        if not 0.5 < self.phase_write_fraction <= 1.0:
            raise ValueError("phase_write_fraction must lie in (0.5, 1]")
        if self.freqs is not None:
            self.freqs = tuple(int(k) for k in self.freqs)
            self._check_freqs(self.freqs)

    def _check_freqs(self, freqs):
        nyquist = self.window_length // 2
        if len(set(freqs)) != len(freqs):
            raise ValueError("carrier frequency indices must be distinct")
        for k in freqs:
            if not 0 < k < nyquist:
                raise ValueError(
                    f"carrier bin {k} must lie strictly between DC and bin {nyquist}"
                )

    def resolve_freqs(self, dimension: int) -> tuple:
        """Carrier bins for a d-dimensional curve: the d lowest non-DC bins
        unless explicitly configured."""
        if self.freqs is not None:
            if len(self.freqs) != dimension:
                raise ValueError(
                    f"{len(self.freqs)} carrier bins configured for a "
                    f"{dimension}-dimensional curve"
                )
            return self.freqs
        freqs = tuple(range(1, dimension + 1))
        self._check_freqs(freqs)
        return freqs

    def to_dict(self) -> dict:
        d = asdict(self)
        d["freqs"] = list(self.freqs) if self.freqs is not None else None
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "EncodingConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        kwargs = dict(data)
        if kwargs.get("freqs") is not None:
            kwargs["freqs"] = tuple(kwargs["freqs"])
        return cls(**kwargs)


@dataclass
class PreparedTarget:
    """Shifted, scaled, time-reparameterized target ready for the solver.

    ``values`` is (d, N_M): the target evaluated along the index path
    ``reparam`` (indices into the resampled target, after optional reversal).
    """

    values: np.ndarray
    scale_factors: np.ndarray
    offsets: np.ndarray
    reparam: np.ndarray
    reversed: bool
    cost: float = float("nan")

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


@dataclass
class StegoResult:
    """Encoder output: the stego clip plus the ground-truth evaluation record.

    The sidecar exists only so experiments can measure geometric distortion
    against exactly what was embedded; decoding never reads it.
    """

    stego: AudioClip
    prepared: PreparedTarget
    scale_ratios: np.ndarray
    freqs: tuple
    config: EncodingConfig
    clip_count: int = 0

    def sidecar_dict(self) -> dict:
        return {
            "values": self.prepared.values.tolist(),
            "scale_factors": np.asarray(self.prepared.scale_factors).tolist(),
            "offsets": np.asarray(self.prepared.offsets).tolist(),
            "reparam": np.asarray(self.prepared.reparam).tolist(),
            "reversed": bool(self.prepared.reversed),
            "cost": float(self.prepared.cost),
            "scale_ratios": np.asarray(self.scale_ratios).tolist(),
            "freqs": list(self.freqs),
            "clip_count": int(self.clip_count),
            "config": self.config.to_dict(),
        }

    def save_sidecar(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.sidecar_dict(), fh)


def load_sidecar(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    data["values"] = np.asarray(data["values"], dtype=np.float64)
    data["reparam"] = np.asarray(data["reparam"], dtype=int)
    return data


def fit_shift_scale(target_dim, sws_row):
    """Match a target coordinate to a window-sum row's dynamic range.

    The scale is the ratio of standard deviations and the offset matches the
    means, so the shifted target has exactly the row's mean and spread:
    returns (a, b, a * target + b).
    """
    t = np.asarray(target_dim, dtype=np.float64)
    s = np.asarray(sws_row, dtype=np.float64)
    st = t.std()
    ss = s.std()
    if st == 0:
        raise ValueError("target dimension has zero variance")
    if ss == 0:
        raise ValueError("window-sum row has zero variance (degenerate carrier)")
    a = ss / st
    b = s.mean() - a * t.mean()
    return float(a), float(b), a * t + b


def viterbi_reparam(target_vals, sws_vals, max_step: int):
    """Optimal circular index path through the target matching the row sums.

    Dynamic program over an (N_T, N_M) cost lattice: state t at frame j costs
    the squared mismatch of target sample t against frame j, plus the best
    predecessor among circular steps of 1..max_step.  Returns (theta, cost)
    where theta[j] indexes the target for frame j.

    O(N_T * N_M * max_step) time.
    """
    T = np.atleast_2d(np.asarray(target_vals, dtype=np.float64))
    S = np.atleast_2d(np.asarray(sws_vals, dtype=np.float64))
    if T.shape[0] != S.shape[0]:
        raise ValueError("target and row-sum matrices must share the dimension axis")
    n_t, n_m = T.shape[1], S.shape[1]
    if not n_t > n_m >= 1:
        raise ValueError(f"need more target samples ({n_t}) than frames ({n_m})")
    if max_step < 1:
        raise ValueError("max_step must be at least 1")

    cost = np.zeros((n_t, n_m))
    for i in range(T.shape[0]):
        cost += (T[i][:, None] - S[i][None, :]) ** 2

    prev = cost[:, 0].copy()
    steps = np.zeros((n_t, n_m), dtype=np.int32)
    for j in range(1, n_m):
        cand = np.stack([np.roll(prev, k) for k in range(1, max_step + 1)])
        kbest = np.argmin(cand, axis=0)
        steps[:, j] = kbest + 1
        prev = cand[kbest, np.arange(n_t)] + cost[:, j]

    end = int(np.argmin(prev))
    total = float(prev[end])
    theta = np.empty(n_m, dtype=int)
    t = end
    for j in range(n_m - 1, 0, -1):
        theta[j] = t
        t = (t - steps[t, j]) % n_t
    theta[0] = t
    return theta, total


def uniform_reparam(n_t: int, n_m: int) -> np.ndarray:
    """Evenly spaced circular indices starting at 0 (the non-Viterbi path)."""
    return (np.arange(n_m) * n_t) // n_m


def path_coverage(theta: np.ndarray, n_t: int) -> int:
    """Total circular distance advanced along the target by the path."""
    d = np.diff(np.asarray(theta)) % n_t
    return int(d.sum())


def choose_reparam(target_vals, sws_vals, scale=None, offset=None,
                   max_step: int = 32) -> PreparedTarget:
    """Best reparameterization over both traversal directions.

    For each direction the step bound starts at 1 and grows until the optimal
    path advances through at least one full loop of the target; the direction
    with the lower matching cost wins.  If the bound cap is hit without full
    coverage, the best path found is returned with a warning.
    """
    T = np.atleast_2d(np.asarray(target_vals, dtype=np.float64))
    n_t = T.shape[1]
    d = T.shape[0]
    candidates = []
    for rev in (False, True):
        t_dir = T[:, ::-1] if rev else T
        chosen = None
        for k in range(1, max_step + 1):
            theta, total = viterbi_reparam(t_dir, sws_vals, k)
            if path_coverage(theta, n_t) >= n_t:
                chosen = (total, rev, theta, t_dir)
                break
        if chosen is None:
            warnings.warn(
                "reparameterization step cap reached before covering a full "
                "loop; using the best path found",
                RuntimeWarning,
            )
            chosen = (total, rev, theta, t_dir)
        candidates.append(chosen)

    total, rev, theta, t_dir = min(candidates, key=lambda c: c[0])
    if scale is None:
        scale = np.ones(d)
    if offset is None:
        offset = np.zeros(d)
    return PreparedTarget(
        values=t_dir[:, theta],
        scale_factors=np.asarray(scale, dtype=np.float64),
        offsets=np.asarray(offset, dtype=np.float64),
        reparam=theta,
        reversed=rev,
        cost=total,
    )


def sws_objective(x, m_row, t_row, ell: int, lam: float) -> float:
    """Embedding objective: window-sum mismatch plus lam-weighted row change."""
    r = sws(x, ell) - np.asarray(t_row, dtype=np.float64)
    dx = np.asarray(x, dtype=np.float64) - np.asarray(m_row, dtype=np.float64)
    return float(r @ r + lam * (dx @ dx))


def sws_objective_grad(x, m_row, t_row, ell: int, lam: float) -> np.ndarray:
    """Gradient of the embedding objective, O(N) via prefix sums."""
    x = np.asarray(x, dtype=np.float64)
    r = sws(x, ell) - np.asarray(t_row, dtype=np.float64)
    return 2.0 * sws_adjoint(r, len(x), ell) + 2.0 * lam * (
        x - np.asarray(m_row, dtype=np.float64)
    )


def solve_magnitudes(m_row, t_row, ell: int, lam: float,
                     tol: float = 1e-8, max_iter: int = 5000) -> np.ndarray:
    """Nonnegative magnitudes whose window sums best match the target row.

    Projected gradient descent with Barzilai-Borwein steps and a monotone
    backtracking line search; every iteration costs O(N) thanks to the
    prefix-sum evaluation of the window-sum operator and its adjoint.
    Terminates when the projected gradient drops by ``tol`` relative to its
    initial norm (with tol as an absolute floor), warning if ``max_iter``
    arrives first.  The objective never rises above its value at the original
    row, which is also the starting iterate.
    """
    m = np.asarray(m_row, dtype=np.float64)
    t = np.asarray(t_row, dtype=np.float64)
    n = len(m)
    if np.any(m < 0):
        raise ValueError("magnitude row must be nonnegative")
    if len(t) != n - ell + 1:
        raise ValueError(
            f"target row length {len(t)} != {n} - {ell} + 1 window sums"
        )

    def grad(x):
        r = sws(x, ell) - t
        return 2.0 * sws_adjoint(r, n, ell) + 2.0 * lam * (x - m)

    def obj(x):
        r = sws(x, ell) - t
        dx = x - m
        return float(r @ r + lam * (dx @ dx))

    x = m.copy()
    g = grad(x)
    f = obj(x)
    pg0 = np.max(np.abs(np.where(x > 0, g, np.minimum(g, 0))), initial=0.0)
    threshold = tol * max(1.0, pg0)
    alpha = 1.0 / (2.0 * (ell * ell + lam)) if (ell or lam) else 1.0
    converged = False
    stalled = 0
    for _ in range(max_iter):
        pg = np.where(x > 0, g, np.minimum(g, 0))
        if np.max(np.abs(pg), initial=0.0) <= threshold:
            converged = True
            break
        trial = np.maximum(x - alpha * g, 0.0)
        d = trial - x
        gd = float(g @ d)
        if gd >= -1e-300:
            converged = True
            break
        step = 1.0
        f_new = obj(x + d)
        backtracks = 0
        while f_new > f + 1e-4 * step * gd and backtracks < 40:
            step *= 0.5
            f_new = obj(x + step * d)
            backtracks += 1
        if f_new > f:
            converged = True  # no descent representable at float resolution
            break
        # improvements at float resolution mean we are done
        stalled = stalled + 1 if f - f_new <= 1e-15 * max(abs(f), 1.0) else 0
        if stalled >= 3:
            converged = True
            break
        x_new = np.maximum(x + step * d, 0.0)
        g_new = grad(x_new)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-300:
            alpha = min(max(float(s @ s) / sy, 1e-12), 1e12)
        x, g, f = x_new, g_new, f_new
    if not converged:
        warnings.warn(
            "magnitude solver hit its iteration cap before reaching tolerance; "
            "returning best iterate",
            RuntimeWarning,
        )
    return x


def plan_phase_stamp(mag_row, phase_row, ratio: float, write_fraction: float,
                     rank_by=None):
    """Pick the frames that will carry the scale phase, and how.

    The scale rides in the absolute phase (|phase| = ratio * pi), so each
    stamped frame may use either sign; signs alternate with frame parity.
    Alternation matters: codecs let a remnant of the original bin content
    bleed back with roughly the original phase, and a sign choice correlated
    with that phase (e.g. always the nearer side) would pull the decoder's
    median systematically.  The loudest ``write_fraction`` of frames is
    stamped (ranked by ``rank_by`` when given, else by ``mag_row``): loud
    frames hold their phases through lossy codecs, and any fraction > 0.5
    guarantees the decoder's magnitude-weighted median lands inside the
    stamped set.  Returns (mask, stamp_phases, anchor): ``anchor`` is the
    magnitude row closest to the original audio once stamped frames are
    forced to the new phase (m cos(delta), floored at zero), which is what
    the magnitude solver should treat as "unchanged audio".
    """
    m = np.asarray(mag_row, dtype=np.float64)
    p = np.asarray(phase_row, dtype=np.float64)
    if not 0.5 < write_fraction <= 1.0:
        raise ValueError("write_fraction must lie in (0.5, 1] to keep the median")
    rank = m if rank_by is None else np.asarray(rank_by, dtype=np.float64)
    sign = np.where(np.arange(len(m)) % 2 == 0, 1.0, -1.0)
    stamp = sign * (ratio * np.pi)
    cos_d = np.cos(p - stamp)
    n = len(m)
    n_written = min(int(np.ceil(write_fraction * n)), n)
    order = np.argsort(-rank, kind="stable")[:n_written]
    mask = np.zeros(n, dtype=bool)
    mask[order] = True
    anchor = np.where(mask, m * np.maximum(cos_d, 0.0), m)
    return mask, stamp, anchor


def encode_scales_in_phase(spec: Spectrogram, freqs, scale_ratios,
                           write_fraction: float = 1.0) -> Spectrogram:
    """Write each dimension's relative scale into its row's phase.

    Ratio r in (0, 1] becomes a phase of magnitude r*pi; the decoder reads it
    back as the per-row median of absolute phases, which shrugs off a
    minority of deviating frames.  By default every frame is set to exactly
    r*pi.  With ``write_fraction`` < 1, only the cheapest majority of frames
    is stamped (see plan_phase_stamp) and loud clashing frames keep their
    natural phases, which costs far less audio fidelity.
    """
    ratios = np.asarray(scale_ratios, dtype=np.float64)
    if np.any(ratios <= 0) or np.any(ratios > 1):
        raise ValueError("scale ratios must lie in (0, 1]")
    if len(ratios) != len(tuple(freqs)):
        raise ValueError("one scale ratio per carrier bin required")
    phase = spec.phase.copy()
    for k, r in zip(freqs, ratios):
        if write_fraction >= 1.0:
            phase[k, :] = r * np.pi
        else:
            mask, stamp, _ = plan_phase_stamp(spec.mag[k], phase[k], r,
                                              write_fraction)
            phase[k, mask] = stamp[mask]
    return Spectrogram(
        mag=spec.mag.copy(),
        phase=phase,
        window_length=spec.window_length,
        sample_rate=spec.sample_rate,
    )


def encode(carrier: AudioClip, curve: Curve, cfg: EncodingConfig) -> StegoResult:
    """Hide a closed curve in a carrier clip.

    Pipeline: resample the curve, take the non-overlapping STFT, fit the
    target to each carrier row's window-sum statistics, reparameterize it in
    time, solve for perturbed magnitudes one dimension at a time, stamp the
    scale ratios into the phases, and invert.  The stego clip has exactly the
    carrier's length; samples pushed outside [-1, 1] are hard-clipped and
    counted.
    """
    w = cfg.window_length
    ell = cfg.sliding_window
    spec = stft(carrier, w)
    n_frames = spec.n_frames
    if ell > n_frames:
        raise ValueError(f"sliding window {ell} exceeds {n_frames} frames")
    n_m = n_frames - ell + 1
    if n_m < MIN_EMBED_FRAMES:
        raise ValueError(
            f"carrier yields only {n_m} window sums; need at least "
            f"{MIN_EMBED_FRAMES}"
        )
    d = curve.dimension
    freqs = cfg.resolve_freqs(d)
    n_t = cfg.target_samples
    if n_t <= n_m:
        raise ValueError(
            f"target_samples ({n_t}) must exceed the {n_m} window sums"
        )

    target = resample_closed(curve, n_t).points.T
    stds = target.std(axis=1)
    if np.any(stds == 0):
        raise ValueError("curve has a zero-variance dimension")
    ratios = stds / stds.max()

    sws_rows = np.vstack([sws(spec.mag[k], ell) for k in freqs])
    scale = np.empty(d)
    offset = np.empty(d)
    shifted = np.empty_like(target)
    for i in range(d):
        scale[i], offset[i], shifted[i] = fit_shift_scale(target[i], sws_rows[i])

    if cfg.viterbi:
        prepared = choose_reparam(
            shifted, sws_rows, scale=scale, offset=offset, max_step=cfg.max_step
        )
    else:
        theta = uniform_reparam(n_t, n_m)
        values = shifted[:, theta]
        prepared = PreparedTarget(
            values=values,
            scale_factors=scale,
            offsets=offset,
            reparam=theta,
            reversed=False,
            cost=float(((values - sws_rows) ** 2).sum()),
        )

    new_mag = spec.mag.copy()
    new_phase = spec.phase.copy()
    for i, k in enumerate(freqs):
        if cfg.phase_write_fraction >= 1.0:
            anchor = spec.mag[k]
            new_phase[k, :] = ratios[i] * np.pi
        else:
            # provisional solve to learn where the embedded row will be loud;
            # the stamp set must cover the decoder's magnitude-weighted median
            provisional = solve_magnitudes(
                spec.mag[k], prepared.values[i], ell, cfg.lam,
                tol=cfg.solver_tol, max_iter=cfg.solver_max_iter,
            )
            # anchoring the solver at the stamped frames' phase-consistent
            # magnitude makes the audio fidelity term measure the true
            # perturbation, so the lam trade-off stays monotone
            mask, stamp, anchor = plan_phase_stamp(
                spec.mag[k], spec.phase[k], ratios[i],
                cfg.phase_write_fraction, rank_by=provisional,
            )
            new_phase[k, mask] = stamp[mask]
        new_mag[k] = solve_magnitudes(
            anchor, prepared.values[i], ell, cfg.lam,
            tol=cfg.solver_tol, max_iter=cfg.solver_max_iter,
        )

    out_spec = Spectrogram(
        mag=new_mag, phase=new_phase,
        window_length=w, sample_rate=carrier.sample_rate,
    )
    remainder = carrier.samples[n_frames * w :]
    out = istft(out_spec, remainder)
    samples = out.samples
    clip_count = int(np.count_nonzero(np.abs(samples) > 1.0))
    if clip_count > 0.01 * len(samples):
        warnings.warn(
            f"{clip_count} samples clipped ({clip_count / len(samples):.1%}); "
            "consider a larger lam or a quieter carrier",
            RuntimeWarning,
        )
    stego = AudioClip(
        samples=np.clip(samples, -1.0, 1.0), sample_rate=carrier.sample_rate
    )
    return StegoResult(
        stego=stego,
        prepared=prepared,
        scale_ratios=ratios,
        freqs=freqs,
        config=cfg,
        clip_count=clip_count,
    )
