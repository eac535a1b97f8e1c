"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with `pytest tests/test_acceptance.py -v -s`.  The codec legs use
an mp3 toolchain when one is on PATH and the bundled lossy codec otherwise;
the printed lines say which one ran.
"""

import time
from itertools import product

import numpy as np
import pytest
from scipy.optimize import nnls
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform

from curvestego import (
    AudioClip,
    EncodingConfig,
    TriangleMesh,
    aligned_distortion,
    best_available_codec,
    codec_roundtrip,
    curvature_flow,
    curve_length,
    decode_at_shift,
    dual_graph,
    encode,
    has_self_crossing,
    istft,
    mst_tour,
    perfect_matching,
    recover_alignment,
    resample_closed,
    snr,
    solve_magnitudes,
    stft,
    sws,
    sws_adjoint,
    two_opt,
    viterbi_reparam,
)
from curvestego.audio_io import default_mp3_codec
from curvestego.embed import sws_objective, sws_objective_grad
from curvestego.hamiltonian import face_walk, residual_cycles
from curvestego.meshes import (
    icosahedron,
    icosphere,
    octahedron,
    tetrahedron,
    torus,
    triangulated_cube,
)
from synth import ellipse_curve, synth_carrier

W = 1024
CODEC_NAME = "mp3" if default_mp3_codec(64) else "bundled lossy codec"


def report(num, text):
    print(f"\nACCEPTANCE {num}: {text} ... PASS")


@pytest.fixture(scope="module")
def carrier_30s():
    # a hair over 30.000 s, as real dataset clips run, so the window grid
    # fits 1292 whole frames
    return synth_carrier(1_323_600, seed=42)


@pytest.fixture(scope="module")
def tours_50pt():
    rng = np.random.default_rng(99)
    tours = []
    for _ in range(20):
        pts = rng.uniform(0, 1, (50, 2))
        tours.append((pts, two_opt(mst_tour(pts))))
    return tours


def curve_with_ratio(target_ratio, n=600):
    """Ellipse whose resampled per-dimension spread ratio hits the target."""
    if target_ratio >= 1.0:
        return ellipse_curve(1.0, 1.0, n)

    def ratio_of(b):
        t = resample_closed(ellipse_curve(1.0, b, n), 2000).points
        sd = t.std(axis=0)
        return sd[1] / sd[0]

    lo, hi = 1e-3, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ratio_of(mid) < target_ratio:
            lo = mid
        else:
            hi = mid
    return ellipse_curve(1.0, 0.5 * (lo + hi), n)


def test_criterion_1_transform_exactness():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        w = 2 * int(rng.integers(1, 257))
        n = w * int(rng.integers(5, 40)) + int(rng.integers(0, w))
        x = rng.uniform(-1, 1, n)
        clip = AudioClip(samples=x, sample_rate=44100)
        spec = stft(clip, w)
        out = istft(spec, remainder=x[spec.n_frames * w :])
        worst = max(worst, float(np.max(np.abs(out.samples - x))))
    assert worst < 1e-9
    report(1, f"STFT round trip on 100 clips, max abs err {worst:.2e} < 1e-9")


def test_criterion_2_operator_oracle():
    rng = np.random.default_rng(2)
    row = rng.uniform(0, 1, 10_000)
    worst = 0.0
    for ell in (1, 16, 256):
        naive = np.array(
            [row[j : j + ell].sum() for j in range(len(row) - ell + 1)]
        )
        worst = max(worst, float(np.max(np.abs(sws(row, ell) - naive))))
    assert worst <= 1e-9
    adj_worst = 0.0
    for ell in (1, 16, 256):
        u = rng.normal(size=2000)
        v = rng.normal(size=2000 - ell + 1)
        adj_worst = max(
            adj_worst, abs(float(sws(u, ell) @ v) - float(u @ sws_adjoint(v, 2000, ell)))
        )
    assert adj_worst <= 1e-9
    report(2, f"window-sum vs naive {worst:.2e}, adjoint {adj_worst:.2e}, both <= 1e-9")


def test_criterion_3_solver_oracle():
    rng = np.random.default_rng(3)
    worst_gap = -np.inf
    for trial in range(8):
        n = int(rng.integers(16, 65))
        ell = int(rng.integers(2, 9))
        lam = float(rng.choice([0.05, 0.1, 1.0]))
        m = rng.uniform(0, 1, n)
        t = rng.uniform(0, ell, n - ell + 1)
        x = solve_magnitudes(m, t, ell, lam)
        f_mine = sws_objective(x, m, t, ell, lam)
        assert f_mine <= sws_objective(m, m, t, ell, lam) + 1e-12
        A = np.zeros((n - ell + 1, n))
        for j in range(n - ell + 1):
            A[j, j : j + ell] = 1.0
        B = np.vstack([A, np.sqrt(lam) * np.eye(n)])
        c = np.concatenate([t, np.sqrt(lam) * m])
        x_oracle, _ = nnls(B, c)
        f_oracle = sws_objective(x_oracle, m, t, ell, lam)
        worst_gap = max(worst_gap, f_mine - f_oracle)
        assert f_mine <= f_oracle + 1e-6

    n, ell, lam = 24, 3, 0.7
    m = rng.uniform(0.2, 1, n)
    t = rng.uniform(0, 2, n - ell + 1)
    x0 = rng.uniform(0.1, 1, n)
    g = sws_objective_grad(x0, m, t, ell, lam)
    h = 1e-6
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fd = (sws_objective(x0 + e, m, t, ell, lam)
              - sws_objective(x0 - e, m, t, ell, lam)) / (2 * h)
        assert abs(g[i] - fd) <= 1e-5 * max(1.0, abs(fd))
    report(3, f"solver vs dense QP oracle, worst objective gap {worst_gap:.2e} <= 1e-6; "
              "gradient matches finite differences")


def test_criterion_4_viterbi_oracle():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n_t = int(rng.integers(4, 13))
        n_m = int(rng.integers(2, min(n_t, 7)))
        k = int(rng.integers(1, 4))
        T = rng.normal(size=(2, n_t))
        S = rng.normal(size=(2, n_m))
        _, cost = viterbi_reparam(T, S, k)
        D = np.zeros((n_t, n_m))
        for i in range(2):
            D += (T[i][:, None] - S[i][None, :]) ** 2
        best = np.inf
        for start in range(n_t):
            for steps in product(range(1, k + 1), repeat=n_m - 1):
                t_idx, c = start, D[start, 0]
                for j, st in enumerate(steps):
                    t_idx = (t_idx + st) % n_t
                    c += D[t_idx, j + 1]
                best = min(best, c)
        assert cost == pytest.approx(best, abs=1e-9)
    report(4, "dynamic program equals brute-force path enumeration on 50 instances")


def test_criterion_5_tour_quality(tours_50pt):
    for pts, tour in tours_50pt:
        d = squareform(pdist(pts))
        mst_w = float(minimum_spanning_tree(d).sum())
        assert curve_length(mst_tour(pts)) <= 2 * mst_w + 1e-9
        assert not has_self_crossing(tour)
        p = tour.points
        m = len(p)
        for i in range(m - 1):
            j_hi = m - 1 if i > 0 else m - 2
            js = np.arange(i + 2, j_hi + 1)
            if len(js) == 0:
                continue
            gain = (
                np.linalg.norm(p[js] - p[i], axis=1)
                + np.linalg.norm(p[(js + 1) % m] - p[i + 1], axis=1)
                - np.linalg.norm(p[i + 1] - p[i])
                - np.linalg.norm(p[(js + 1) % m] - p[js], axis=1)
            )
            assert np.all(gain >= -1e-12)
    report(5, "20 random 50-point tours: no improving swap, no crossings, "
              "spanning-tree bound holds")


def test_criterion_6_hamiltonian_coverage():
    meshes = {
        "tetrahedron": tetrahedron(),
        "icosahedron": icosahedron(),
        "octahedron": octahedron(),
        "cube": triangulated_cube(),
        "icosphere": icosphere(1),
        "torus": torus(10, 6),
    }
    for name, (v, f) in meshes.items():
        mesh = TriangleMesh(vertices=v, faces=f)
        g = dual_graph(mesh)
        matching = perfect_matching(g)
        touched = sorted(x for pair in matching for x in pair)
        assert touched == list(range(g.n_nodes)), name
        cycles = residual_cycles(g, matching)  # raises unless 2-regular
        assert sum(len(c) for c in cycles) == g.n_nodes
        walk = face_walk(g, matching)
        counts = np.bincount(walk, minlength=mesh.n_faces)
        assert np.all(counts >= 1), name
        adj = [set(n) for n in g.adjacency]
        for a, b in zip(walk, walk[1:] + walk[:1]):
            assert b in adj[a], name
    report(6, f"matching, 2-regular residual, covering adjacent loop on "
              f"{len(meshes)} watertight meshes")


def test_criterion_7_uncompressed_end_to_end(carrier_30s):
    cfg = EncodingConfig(window_length=W, sliding_window=16, lam=0.1)
    t0 = time.time()
    res = encode(carrier_30s, ellipse_curve(2.0, 1.0), cfg)
    dec = decode_at_shift(res.stego, 0, cfg, dimension=2)
    elapsed = time.time() - t0
    assert len(dec) == 1277
    assert res.prepared.n_samples == 1277
    cors = [
        float(np.corrcoef(dec.points[:, i], res.prepared.values[i])[0, 1])
        for i in range(2)
    ]
    assert min(cors) >= 0.99
    assert elapsed <= 60
    report(7, f"30 s clip: 1277 decoded samples, correlations "
              f"{cors[0]:.4f}/{cors[1]:.4f} >= 0.99, {elapsed:.1f} s <= 60 s")


def test_criterion_8_alignment_recovery():
    cfg = EncodingConfig(window_length=W, sliding_window=10, lam=0.1)
    codec = best_available_codec(64)
    rng = np.random.default_rng(8)
    hits = {"uncompressed": 0, "codec": 0}
    total = 0
    for seed in range(4):
        carrier = synth_carrier(660 * 1024, seed=100 + seed)
        res = encode(carrier, ellipse_curve(2.0, 1.0), cfg)
        received = codec_roundtrip(res.stego, codec)
        for _ in range(5):
            s = int(rng.integers(0, W))
            expected = (W - s) % W
            total += 1
            for leg, clip in (("uncompressed", res.stego), ("codec", received)):
                rolled = AudioClip(np.roll(clip.samples, -s), clip.sample_rate)
                dec = recover_alignment(rolled, cfg, dimension=2)
                err = min((dec.shift - expected) % W, (expected - dec.shift) % W)
                hits[leg] += err <= 10
    assert total >= 20
    assert hits["uncompressed"] >= 0.9 * total
    assert hits["codec"] >= 0.9 * total
    report(8, f"{hits['uncompressed']}/{total} shifts within 10 uncompressed, "
              f"{hits['codec']}/{total} after 64 kbps {CODEC_NAME} (>= 90%)")


def test_criterion_9_tradeoff_trends():
    codec = best_available_codec(64)
    lams = (0.1, 1.0, 10.0)
    curve = ellipse_curve(2.0, 1.0)
    snr_monotone = 0
    dist_monotone = 0
    n_clips = 5
    for seed in range(n_clips):
        carrier = synth_carrier(520 * 1024, seed=200 + seed)
        snrs, dists = [], []
        d_identity = None
        for lam in lams:
            cfg = EncodingConfig(window_length=W, sliding_window=16, lam=lam,
                                 target_samples=800)
            res = encode(carrier, curve, cfg)
            snrs.append(snr(res.stego, carrier))
            received = codec_roundtrip(res.stego, codec)
            dec = decode_at_shift(received, 0, cfg, dimension=2)
            dists.append(aligned_distortion(dec, res))
            if lam == 0.1:
                dec0 = decode_at_shift(res.stego, 0, cfg, dimension=2)
                d_identity = aligned_distortion(dec0, res)
        snr_monotone += all(snrs[i] <= snrs[i + 1] + 1e-9 for i in range(2))
        dist_monotone += all(dists[i] <= dists[i + 1] + 1e-12 for i in range(2))
        # a lossy codec can only add decoding noise
        assert d_identity <= dists[0]
    assert snr_monotone == n_clips
    assert dist_monotone >= 0.8 * n_clips
    report(9, f"SNR monotone in lam on {snr_monotone}/{n_clips} clips, "
              f"distortion monotone on {dist_monotone}/{n_clips} (>= 80%), "
              f"64 kbps {CODEC_NAME}")


def test_criterion_10_phase_scale_round_trip():
    codec = best_available_codec(64)
    cfg = EncodingConfig(window_length=W, sliding_window=16, lam=0.1)
    carrier = synth_carrier(660 * 1024, seed=7)
    results = []
    for target in (1.0, 0.5, 0.25):
        curve = curve_with_ratio(target)
        res = encode(carrier, curve, cfg)
        planted = res.scale_ratios[1] / res.scale_ratios[0]
        assert planted == pytest.approx(target, abs=1e-3)
        dec = decode_at_shift(res.stego, 0, cfg, dimension=2)
        sd = dec.points.std(axis=0)
        unc_err = abs(sd[1] / sd[0] - planted) / planted
        received = codec_roundtrip(res.stego, codec)
        dec2 = decode_at_shift(received, 0, cfg, dimension=2)
        sd2 = dec2.points.std(axis=0)
        codec_err = abs(sd2[1] / sd2[0] - planted) / planted
        assert unc_err <= 0.02
        assert codec_err <= 0.10
        results.append((target, unc_err, codec_err))
    pretty = ", ".join(
        f"{t}: {u:.2%}/{c:.2%}" for t, u, c in results
    )
    report(10, f"aspect ratios recovered (uncompressed/codec): {pretty} "
               "within 2%/10%")


def test_criterion_11_smoothing_safety(tours_50pt):
    for _, tour in tours_50pt:
        smoothed = curvature_flow(tour, sigma=1.0)
        assert curve_length(smoothed) < curve_length(tour)
        assert not has_self_crossing(smoothed)
    report(11, "curvature flow shortened all 20 tours without introducing crossings")
