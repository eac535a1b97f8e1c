"""Command line pipeline: curves from images and meshes, in and out of audio.

Subcommands: stipple | tour | hamcycle | encode | decode | roundtrip | sweep.
Configuration precedence everywhere is CLI flags, then --config file (JSON),
then built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import metrics
from .audio_io import (
    best_available_codec,
    bundled_codec,
    codec_roundtrip,
    default_mp3_codec,
    identity_codec,
    load_wav,
    save_wav,
    SCRATCH_ENV_VAR,
)
from .embed import EncodingConfig, encode
from .extract import decode_at_shift, recover_alignment
from .hamiltonian import dual_graph, hamiltonian_cycle, load_mesh, perfect_matching
from .stipple import build_weights, canny_edges, load_image, voronoi_stipple
from .tour import Curve, curvature_flow, curve_length, mst_tour, two_opt


def curve_to_svg(curve: Curve, path, stroke="black", stroke_width=1.0) -> None:
    """Write a 2D curve as a single SVG polygon."""
    if curve.dimension != 2:
        raise ValueError("SVG export is for 2D curves")
    pts = curve.points
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    margin = 0.02 * max(float(np.max(hi - lo)), 1.0)
    pieces = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
    with open(path, "w") as fh:
        fh.write(
            '<svg xmlns="http://www.w3.org/2000/svg" viewBox='
            f'"{lo[0] - margin:.3f} {lo[1] - margin:.3f} '
            f'{hi[0] - lo[0] + 2 * margin:.3f} {hi[1] - lo[1] + 2 * margin:.3f}">'
            f'<polygon points="{pieces}" fill="none" stroke="{stroke}" '
            f'stroke-width="{stroke_width}"/></svg>\n'
        )


def curve_to_obj(curve: Curve, path) -> None:
    """Write a curve as an OBJ polyline (closed with a final segment)."""
    pts = curve.points
    with open(path, "w") as fh:
        for p in pts:
            z = p[2] if len(p) > 2 else 0.0
            fh.write(f"v {p[0]} {p[1]} {z}\n")
        idx = " ".join(str(i + 1) for i in range(len(pts)))
        fh.write(f"l {idx} 1\n")


def _config_from_args(args) -> EncodingConfig:
    data = EncodingConfig().to_dict()
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        with open(cfg_path) as fh:
            file_data = json.load(fh)
        unknown = set(file_data) - set(data)
        if unknown:
            raise ValueError(f"unknown keys in {cfg_path}: {sorted(unknown)}")
        data.update(file_data)
    overrides = {
        "window_length": getattr(args, "window", None),
        "sliding_window": getattr(args, "ell", None),
        "lam": getattr(args, "lam", None),
        "target_samples": getattr(args, "target_samples", None),
        "solver_tol": getattr(args, "solver_tol", None),
        "solver_max_iter": getattr(args, "solver_max_iter", None),
    }
    if getattr(args, "freqs", None):
        overrides["freqs"] = [int(tok) for tok in args.freqs.split(",")]
    if getattr(args, "no_viterbi", False):
        overrides["viterbi"] = False
    data.update({k: v for k, v in overrides.items() if v is not None})
    return EncodingConfig.from_dict(data)


def _add_config_flags(parser) -> None:
    parser.add_argument("--config", help="JSON file of encoding settings")
    parser.add_argument("--window", type=int, help="STFT window length")
    parser.add_argument("--ell", type=int, help="sliding window sum length")
    parser.add_argument("--lam", type=float, help="audio fidelity weight")
    parser.add_argument("--target-samples", type=int, dest="target_samples")
    parser.add_argument("--freqs", help="comma-separated carrier bin indices")
    parser.add_argument("--no-viterbi", action="store_true",
                        help="use uniform instead of optimized reparameterization")
    parser.add_argument("--solver-tol", type=float, dest="solver_tol")
    parser.add_argument("--solver-max-iter", type=int, dest="solver_max_iter")


def _resolve_codec(name: str, bitrate: int):
    if name == "none":
        return None
    if name == "identity":
        return identity_codec()
    if name == "bundled":
        return bundled_codec(bitrate)
    if name == "mp3":
        codec = default_mp3_codec(bitrate)
        if codec is None:
            raise RuntimeError("no mp3 binaries found on PATH (ffmpeg or lame+mpg123)")
        return codec
    return best_available_codec(bitrate)  # auto


def cmd_stipple(args) -> int:
    img = load_image(args.image)
    edges = None
    if not args.no_edges:
        edges = canny_edges(
            img, blur_sigma=args.blur_sigma, low=args.canny_low, high=args.canny_high
        )
    weights = build_weights(img, b=args.threshold, edges=edges)
    points = voronoi_stipple(
        weights, n_points=args.points, n_iters=args.iters, seed=args.seed
    )
    with open(args.out, "w") as fh:
        json.dump([[float(x), float(y)] for x, y in points], fh)
    print(f"wrote {len(points)} stipple points to {args.out}")
    return 0


def cmd_tour(args) -> int:
    with open(args.stipple) as fh:
        points = np.asarray(json.load(fh), dtype=np.float64)
    curve = two_opt(mst_tour(points))
    if not args.no_smooth:
        curve = curvature_flow(curve, sigma=args.sigma)
    curve.save_json(args.out)
    if args.svg:
        curve_to_svg(curve, args.svg)
        print(f"wrote SVG to {args.svg}")
    print(
        f"tour of {len(curve)} points, length {curve_length(curve):.2f}, "
        f"written to {args.out}"
    )
    return 0


def cmd_hamcycle(args) -> int:
    mesh = load_mesh(args.mesh)
    matching = perfect_matching(dual_graph(mesh))
    curve = hamiltonian_cycle(mesh, matching)
    curve.save_json(args.out)
    if args.obj:
        curve_to_obj(curve, args.obj)
        print(f"wrote OBJ polyline to {args.obj}")
    print(
        f"loop of {len(curve)} points covering {mesh.n_faces} faces, "
        f"written to {args.out}"
    )
    return 0


def cmd_encode(args) -> int:
    carrier = load_wav(args.carrier)
    curve = Curve.load_json(args.curve)
    cfg = _config_from_args(args)
    result = encode(carrier, curve, cfg)
    save_wav(result.stego, args.out, fmt=args.format)
    if args.sidecar:
        result.save_sidecar(args.sidecar)
        print(f"wrote evaluation sidecar to {args.sidecar}")
    print(
        f"embedded {curve.dimension}D curve "
        f"({result.prepared.n_samples} samples) into {args.out}; "
        f"snr {metrics.snr(result.stego, carrier):.1f} dB, "
        f"{result.clip_count} samples clipped"
    )
    return 0


def cmd_decode(args) -> int:
    clip = load_wav(args.stego)
    cfg = _config_from_args(args)
    if args.shift is not None:
        curve = decode_at_shift(clip, args.shift, cfg, dimension=args.dims)
        shift = args.shift
        profile = None
    else:
        decoded = recover_alignment(clip, cfg, dimension=args.dims)
        curve, shift, profile = decoded.curve, decoded.shift, decoded.lengths_by_shift
    curve.save_json(args.out)
    if args.diagnostics:
        diag = {"shift": int(shift)}
        if profile is not None:
            diag["lengths_by_shift"] = [float(v) for v in profile]
        with open(args.diagnostics, "w") as fh:
            json.dump(diag, fh)
        print(f"wrote diagnostics to {args.diagnostics}")
    print(f"decoded {len(curve)} samples at shift {shift}, written to {args.out}")
    return 0


def roundtrip_record(carrier, curve, cfg, codec, scratch=None,
                     search_alignment=True) -> dict:
    """Encode, optionally compress, decode, measure.  Shared by CLI and sweeps."""
    result = encode(carrier, curve, cfg)
    record = {
        "config": cfg.to_dict(),
        "snr_db": metrics.snr(result.stego, carrier),
        "clip_count": result.clip_count,
    }
    received = result.stego
    if codec is not None:
        received = codec_roundtrip(result.stego, codec, scratch=scratch)
        record["codec_bitrate_kbps"] = codec.bitrate_kbps
        record["post_codec_snr_db"] = metrics.snr(received, carrier)
    if search_alignment:
        decoded = recover_alignment(received, cfg, dimension=curve.dimension)
        dec_curve, shift = decoded.curve, decoded.shift
    else:
        dec_curve, shift = decode_at_shift(
            received, 0, cfg, dimension=curve.dimension), 0
    w = cfg.window_length
    record["shift"] = int(shift)
    record["shift_error"] = int(min(shift % w, (-shift) % w))

    # a recovered shift just below w means the grid landed one frame late
    offset = 1 if shift > w // 2 else 0
    values = result.prepared.values[:, offset:]
    pts = dec_curve.points[: values.shape[1]]
    values = values[:, : pts.shape[0]]
    record["distortion"] = metrics.aligned_distortion(
        Curve(points=pts), {"values": values}
    )
    return record


def cmd_roundtrip(args) -> int:
    carrier = load_wav(args.carrier)
    curve = Curve.load_json(args.curve)
    cfg = _config_from_args(args)
    codec = _resolve_codec(args.codec, args.bitrate)
    record = roundtrip_record(
        carrier, curve, cfg, codec, scratch=args.scratch,
        search_alignment=not args.assume_aligned,
    )
    with open(args.out, "w") as fh:
        json.dump(record, fh, indent=2)
    print(json.dumps(record, indent=2))
    return 0


def cmd_sweep(args) -> int:
    carriers = [load_wav(p) for p in args.carriers]
    curves = [Curve.load_json(p) for p in args.curves]
    lams = [float(v) for v in args.lam_values.split(",")]
    ells = [int(v) for v in args.ell_values.split(",")]
    codec = _resolve_codec(args.codec, args.bitrate)
    base = _config_from_args(args).to_dict()
    records = []
    for ci, carrier in enumerate(carriers):
        for gi, curve in enumerate(curves):
            for lam in lams:
                for ell in ells:
                    cfg = EncodingConfig.from_dict(
                        {**base, "lam": lam, "sliding_window": ell}
                    )
                    rec = roundtrip_record(
                        carrier, curve, cfg, codec, scratch=args.scratch
                    )
                    rec["carrier"] = args.carriers[ci]
                    rec["curve"] = args.curves[gi]
                    records.append(rec)
                    print(
                        f"carrier={ci} curve={gi} lam={lam} ell={ell}: "
                        f"snr={rec['snr_db']:.1f} dB "
                        f"distortion={rec['distortion']:.4f} "
                        f"shift_err={rec['shift_error']}"
                    )
    with open(args.out, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvestego",
        description="hide closed curves in musical audio and recover them",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stipple", help="image -> weighted stipple points")
    p.add_argument("image")
    p.add_argument("--out", required=True)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--iters", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.8,
                   help="brightness above which weight is zero")
    p.add_argument("--blur-sigma", type=float, default=2.0, dest="blur_sigma")
    p.add_argument("--canny-low", type=float, default=0.1, dest="canny_low")
    p.add_argument("--canny-high", type=float, default=0.2, dest="canny_high")
    p.add_argument("--no-edges", action="store_true", dest="no_edges")
    p.set_defaults(func=cmd_stipple)

    p = sub.add_parser("tour", help="stipple points -> simple closed tour")
    p.add_argument("stipple")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--sigma", type=float, default=1.0,
                   help="smoothing kernel width in samples")
    p.add_argument("--no-smooth", action="store_true", dest="no_smooth")
    p.set_defaults(func=cmd_tour)

    p = sub.add_parser("hamcycle", help="watertight mesh -> covering loop")
    p.add_argument("mesh")
    p.add_argument("--out", required=True)
    p.add_argument("--obj", help="also export an OBJ polyline")
    p.set_defaults(func=cmd_hamcycle)

    p = sub.add_parser("encode", help="hide a curve in a carrier WAV")
    p.add_argument("carrier")
    p.add_argument("curve")
    p.add_argument("--out", required=True)
    p.add_argument("--sidecar", help="write the evaluation record JSON")
    p.add_argument("--format", choices=["float32", "pcm16"], default="float32")
    _add_config_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="recover a curve from audio alone")
    p.add_argument("stego")
    p.add_argument("--out", required=True)
    p.add_argument("--diagnostics", help="write shift diagnostics JSON")
    p.add_argument("--dims", type=int, default=2, choices=[2, 3])
    p.add_argument("--shift", type=int,
                   help="decode at a fixed offset instead of searching")
    _add_config_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("roundtrip", help="encode, compress, decode, measure")
    p.add_argument("carrier")
    p.add_argument("curve")
    p.add_argument("--out", required=True)
    p.add_argument("--codec", default="auto",
                   choices=["auto", "mp3", "bundled", "identity", "none"])
    p.add_argument("--bitrate", type=int, default=64)
    p.add_argument("--scratch", default=None,
                   help=f"temp dir (or set {SCRATCH_ENV_VAR})")
    p.add_argument("--assume-aligned", action="store_true", dest="assume_aligned")
    _add_config_flags(p)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("sweep", help="batch roundtrips over lam and ell grids")
    p.add_argument("--carriers", nargs="+", required=True)
    p.add_argument("--curves", nargs="+", required=True)
    p.add_argument("--lam-values", default="0.1,1,10", dest="lam_values")
    p.add_argument("--ell-values", default="16", dest="ell_values")
    p.add_argument("--codec", default="auto",
                   choices=["auto", "mp3", "bundled", "identity", "none"])
    p.add_argument("--bitrate", type=int, default=64)
    p.add_argument("--scratch", default=None)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
