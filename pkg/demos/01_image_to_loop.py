"""From a grayscale image to a simple closed loop.

Walks the drawing pipeline end to end: edge detection feeds density weights,
weighted Lloyd relaxation places stipple points, a spanning-tree traversal
plus 2-opt turns them into a crossing-free tour, and one pass of Gaussian
smoothing rounds it off.  Writes before/after SVGs next to this script.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from _shared import out_path, test_image

from curvestego import (
    build_weights,
    canny_edges,
    curvature_flow,
    curve_length,
    has_self_crossing,
    mst_tour,
    two_opt,
    voronoi_stipple,
)
from curvestego.cli import curve_to_svg


def main():
    img = test_image()
    print(f"image: {img.shape[0]} x {img.shape[1]}, brightness {img.min():.2f}..{img.max():.2f}")

    edges = canny_edges(img, blur_sigma=2.0, low=0.1, high=0.2)
    print(f"edge pixels: {int(edges.sum())}")

    weights = build_weights(img, b=0.8, edges=edges)
    points = voronoi_stipple(weights, n_points=600, n_iters=40, seed=0)
    print(f"stippled {len(points)} points over {int((weights > 0).sum())} weighted pixels")

    rough = mst_tour(points)
    print(f"spanning-tree tour length: {curve_length(rough):.1f}, "
          f"crossings: {has_self_crossing(rough)}")

    tour = two_opt(rough)
    print(f"after 2-opt: length {curve_length(tour):.1f}, "
          f"crossings: {has_self_crossing(tour)}")

    smooth = curvature_flow(tour, sigma=1.0)
    print(f"after one smoothing pass: length {curve_length(smooth):.1f}, "
          f"crossings: {has_self_crossing(smooth)}")

    curve_to_svg(tour, out_path("01_tour.svg"))
    curve_to_svg(smooth, out_path("01_tour_smoothed.svg"))
    print(f"wrote {out_path('01_tour.svg')} and {out_path('01_tour_smoothed.svg')}")


if __name__ == "__main__":
    main()
