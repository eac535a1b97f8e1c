"""Edge-aware weighted stippling.

Converts a grayscale image into a point set whose density tracks darkness,
with detected edges forced to full weight so thin lines between bright
regions still attract points.  Density weights feed a discrete weighted
Lloyd relaxation: every positive-weight pixel is assigned to its nearest
point and points move to the weighted centroids of their cells.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import binary_propagation, gaussian_filter, sobel
from scipy.spatial import cKDTree

LUMA = (0.299, 0.587, 0.114)


def to_gray(pixels) -> np.ndarray:
    """Normalize an image array to H x W floats in [0, 1] (luma for RGB)."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim == 3:
        if arr.shape[2] >= 3:
            arr = LUMA[0] * arr[..., 0] + LUMA[1] * arr[..., 1] + LUMA[2] * arr[..., 2]
        else:
            arr = arr[..., 0]
    if arr.ndim != 2:
        raise ValueError("expected a 2D grayscale or 3D color image array")
    if arr.max() > 1.0:
        arr = arr / 255.0
    arr = np.clip(arr, 0.0, 1.0)
    if arr.shape[0] < 8 or arr.shape[1] < 8:
        raise ValueError("image must be at least 8 x 8 pixels")
    return arr


def load_image(path) -> np.ndarray:
    """Load a raster image file as a grayscale [0, 1] array."""
    from PIL import Image

    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        return to_gray(np.asarray(im))


def canny_edges(img, blur_sigma: float = 2.0, low: float = 0.1,
                high: float = 0.2) -> np.ndarray:
    """Canny edge mask: blur, gradient, non-maximum suppression, hysteresis.

    Thresholds apply to gradient magnitude normalized to [0, 1].
    """
    if not 0 < low < high:
        raise ValueError("thresholds must satisfy 0 < low < high")
    img = np.asarray(img, dtype=np.float64)
    smooth = gaussian_filter(img, blur_sigma)
    gx = sobel(smooth, axis=1)
    gy = sobel(smooth, axis=0)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak == 0:
        return np.zeros_like(img, dtype=bool)
    mag = mag / peak

    # quantize gradient direction into 4 sectors and keep local maxima
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    sector = ((angle + np.pi / 8) // (np.pi / 4)).astype(int) % 4
    padded = np.pad(mag, 1, mode="constant")
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    nms = np.zeros_like(mag)
    h, w = mag.shape
    for sec, (dy, dx) in offsets.items():
        fwd = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        bwd = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        sel = (sector == sec) & (mag >= fwd) & (mag >= bwd)
        nms[sel] = mag[sel]

    strong = nms >= high
    weak = nms >= low
    return binary_propagation(strong, mask=weak, structure=np.ones((3, 3), bool))


def build_weights(img, b: float = 0.8, edges=None) -> np.ndarray:
    """Density weights: a linear ramp from 1 at black to 0 at brightness b.

    Pixels at or above the brightness threshold get weight 0; edge pixels are
    forced to weight 1 regardless of brightness.
    """
    if not 0 < b <= 1:
        raise ValueError("brightness threshold must be in (0, 1]")
    img = np.asarray(img, dtype=np.float64)
    weights = np.clip((b - img) / b, 0.0, None)
    if edges is not None:
        edges = np.asarray(edges, dtype=bool)
        if edges.shape != img.shape:
            raise ValueError("edge mask shape must match the image")
        weights[edges] = 1.0
    if not np.any(weights > 0):
        raise ValueError("weight map is all zero; lower the threshold")
    return weights


def voronoi_stipple(weights, n_points: int, n_iters: int = 40,
                    seed: int = 0) -> np.ndarray:
    """Weighted Lloyd relaxation on the pixel grid.

    Returns an (n_points, 2) array of (x, y) positions in image coordinates
    (x along columns, y along rows).  Initial points are sampled
    proportionally to the weights; each iteration moves every point to the
    weighted centroid of the pixels nearest to it, resampling points whose
    cells are empty.  Deterministic for a fixed seed.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    rows, cols = np.nonzero(weights > 0)
    if n_points < 1:
        raise ValueError("need at least one point")
    if n_points > len(rows):
        raise ValueError(
            f"{n_points} points exceed the {len(rows)} positive-weight pixels"
        )
    w = weights[rows, cols]
    prob = w / w.sum()
    px = cols.astype(np.float64)
    py = rows.astype(np.float64)
    coords = np.column_stack([px, py])
    rng = np.random.default_rng(seed)

    def sample(k):
        idx = rng.choice(len(coords), size=k, p=prob)
        return coords[idx]

    points = sample(n_points)
    for _ in range(n_iters):
        assign = cKDTree(points).query(coords)[1]
        mass = np.bincount(assign, weights=w, minlength=n_points)
        sx = np.bincount(assign, weights=w * px, minlength=n_points)
        sy = np.bincount(assign, weights=w * py, minlength=n_points)
        occupied = mass > 0
        points = points.copy()
        points[occupied, 0] = sx[occupied] / mass[occupied]
        points[occupied, 1] = sy[occupied] / mass[occupied]
        n_empty = int(np.count_nonzero(~occupied))
        if n_empty:
            points[~occupied] = sample(n_empty)
    return points


def quantization_energy(weights, points) -> float:
    """Weighted squared distance from each positive pixel to its nearest point."""
    weights = np.asarray(weights, dtype=np.float64)
    rows, cols = np.nonzero(weights > 0)
    coords = np.column_stack([cols.astype(float), rows.astype(float)])
    d, _ = cKDTree(np.asarray(points, float)).query(coords)
    return float(np.sum(weights[rows, cols] * d**2))
