"""Benchmark harness: synthetic test images, the 21-perturbation protocol,
and encoding-path timings."""

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import gaussian_filter

from .geometry import GrayImage, RigidParams, mm_to_px, warp
from .registration import SearchSpec, register, pyramid_search
from .structure_codes import encode_image
from .transforms import direct_oracle, hadamard_plan
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "BenchmarkRow",
    "DEFAULT_PERTURBATIONS",
    "synthetic_image",
    "run_benchmark",
    "time_encoding_paths",
]

# The (X mm, Y mm, angle deg) perturbation triples of the evaluation
# protocol, applied in order; the last row is the unperturbed control.
DEFAULT_PERTURBATIONS = (
    (4, -10, 9),
    (-12, -7, 13),
    (5, -7, 5),
    (-14, -15, 2),
    (-8, -7, 1),
    (9, 7, -7),
    (7, -13, 11),
    (18, 1, 19),
    (-17, 0, -17),
    (0, -9, 12),
    (23, -6, 2),
    (-15, 5, -10),
    (22, 20, 2),
    (5, 15, 12),
    (-21, 16, -5),
    (-1, 19, 13),
    (5, 10, -25),
    (-3, 11, 25),
    (11, -9, 0),
    (0, 0, 12),
    (0, 0, 0),
)


@dataclass
class BenchmarkRow:
    """One perturbation's outcome for one backend."""

    index: int
    x_mm: float
    y_mm: float
    angle_deg: float
    backend: str
    t: float = None
    s: float = None
    theta: float = None
    mi_after: float = None
    cc_after: float = None
    elapsed_seconds: float = None
    status: str = "ok"


def synthetic_image(size=256, seed=0, spacing=1.0):
    """Structured random test image: smoothed noise plus a few shapes.

    Deterministic for a given seed; aperiodic enough that rigid
    registration has a unique optimum.
    """
    rng = np.random.default_rng(seed)
    base = gaussian_filter(rng.normal(size=(size, size)), sigma=3.0)
    base += 0.5 * gaussian_filter(rng.normal(size=(size, size)), sigma=10.0)
    y, x = np.mgrid[0:size, 0:size]
    for _ in range(6):
        cy, cx = rng.uniform(0.2 * size, 0.8 * size, size=2)
        r = rng.uniform(0.05 * size, 0.15 * size)
        base += 0.8 * ((y - cy) ** 2 + (x - cx) ** 2 < r * r)
    base += x / size * 0.5
    lo, hi = base.min(), base.max()
    pixels = np.rint((base - lo) / (hi - lo) * 255).astype(np.uint8)
    return GrayImage(pixels=pixels, spacing=spacing)


def run_benchmark(image, perturbations=None, spec=None, backends=("walsh3", "fwht4"), use_pyramid=False):
    """Warp the image by each perturbation triple, register it back with
    each backend, and collect one row per (triple, backend).

    Returns (rows, summary); the summary holds total elapsed time per
    backend and the walsh3/fwht4 time ratio.
    """
    if perturbations is None:
        perturbations = DEFAULT_PERTURBATIONS
    if spec is None:
        spec = SearchSpec()
    rows = []
    totals = {b: 0.0 for b in backends}
    search = pyramid_search if use_pyramid else register
    for idx, (x_mm, y_mm, angle) in enumerate(perturbations, start=1):
        params = RigidParams(
            t=mm_to_px(x_mm, image.spacing), s=mm_to_px(y_mm, image.spacing), theta=angle
        )
        moving, _ = warp(image, params, interp="bilinear")
        for backend in backends:
            bspec = replace(spec, backend=backend)
            result = search(image, moving, bspec)
            row = BenchmarkRow(
                index=idx,
                x_mm=x_mm,
                y_mm=y_mm,
                angle_deg=angle,
                backend=backend,
                elapsed_seconds=result.elapsed_seconds,
                status=result.status,
            )
            if result.status == "ok":
                row.t = result.params.t
                row.s = result.params.s
                row.theta = result.params.theta
                row.mi_after = result.mi_after
                row.cc_after = result.cc_after
            totals[backend] += result.elapsed_seconds
            rows.append(row)
    summary = {f"total_seconds_{b}": totals[b] for b in backends}
    if "walsh3" in totals and "fwht4" in totals and totals["fwht4"] > 0:
        summary["time_ratio_walsh3_over_fwht4"] = totals["walsh3"] / totals["fwht4"]
    return rows, summary


def _encode_via_oracle(img, base=10):
    """Per-pixel 4x4 encoding through the naive direct-multiply oracle.

    Reference-speed baseline for the fast butterfly path; produces the
    same codes, one patch at a time.
    """
    from .structure_codes import _quantize_array, digit_ordering

    plan = hadamard_plan(4, ordering="sequency")
    m = plan.matrix().astype(np.float64)
    pixels = np.asarray(img.pixels, dtype=np.float64)
    h, w = pixels.shape
    windows = sliding_window_view(pixels, (4, 4))
    codes = np.zeros((h, w), dtype=np.int64)
    weights = (base ** np.arange(14, -1, -1)).astype(np.int64)
    for r in range(windows.shape[0]):
        for c in range(windows.shape[1]):
            g = direct_oracle(windows[r, c], m).coeffs
            dc = g[0, 0]
            flat = g.ravel()[1:]
            peak = np.max(np.abs(g))
            if peak == 0.0 or abs(dc) < 1e-12 * peak:
                alphas = np.zeros(15)
            else:
                alphas = flat / dc
            digits = _quantize_array(alphas, base)
            codes[r + 1, c + 1] = int(digits @ weights)
    return codes


def time_encoding_paths(img=None, base=10, repeats=1):
    """Time fast 4x4 butterfly encoding against the naive oracle path.

    Returns a dict with both wall-clock times, their ratio, and whether the
    two paths produced identical codes.
    """
    if img is None:
        img = synthetic_image(256, seed=1)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fast = encode_image(img, backend="fwht4", base=base)
    fast_s = (time.perf_counter() - t0) / repeats
    t0 = time.perf_counter()
    naive_codes = _encode_via_oracle(img, base=base)
    naive_s = time.perf_counter() - t0
    return {
        "fast_seconds": fast_s,
        "naive_seconds": naive_s,
        "speedup": naive_s / fast_s if fast_s > 0 else float("inf"),
        "codes_match": bool(np.array_equal(fast.codes, naive_codes)),
    }
