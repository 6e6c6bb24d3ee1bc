"""Rigid registration by exhaustive maximization of the structure-code
correlation coefficient.

The search scans every (t, s, theta) grid cell.  For one rotation angle the
objective over all integer translations is evaluated in closed form: the
reference codes are scattered onto the rotated pixel grid and the five
Pearson sums become 2D cross-correlations against the moving-code planes,
computed with FFTs.  Because nearest-neighbor rounding commutes with
integer shifts, this equals the per-cell double-sum evaluation up to FFT
roundoff; the winning cell's score is recomputed exactly.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.fft import next_fast_len, rfft2, irfft2

from .errors import DimensionError, MetricError, ParameterError
from .geometry import GrayImage, RigidParams
from .metrics import correlation_coefficient, intensity_cc, mutual_information
from .structure_codes import digit_ordering, encode_image
from . import geometry

__all__ = ["SearchSpec", "RegistrationResult", "register", "evaluate_pair", "pyramid_search"]

# FFT roundoff floor for the per-cell variance sums of standardized codes.
_VAR_TOL = 1e-6


@dataclass(frozen=True)
class SearchSpec:
    """Exhaustive-search configuration.

    Translation ranges are inclusive pixel intervals scanned with integer
    steps; the rotation range is in degrees.  The defaults cover every
    perturbation used by the benchmark protocol.
    """

    t_range: tuple = (-25, 25)
    s_range: tuple = (-25, 25)
    theta_range: tuple = (-25.0, 25.0)
    t_step: int = 1
    s_step: int = 1
    theta_step: float = 1.0
    pyramid_levels: int = 1
    backend: str = "fwht4"
    base: int = 10
    ordering: str = None
    bins: int = 256
    min_overlap: float = 0.05
    workers: int = 1

    def __post_init__(self):
        for name in ("t_range", "s_range", "theta_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ParameterError(f"{name} is empty: {lo}..{hi}")
        if self.t_step < 1 or self.s_step < 1 or not self.theta_step > 0:
            raise ParameterError("search steps must be positive")
        if self.pyramid_levels < 1:
            raise ParameterError("pyramid_levels must be >= 1")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")

    def grids(self):
        t = np.arange(int(self.t_range[0]), int(self.t_range[1]) + 1, self.t_step)
        s = np.arange(int(self.s_range[0]), int(self.s_range[1]) + 1, self.s_step)
        lo, hi = self.theta_range
        n = int(np.floor((hi - lo) / self.theta_step + 1e-9)) + 1
        th = lo + self.theta_step * np.arange(n)
        return t, s, th


@dataclass
class RegistrationResult:
    """Recovered parameters plus the quality metrics of one registration."""

    params: RigidParams
    score: float
    mi_after: float
    cc_after: float
    elapsed_seconds: float
    status: str
    error_kind: str = None


def _standardized(sci):
    """Codes as zero-mean unit-variance floats over the valid pixels."""
    vals = sci.codes.astype(np.float64)
    v = vals[sci.valid_mask]
    if v.size == 0:
        return None
    mean = v.mean()
    std = v.std()
    if std == 0.0:
        return None
    out = np.where(sci.valid_mask, (vals - mean) / std, 0.0)
    return out


def _plane_sizes(shape, t_grid, s_grid, th_grid):
    h, w = shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    th = np.deg2rad(th_grid)
    ac, asn = np.abs(np.cos(th)), np.abs(np.sin(th))
    # per-axis half-extent of the rotated pixel grid over the angles scanned
    rx = float(np.max(cx * ac + cy * asn)) + 1.0
    ry = float(np.max(cy * ac + cx * asn)) + 1.0
    sy = int(np.ceil(max(cy + ry - s_grid.min(), h - 1 - cy + ry + s_grid.max()))) + 2
    sx = int(np.ceil(max(cx + rx - t_grid.min(), w - 1 - cx + rx + t_grid.max()))) + 2
    return next_fast_len(max(sy, h)), next_fast_len(max(sx, w))


def _scan(ref_sci, mov_sci, spec):
    """Evaluate the CC objective on the whole grid.

    Returns (t_grid, s_grid, theta_grid, scores, valid, any_overlap) where
    scores[i_theta, i_s, i_t] is the objective and valid marks cells with
    enough overlap and non-degenerate variance on both sides.
    """
    if ref_sci.codes.shape != mov_sci.codes.shape:
        raise DimensionError("reference and moving images must have the same shape")
    t_grid, s_grid, th_grid = spec.grids()
    h, w = ref_sci.codes.shape
    shape3 = (th_grid.size, s_grid.size, t_grid.size)
    scores = np.full(shape3, -np.inf)
    valid = np.zeros(shape3, dtype=bool)

    ref_vals = _standardized(ref_sci)
    mov_vals = _standardized(mov_sci)
    n_ref = int(ref_sci.valid_mask.sum())
    if ref_vals is None or mov_vals is None or n_ref == 0:
        return t_grid, s_grid, th_grid, scores, valid, n_ref > 0
    min_n = max(2, int(np.ceil(spec.min_overlap * n_ref)))

    sy, sx = _plane_sizes((h, w), t_grid, s_grid, th_grid)
    vm = np.zeros((sy, sx))
    mm = np.zeros((sy, sx))
    m2 = np.zeros((sy, sx))
    vm[:h, :w] = mov_sci.valid_mask
    mm[:h, :w] = mov_vals
    m2[:h, :w] = mov_vals * mov_vals
    f_vm = np.conj(rfft2(vm))
    f_mm = np.conj(rfft2(mm))
    f_m2 = np.conj(rfft2(m2))

    ys, xs = np.nonzero(ref_sci.valid_mask)
    a_ref = ref_vals[ys, xs]
    a2_ref = a_ref * a_ref
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    xc = xs - cx
    yc = ys - cy
    s_idx = s_grid % sy
    t_idx = t_grid % sx
    any_overlap = np.zeros(th_grid.size, dtype=bool)

    def scan_theta(i):
        th = np.deg2rad(th_grid[i])
        c, sn = np.cos(th), np.sin(th)
        iu = np.rint(c * xc - sn * yc + cx).astype(np.int64)
        iv = np.rint(sn * xc + c * yc + cy).astype(np.int64)
        flat = (iv % sy) * sx + (iu % sx)
        n_pl = np.bincount(flat, minlength=sy * sx).reshape(sy, sx).astype(np.float64)
        a_pl = np.bincount(flat, weights=a_ref, minlength=sy * sx).reshape(sy, sx)
        a2_pl = np.bincount(flat, weights=a2_ref, minlength=sy * sx).reshape(sy, sx)
        f_n = rfft2(n_pl)
        f_a = rfft2(a_pl)
        f_a2 = rfft2(a2_pl)

        def corr(fx, fy):
            return irfft2(fx * fy, s=(sy, sx))[np.ix_(s_idx, t_idx)]

        n = np.rint(corr(f_n, f_vm))
        sa = corr(f_a, f_vm)
        sa2 = corr(f_a2, f_vm)
        sb = corr(f_n, f_mm)
        sb2 = corr(f_n, f_m2)
        sab = corr(f_a, f_mm)

        ok_n = n >= min_n
        n_safe = np.maximum(n, 1.0)
        varx = sa2 - sa * sa / n_safe
        vary = sb2 - sb * sb / n_safe
        ok = ok_n & (varx > _VAR_TOL) & (vary > _VAR_TOL)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = (sab - sa * sb / n_safe) / np.sqrt(np.maximum(varx, 0.0) * np.maximum(vary, 0.0))
        sc = np.where(ok, np.clip(r, -1.0, 1.0), -np.inf)
        return i, sc, ok, bool(np.any(n > 0))

    indices = range(th_grid.size)
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(scan_theta, indices))
    else:
        results = [scan_theta(i) for i in indices]
    for i, sc, ok, overlapped in results:
        scores[i] = sc
        valid[i] = ok
        any_overlap[i] = overlapped
    return t_grid, s_grid, th_grid, scores, valid, bool(any_overlap.any())


def _pick_winner(t_grid, s_grid, th_grid, scores, valid):
    """Argmax with deterministic tie-breaking: smallest |theta|, then
    smallest |t|+|s|, then lexicographic (theta, t, s)."""
    if not valid.any():
        return None
    best = scores[valid].max()
    cand = np.argwhere(scores == best)
    keys = []
    for i, j, k in cand:
        th, s, t = th_grid[i], s_grid[j], t_grid[k]
        keys.append((abs(th), abs(t) + abs(s), th, t, s, (i, j, k)))
    keys.sort()
    th, s, t = keys[0][2], keys[0][4], keys[0][3]
    return RigidParams(t=float(t), s=float(s), theta=float(th))


def _encode_pair(reference, moving, spec):
    ndigits = 8 if spec.backend == "walsh3" else 15
    ordering = None if spec.ordering is None else digit_ordering(spec.ordering, ndigits)
    ref_sci = encode_image(reference, backend=spec.backend, base=spec.base, ordering=ordering)
    mov_sci = encode_image(moving, backend=spec.backend, base=spec.base, ordering=ordering)
    return ref_sci, mov_sci


def evaluate_pair(reference, registered, mask=None, bins=256):
    """MI (bits) and intensity correlation of an already-aligned pair."""
    mi = mutual_information(reference.pixels, registered.pixels, mask=mask, bins=bins)
    cc = intensity_cc(reference.pixels, registered.pixels, mask=mask)
    return mi, cc


def _finish(reference, moving, ref_sci, mov_sci, spec, params, start):
    score = correlation_coefficient(ref_sci, mov_sci, params)
    warped, mask = geometry.warp(moving, params, interp="bilinear")
    mi_after, cc_after = evaluate_pair(reference, warped, mask=mask, bins=spec.bins)
    return RegistrationResult(
        params=params,
        score=score,
        mi_after=mi_after,
        cc_after=cc_after,
        elapsed_seconds=time.perf_counter() - start,
        status="ok",
    )


def _error_result(start, kind):
    return RegistrationResult(
        params=None,
        score=None,
        mi_after=None,
        cc_after=None,
        elapsed_seconds=time.perf_counter() - start,
        status="error",
        error_kind=kind,
    )


def _search_only(reference, moving, spec):
    """Grid search without the final metrics pass: (params, error_kind)."""
    try:
        ref_sci, mov_sci = _encode_pair(reference, moving, spec)
    except DimensionError:
        return None, "degenerate_input", None, None
    t_grid, s_grid, th_grid, scores, valid, any_overlap = _scan(ref_sci, mov_sci, spec)
    params = _pick_winner(t_grid, s_grid, th_grid, scores, valid)
    if params is None:
        return None, "zero_variance" if any_overlap else "empty_overlap", None, None
    return params, None, ref_sci, mov_sci


def register(reference, moving, spec=None):
    """Recover the rigid parameters aligning ``moving`` to ``reference``.

    Both images are encoded to structure codes, the full (t, s, theta) grid
    is scanned, and the argmax of the correlation coefficient wins; MI and
    intensity CC are then evaluated on the warped moving image.  If every
    grid cell fails (empty overlap or flat codes) the result carries
    status "error" instead.
    """
    if spec is None:
        spec = SearchSpec()
    start = time.perf_counter()
    params, kind, ref_sci, mov_sci = _search_only(reference, moving, spec)
    if params is None:
        return _error_result(start, kind)
    try:
        return _finish(reference, moving, ref_sci, mov_sci, spec, params, start)
    except MetricError as exc:
        return _error_result(start, exc.kind)


def _downsample(img):
    """Half-resolution image by 2x2 block averaging (odd edges cropped)."""
    p = img.pixels
    h, w = p.shape[0] // 2 * 2, p.shape[1] // 2 * 2
    blocks = p[:h, :w].astype(np.float64).reshape(h // 2, 2, w // 2, 2)
    half = np.rint(blocks.mean(axis=(1, 3))).astype(np.uint8)
    return GrayImage(pixels=half, spacing=img.spacing * 2.0)


def _halved_spec(spec):
    def half_range(rng):
        lo, hi = rng
        return (int(np.floor(lo / 2)), int(np.ceil(hi / 2)))

    return replace(
        spec,
        t_range=half_range(spec.t_range),
        s_range=half_range(spec.s_range),
        theta_step=spec.theta_step * 2.0,
        pyramid_levels=spec.pyramid_levels - 1,
        workers=spec.workers,
    )


def _clip_window(center, halfwidth, rng):
    lo = max(rng[0], center - halfwidth)
    hi = min(rng[1], center + halfwidth)
    if lo > hi:
        lo = hi = min(max(center, rng[0]), rng[1])
    return (lo, hi)


def _refined_spec(spec, coarse_params):
    """Fine-level spec: +/- 2 steps around the upscaled coarse optimum."""
    seed_t = int(np.rint(coarse_params.t * 2))
    seed_s = int(np.rint(coarse_params.s * 2))
    return replace(
        spec,
        pyramid_levels=1,
        t_range=_clip_window(seed_t, 2 * spec.t_step, spec.t_range),
        s_range=_clip_window(seed_s, 2 * spec.s_step, spec.s_range),
        theta_range=_clip_window(coarse_params.theta, 2 * spec.theta_step, spec.theta_range),
    )


def _coarse_params(reference, moving, spec):
    """Parameters-only coarse-to-fine search; metrics are skipped on the
    way up because only the top level reports them."""
    if spec.pyramid_levels == 1:
        params, _, _, _ = _search_only(reference, moving, spec)
        return params
    coarse = _coarse_params(_downsample(reference), _downsample(moving), _halved_spec(spec))
    if coarse is None:
        params, _, _, _ = _search_only(reference, moving, replace(spec, pyramid_levels=1))
        return params
    params, _, _, _ = _search_only(reference, moving, _refined_spec(spec, coarse))
    return params


def pyramid_search(reference, moving, spec=None):
    """Coarse-to-fine variant of :func:`register`.

    Each extra level halves the resolution (and the translation ranges);
    the coarse optimum, scaled back up, seeds a window of +/- 2 steps per
    parameter that is then scanned exhaustively at the finer level.
    """
    if spec is None:
        spec = SearchSpec(pyramid_levels=2)
    if spec.pyramid_levels == 1:
        return register(reference, moving, spec)
    start = time.perf_counter()
    coarse = _coarse_params(_downsample(reference), _downsample(moving), _halved_spec(spec))
    if coarse is None:
        result = register(reference, moving, replace(spec, pyramid_levels=1))
    else:
        result = register(reference, moving, _refined_spec(spec, coarse))
    result.elapsed_seconds = time.perf_counter() - start
    return result
