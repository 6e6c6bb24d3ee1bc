"""Mutual information and correlation-coefficient similarity metrics.

Both metrics are evaluated over the overlap of the two inputs only.  MI is
reported in bits (base-2 logarithm).  The structure-code correlation
samples the second image with nearest-neighbor lookup, since codes are
positional integers that cannot meaningfully be interpolated.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, MetricError, ParameterError
from .geometry import rigid_source_coords

__all__ = [
    "JointHistogram",
    "joint_histogram",
    "mutual_information",
    "entropy",
    "pearson",
    "intensity_cc",
    "correlation_coefficient",
]


@dataclass(frozen=True)
class JointHistogram:
    """Joint intensity counts plus their row/column marginals."""

    bins: int
    counts: np.ndarray
    marginal_a: np.ndarray
    marginal_b: np.ndarray
    total: int


def _bin_indices(values, bins):
    v = np.asarray(values)
    if v.dtype == np.uint8 and bins == 256:
        return v.astype(np.intp)
    v = v.astype(np.float64)
    lo = v.min()
    hi = v.max()
    if hi == lo:
        return np.zeros(v.shape, dtype=np.intp)
    idx = np.floor((v - lo) / (hi - lo) * bins).astype(np.intp)
    return np.minimum(idx, bins - 1)


def _overlap_values(a, b, mask):
    pa = np.asarray(a.pixels if hasattr(a, "pixels") else a)
    pb = np.asarray(b.pixels if hasattr(b, "pixels") else b)
    if pa.shape != pb.shape:
        raise DimensionError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    if mask is None:
        return pa.ravel(), pb.ravel()
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != pa.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match images {pa.shape}")
    return pa[mask], pb[mask]


def joint_histogram(a, b, mask=None, bins=256):
    """Joint histogram of two images over their overlap."""
    if bins < 2:
        raise ParameterError(f"need at least 2 bins, got {bins}")
    va, vb = _overlap_values(a, b, mask)
    if va.size == 0:
        raise MetricError("empty_overlap", "no overlapping pixels")
    ia = _bin_indices(va, bins)
    ib = _bin_indices(vb, bins)
    counts = np.bincount(ia * bins + ib, minlength=bins * bins).reshape(bins, bins)
    return JointHistogram(
        bins=bins,
        counts=counts,
        marginal_a=counts.sum(axis=1),
        marginal_b=counts.sum(axis=0),
        total=int(counts.sum()),
    )


def mutual_information(a, b, mask=None, bins=256):
    """I(A;B) in bits from the binned joint distribution, Eq.-style sum."""
    hist = joint_histogram(a, b, mask=mask, bins=bins)
    p = hist.counts / hist.total
    pa = hist.marginal_a / hist.total
    pb = hist.marginal_b / hist.total
    nz = hist.counts > 0
    outer = pa[:, None] * pb[None, :]
    mi = float(np.sum(p[nz] * np.log2(p[nz] / outer[nz])))
    return max(mi, 0.0)


def entropy(a, mask=None, bins=256):
    """Shannon entropy in bits of one image's binned marginal."""
    hist = joint_histogram(a, a, mask=mask, bins=bins)
    p = hist.marginal_a / hist.total
    nz = p > 0
    return float(-np.sum(p[nz] * np.log2(p[nz])))


def pearson(x, y):
    """Pearson correlation of two flat samples; exact 1.0 on identical data."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size == 0:
        raise MetricError("empty_overlap", "no overlapping pixels")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    sxy = float(dx @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise MetricError("zero_variance", "constant values in the overlap")
    if sxy == sxx and sxy == syy:
        return 1.0
    if -sxy == sxx and -sxy == syy:
        return -1.0
    r = sxy / (np.sqrt(sxx) * np.sqrt(syy))
    return float(np.clip(r, -1.0, 1.0))


def intensity_cc(a, b, mask=None):
    """Pearson correlation of raw intensities over the overlap."""
    va, vb = _overlap_values(a, b, mask)
    return pearson(va, vb)


def correlation_coefficient(s1, s2, params):
    """Correlation of structure values between a reference code image and a
    rigidly transformed one.

    For every valid reference pixel (x, y) the second image is sampled at
    (x cos(theta) - y sin(theta) - t, x sin(theta) + y cos(theta) - s),
    center-relative, nearest-neighbor; pixels whose source is out of bounds
    or invalid are dropped from the double sums.
    """
    if s1.codes.shape != s2.codes.shape:
        raise DimensionError(f"shape mismatch: {s1.codes.shape} vs {s2.codes.shape}")
    h, w = s1.codes.shape
    u, v = rigid_source_coords((h, w), params)
    iu = np.rint(u).astype(np.intp)
    iv = np.rint(v).astype(np.intp)
    inside = (iu >= 0) & (iu < w) & (iv >= 0) & (iv < h)
    overlap = s1.valid_mask & inside
    iu_c = np.clip(iu, 0, w - 1)
    iv_c = np.clip(iv, 0, h - 1)
    overlap &= s2.valid_mask[iv_c, iu_c]
    if not overlap.any():
        raise MetricError("empty_overlap", "no overlapping pixels under these parameters")
    x = s1.codes[overlap]
    y = s2.codes[iv_c[overlap], iu_c[overlap]]
    return pearson(x, y)
