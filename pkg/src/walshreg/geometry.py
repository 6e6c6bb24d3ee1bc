"""Gray images, rigid parameters, warping and difference images.

Conventions used throughout the package:

* rotation is about the image center ((w-1)/2, (h-1)/2), counterclockwise
  positive in standard x/y mathematical coordinates;
* an output pixel (x, y) of a warp is sampled from the source at
  (x cos(theta) - y sin(theta) - t, x sin(theta) + y cos(theta) - s),
  coordinates taken relative to the center;
* nearest-neighbor lookup uses np.rint everywhere, so integer-parameter
  warps are exact index shifts.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

__all__ = [
    "GrayImage",
    "RigidParams",
    "rigid_source_coords",
    "warp",
    "mm_to_px",
    "difference_image",
    "alignment_residual",
]


@dataclass
class GrayImage:
    """2D grid of 8-bit intensities plus an isotropic pixel spacing in mm."""

    pixels: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 2:
            raise DimensionError(f"image must be 2D, got shape {self.pixels.shape}")
        if self.pixels.dtype != np.uint8:
            if self.pixels.min() < 0 or self.pixels.max() > 255:
                raise ParameterError("intensities must fit in 8 bits")
            self.pixels = self.pixels.astype(np.uint8)
        if not self.spacing > 0:
            raise ParameterError(f"spacing must be positive, got {self.spacing}")

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def _wrap_degrees(theta):
    t = (float(theta) + 180.0) % 360.0 - 180.0
    return 180.0 if t == -180.0 else t


@dataclass(frozen=True)
class RigidParams:
    """Translation pair (pixels) plus rotation angle (degrees, (-180, 180])."""

    t: float = 0.0
    s: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", _wrap_degrees(self.theta))


def rigid_source_coords(shape, params):
    """Source x/y coordinate grids for a warp of the given output shape."""
    h, w = shape
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    th = np.deg2rad(params.theta)
    c, sn = np.cos(th), np.sin(th)
    y, x = np.mgrid[0:h, 0:w]
    xc = x - cx
    yc = y - cy
    u = c * xc - sn * yc + cx - params.t
    v = sn * xc + c * yc + cy - params.s
    return u, v


def warp(img, params, interp="bilinear"):
    """Rigid warp of a gray image; returns (warped image, overlap mask).

    Pixels whose source coordinate falls outside the input are masked out
    and set to 0.
    """
    if interp not in ("nearest", "bilinear"):
        raise ParameterError(f"unknown interpolator {interp!r}")
    src = np.asarray(img.pixels, dtype=np.float64)
    h, w = src.shape
    u, v = rigid_source_coords(src.shape, params)
    inside = (u >= 0) & (u <= w - 1) & (v >= 0) & (v <= h - 1)
    out = np.zeros((h, w), dtype=np.float64)
    if interp == "nearest":
        iu = np.clip(np.rint(u).astype(np.intp), 0, w - 1)
        iv = np.clip(np.rint(v).astype(np.intp), 0, h - 1)
        out[inside] = src[iv[inside], iu[inside]]
    else:
        u0 = np.clip(np.floor(u).astype(np.intp), 0, w - 2)
        v0 = np.clip(np.floor(v).astype(np.intp), 0, h - 2)
        fu = np.clip(u - u0, 0.0, 1.0)
        fv = np.clip(v - v0, 0.0, 1.0)
        tl = src[v0, u0]
        tr = src[v0, u0 + 1]
        bl = src[v0 + 1, u0]
        br = src[v0 + 1, u0 + 1]
        val = (tl * (1 - fu) + tr * fu) * (1 - fv) + (bl * (1 - fu) + br * fu) * fv
        out[inside] = val[inside]
    pixels = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return GrayImage(pixels=pixels, spacing=img.spacing), inside


def mm_to_px(x_mm, spacing):
    """Convert a millimetre offset to the nearest integer pixel count."""
    if not spacing > 0:
        raise ParameterError(f"spacing must be positive, got {spacing}")
    return int(np.rint(x_mm / spacing))


def difference_image(a, b, mask=None):
    """Per-pixel absolute difference inside the mask, 0 outside."""
    pa = np.asarray(a.pixels, dtype=np.int16)
    pb = np.asarray(b.pixels, dtype=np.int16)
    if pa.shape != pb.shape:
        raise DimensionError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    d = np.abs(pa - pb).astype(np.uint8)
    if mask is not None:
        d = np.where(mask, d, 0).astype(np.uint8)
    return GrayImage(pixels=d, spacing=a.spacing)


def alignment_residual(applied, recovered):
    """Residual misalignment after undoing ``applied`` with ``recovered``.

    Warping by ``applied`` and then by ``recovered`` composes to a rigid
    transform with rotation applied.theta + recovered.theta and translation
    R(applied.theta) @ (recovered.t, recovered.s) + (applied.t, applied.s).
    Returns (translation residual in pixels, |angle residual| in degrees).
    """
    th = np.deg2rad(applied.theta)
    c, sn = np.cos(th), np.sin(th)
    rx = c * recovered.t - sn * recovered.s + applied.t
    ry = sn * recovered.t + c * recovered.s + applied.s
    ang = abs(_wrap_degrees(applied.theta + recovered.theta))
    return float(np.hypot(rx, ry)), ang
