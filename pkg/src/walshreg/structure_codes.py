"""Per-pixel structure codes built from quantized, normalized coefficients.

Every interior pixel's neighborhood is transformed (3x3 Walsh or 4x4 fast
Walsh-Hadamard), the non-DC coefficients are divided by the DC term, each
ratio is quantized to a digit in the chosen base, and the digits are packed
into one positional "unique number" describing the local structure.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionError, EncodingError, ParameterError
from .transforms import hadamard_matrix, hadamard_plan, walsh3_basis

__all__ = [
    "NormalizedCoefficients",
    "DigitOrdering",
    "StructureCodeImage",
    "ORDERING_TAGS",
    "digit_ordering",
    "normalize",
    "quantize_digit",
    "encode_code",
    "encode_image",
]

# Ratio of |dc| to the largest coefficient magnitude below which the whole
# normalized vector is zeroed instead of dividing by a vanishing dc.
_DC_EPS = 1e-12

# Digit positions for the eight non-DC 3x3 coefficients, indexed into the
# row-major list a01, a02, a10, a11, a12, a20, a21, a22.  IA/IB rank edges
# before corners, IIA/IIB are their reversals.
_RM3 = {(0, 1): 0, (0, 2): 1, (1, 0): 2, (1, 1): 3, (1, 2): 4, (2, 0): 5, (2, 1): 6, (2, 2): 7}


def _perm(pairs):
    return tuple(_RM3[p] for p in pairs)


ORDERING_TAGS = {
    "IA": _perm([(0, 1), (1, 0), (2, 0), (0, 2), (1, 1), (2, 1), (1, 2), (2, 2)]),
    "IB": _perm([(1, 0), (0, 1), (0, 2), (2, 0), (1, 1), (1, 2), (2, 1), (2, 2)]),
    "IIA": _perm([(2, 2), (2, 1), (1, 2), (1, 1), (0, 2), (2, 0), (1, 0), (0, 1)]),
    "IIB": _perm([(2, 2), (1, 2), (2, 1), (1, 1), (2, 0), (0, 2), (0, 1), (1, 0)]),
}


@dataclass(frozen=True)
class DigitOrdering:
    """Bijective assignment of non-DC coefficients to digit positions."""

    tag: str
    permutation: tuple

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ParameterError(f"permutation {self.permutation} is not a bijection")


def digit_ordering(tag, length=8):
    """Build a named ordering; IA/IB/IIA/IIB are defined for 8 digits only."""
    if tag == "rowmajor":
        return DigitOrdering(tag=tag, permutation=tuple(range(length)))
    if tag not in ORDERING_TAGS:
        raise ParameterError(f"unknown ordering tag {tag!r}")
    if length != 8:
        raise ParameterError(f"ordering {tag} is defined for 8 digits, not {length}")
    return DigitOrdering(tag=tag, permutation=ORDERING_TAGS[tag])


@dataclass(frozen=True)
class NormalizedCoefficients:
    """Non-DC coefficients divided by the DC term, row-major order."""

    values: np.ndarray
    dc: float


@dataclass
class StructureCodeImage:
    """Per-pixel structure numbers plus the valid-interior mask."""

    codes: np.ndarray
    valid_mask: np.ndarray
    base: int

    @property
    def height(self):
        return self.codes.shape[0]

    @property
    def width(self):
        return self.codes.shape[1]


def normalize(block):
    """Divide the non-DC coefficients by the DC coefficient.

    A vanishing DC term (|dc| below 1e-12 times the largest coefficient
    magnitude, or an all-zero block) yields an all-zero vector instead of a
    division blow-up.
    """
    g = np.asarray(block.coeffs, dtype=np.float64)
    dc = g[0, 0]
    flat = g.ravel()[1:]
    peak = np.max(np.abs(g))
    if peak == 0.0 or abs(dc) < _DC_EPS * peak:
        values = np.zeros_like(flat)
    else:
        values = flat / dc
    return NormalizedCoefficients(values=values, dc=float(dc))


def quantize_digit(alpha, base):
    """Quantize one normalized coefficient to a digit in [0, base-1].

    Alpha is clamped to [-1, +1] and mapped uniformly, so base 10 covers
    exactly the digits 0..9 with -1 -> 0 and +1 -> 9.
    """
    if base < 1:
        raise ParameterError(f"base must be >= 1, got {base}")
    a = min(1.0, max(-1.0, float(alpha)))
    return int(min(base - 1, np.floor((a + 1.0) / 2.0 * base)))


def _quantize_array(alphas, base):
    a = np.clip(alphas, -1.0, 1.0)
    return np.minimum(base - 1, np.floor((a + 1.0) / 2.0 * base)).astype(np.int64)


def encode_code(digits, base):
    """Pack digits into one positional number, most significant digit first."""
    if base < 1:
        raise ParameterError(f"base must be >= 1, got {base}")
    if base == 1:
        return 0
    code = 0
    for d in digits:
        if not 0 <= d < base:
            raise EncodingError(f"digit {d} out of range for base {base}")
        code = code * base + int(d)
    return code


_BACKENDS = ("walsh3", "fwht4")

_H16_SEQ = None


def _hadamard16_sequency():
    """16x16 Hadamard matrix with 2D-sequency row order, cached, transposed
    for right-multiplication of flattened 4x4 patches."""
    global _H16_SEQ
    if _H16_SEQ is None:
        plan = hadamard_plan(4, ordering="sequency")
        idx = (plan.perm[:, None] * 4 + plan.perm[None, :]).ravel()
        _H16_SEQ = hadamard_matrix(4).astype(np.float64)[idx].T
    return _H16_SEQ


def _patch_stack(pixels, side):
    """All side x side neighborhoods and the valid-center mask."""
    h, w = pixels.shape
    if h < side or w < side:
        raise DimensionError(f"image {pixels.shape} smaller than the {side}x{side} neighborhood")
    windows = sliding_window_view(pixels, (side, side)).astype(np.float64)
    valid = np.zeros((h, w), dtype=bool)
    if side == 3:
        # center of each 3x3 window
        valid[1 : h - 1, 1 : w - 1] = True
        anchor = (1, 1)
    else:
        # pixel anchored at offset (1, 1) inside the 4x4 window
        valid[1 : h - side + 2, 1 : w - side + 2] = True
        anchor = (1, 1)
    return windows, valid, anchor


def encode_image(img, backend="fwht4", base=10, ordering=None):
    """Encode every interior pixel of a gray image as a structure number.

    Border pixels whose neighborhood is incomplete are masked invalid and
    carry code 0.  For base 1 every digit is 0, so the code falls back to
    the rounded local average so the correlation objective stays usable.
    """
    if backend not in _BACKENDS:
        raise ParameterError(f"unknown backend {backend!r}")
    if base < 1:
        raise ParameterError(f"base must be >= 1, got {base}")
    pixels = np.asarray(img.pixels, dtype=np.float64)
    side = 3 if backend == "walsh3" else 4
    windows, valid, _ = _patch_stack(pixels, side)
    rows, cols = windows.shape[:2]
    ndigits = side * side - 1
    if ordering is None:
        ordering = digit_ordering("IA" if backend == "walsh3" else "rowmajor", ndigits)
    if len(ordering.permutation) != ndigits:
        raise ParameterError(
            f"ordering has {len(ordering.permutation)} positions, backend needs {ndigits}"
        )

    h, w = pixels.shape
    codes = np.zeros((h, w), dtype=np.int64)
    if base == 1:
        means = windows.mean(axis=(2, 3))
        vals = np.rint(means).astype(np.int64)
    else:
        if base**ndigits > np.iinfo(np.int64).max:
            raise ParameterError(f"base {base} overflows int64 for {ndigits} digits")
        if backend == "walsh3":
            basis = walsh3_basis()
            m = basis.w_inv.T
            # separable sandwich m . f . m^T, batched over all patches
            g = (m @ windows.reshape(rows * cols, 3, 3) @ m.T).reshape(-1, 9)
        else:
            # The separable 4x4 transform of every patch is one flat product
            # with the sequency-ordered 16-point Hadamard matrix (H4 (x) H4 =
            # H16 under row-major index pairing); entries are +/-1 so the
            # result is exact and matches the butterfly bit for bit.
            g = windows.reshape(rows * cols, 16) @ _hadamard16_sequency()
        dc = g[:, 0]
        # Pixels are 8-bit integers, so every coefficient is an exact dyadic
        # rational with |value| >= 1/16 whenever nonzero; the vanishing-dc
        # rule of normalize() therefore reduces to an exact zero test here.
        ok = dc != 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            alphas = g[:, 1:] / dc[:, None]
        alphas[~ok] = 0.0
        # in-place equivalent of _quantize_array, digits kept as exact floats
        np.clip(alphas, -1.0, 1.0, out=alphas)
        alphas += 1.0
        alphas *= base * 0.5
        np.floor(alphas, out=alphas)
        digits = np.minimum(alphas, float(base - 1))
        if ordering.permutation != tuple(range(ndigits)):
            digits = digits[:, list(ordering.permutation)]
        weights = base ** np.arange(ndigits - 1, -1, -1, dtype=np.int64)
        if base**ndigits <= 1 << 53:
            # the packed value fits a float64 mantissa, so BLAS packing is exact
            vals = np.rint(digits @ weights.astype(np.float64)).astype(np.int64)
        else:
            vals = digits.astype(np.int64) @ weights
        vals = vals.reshape(rows, cols)
    # place window-grid values at their anchored pixel positions
    codes[1 : 1 + vals.shape[0], 1 : 1 + vals.shape[1]] = vals
    codes[~valid] = 0
    return StructureCodeImage(codes=codes, valid_mask=valid, base=int(base))
