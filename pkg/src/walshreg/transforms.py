"""Patch-level Walsh and fast Walsh-Hadamard transforms.

Two backends are provided:

* a 3x3 Walsh transform computed as a direct matrix sandwich
  ``g = (W^-1)^T f W^-1`` with W rows sampled from the first three Walsh
  functions, and
* a power-of-two Walsh-Hadamard transform computed with the O(n log n)
  butterfly, optionally permuted to sequency order.

Forward transforms are unnormalized (pure +/-1 sums), so integer inputs
produce exact integer coefficients; all scaling lives in the inverse.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError

__all__ = [
    "WalshBasis3",
    "CoefficientBlock",
    "HadamardPlan",
    "OpCounter",
    "walsh3_basis",
    "walsh3_forward",
    "hadamard_matrix",
    "hadamard_plan",
    "sequency_permutation",
    "fwht_1d",
    "fwht_2d",
    "inverse_fwht_2d",
    "direct_oracle",
]


@dataclass(frozen=True)
class WalshBasis3:
    """Sampled 3x3 Walsh basis matrix and its true inverse."""

    w: np.ndarray
    w_inv: np.ndarray


@dataclass(frozen=True)
class CoefficientBlock:
    """Square block of transform coefficients; the DC term sits at [0, 0]."""

    coeffs: np.ndarray

    @property
    def side(self):
        return self.coeffs.shape[0]

    @property
    def dc(self):
        return self.coeffs[0, 0]


class OpCounter:
    """Counts butterfly add/subtract operations, for instrumented tests."""

    def __init__(self):
        self.ops = 0

    def add(self, n):
        self.ops += int(n)


def walsh3_basis():
    """Build the 3x3 Walsh basis.

    Rows are the Walsh functions W0, W1, W2 sampled at t = 0, 1/3, 2/3:
    (1,1,1), (1,1,-1), (1,-1,-1).
    """
    w = np.array([[1, 1, 1], [1, 1, -1], [1, -1, -1]], dtype=np.float64)
    w_inv = np.linalg.inv(w)
    return WalshBasis3(w=w, w_inv=w_inv)


def walsh3_forward(patch, basis=None):
    """3x3 Walsh transform of a patch: g = (W^-1)^T . f . W^-1."""
    f = np.asarray(patch, dtype=np.float64)
    if f.shape != (3, 3):
        raise DimensionError(f"walsh3 expects a 3x3 patch, got {f.shape}")
    if basis is None:
        basis = walsh3_basis()
    g = basis.w_inv.T @ f @ basis.w_inv
    return CoefficientBlock(coeffs=g)


def hadamard_matrix(k):
    """Sylvester Hadamard matrix of order 2^k, natural order, +/-1 entries."""
    if k < 1:
        raise ParameterError(f"hadamard_matrix needs k >= 1, got {k}")
    h2 = np.array([[1, 1], [1, -1]], dtype=np.int64)
    h = h2
    for _ in range(k - 1):
        h = np.kron(h2, h)
    return h


def _bit_reverse(i, bits):
    out = 0
    for _ in range(bits):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


def sequency_permutation(size):
    """Row permutation mapping natural Hadamard order to sequency order.

    ``perm[i]`` is the natural-order row index whose row has exactly i sign
    changes: bit-reverse of the Gray code of i.
    """
    bits = int(size).bit_length() - 1
    if size != 1 << bits:
        raise ParameterError(f"size must be a power of two, got {size}")
    perm = np.empty(size, dtype=np.intp)
    for i in range(size):
        perm[i] = _bit_reverse(i ^ (i >> 1), bits)
    return perm


@dataclass(frozen=True)
class HadamardPlan:
    """Precomputed plan for the fast transform of one power-of-two size."""

    size: int
    stages: int
    ordering: str
    perm: np.ndarray = field(repr=False)

    def matrix(self):
        """Dense (ordering-permuted) Hadamard matrix, for oracles."""
        return hadamard_matrix(self.stages)[self.perm]


def hadamard_plan(size, ordering="sequency"):
    if size < 2 or size & (size - 1):
        raise ParameterError(f"plan size must be a power of two >= 2, got {size}")
    if ordering not in ("natural", "sequency"):
        raise ParameterError(f"unknown ordering {ordering!r}")
    if ordering == "sequency":
        perm = sequency_permutation(size)
    else:
        perm = np.arange(size, dtype=np.intp)
    return HadamardPlan(size=size, stages=size.bit_length() - 1, ordering=ordering, perm=perm)


def _butterfly_last_axis(a, counter=None):
    """In k identical stages, replace the last axis by its Hadamard transform.

    Each stage is n/2 pairwise sums plus n/2 pairwise differences, so the
    whole transform costs exactly n*log2(n) additions per vector.
    """
    a = np.ascontiguousarray(a)
    n = a.shape[-1]
    half = 1
    while half < n:
        v = a.reshape(a.shape[:-1] + (n // (2 * half), 2, half))
        top = v[..., 0, :] + v[..., 1, :]
        bot = v[..., 0, :] - v[..., 1, :]
        v[..., 0, :] = top
        v[..., 1, :] = bot
        if counter is not None:
            counter.add(n * int(np.prod(a.shape[:-1], dtype=np.int64)))
        half *= 2
    return a


def fwht_1d(v, plan, counter=None):
    """Fast Walsh-Hadamard transform of one vector, ordering per the plan."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (plan.size,):
        raise DimensionError(f"expected a length-{plan.size} vector, got shape {v.shape}")
    return _butterfly_last_axis(v.copy(), counter)[plan.perm]


def fwht_batch(a, plan, axis=-1):
    """Fast transform applied along one axis of a stacked array."""
    a = np.moveaxis(np.asarray(a, dtype=np.float64), axis, -1)
    if a.shape[-1] != plan.size:
        raise DimensionError(f"axis length {a.shape[-1]} does not match plan size {plan.size}")
    out = _butterfly_last_axis(a.copy())[..., plan.perm]
    return np.moveaxis(out, -1, axis)


def fwht_2d(patch, plan):
    """Separable 2D fast transform: every row, then every column."""
    f = np.asarray(patch, dtype=np.float64)
    if f.shape != (plan.size, plan.size):
        raise DimensionError(f"expected a {plan.size}x{plan.size} patch, got {f.shape}")
    g = fwht_batch(f, plan, axis=1)
    g = fwht_batch(g, plan, axis=0)
    return CoefficientBlock(coeffs=g)


def inverse_fwht_2d(block, plan):
    """Inverse of :func:`fwht_2d`: same butterfly, divided by size^2."""
    g = np.asarray(block.coeffs, dtype=np.float64)
    if g.shape != (plan.size, plan.size):
        raise DimensionError(f"expected a {plan.size}x{plan.size} block, got {g.shape}")
    inv = np.argsort(plan.perm)
    g = g[inv][:, inv]
    f = _butterfly_last_axis(g.copy())
    f = _butterfly_last_axis(np.swapaxes(f, 0, 1)).swapaxes(0, 1)
    return f / float(plan.size) ** 2


def direct_oracle(patch, m):
    """Naive triple matrix product m . f . m^T with explicit loops.

    Test oracle and benchmark baseline only; deliberately unvectorized.
    """
    f = np.asarray(patch, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] != f.shape[1] or m.shape != f.shape:
        raise DimensionError(f"oracle needs square matching shapes, got {f.shape} and {m.shape}")
    n = f.shape[0]
    tmp = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += m[i, k] * f[k, j]
            tmp[i, j] = acc
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += tmp[i, k] * m[j, k]
            out[i, j] = acc
    return CoefficientBlock(coeffs=out)
