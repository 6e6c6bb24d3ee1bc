"""Walk through the patch transforms: the 3x3 Walsh sandwich, the fast
power-of-two butterfly, sequency ordering, and operation counts.

Run from the repository root:  python3 demos/demo_transforms.py
"""

import numpy as np

from walshreg import (
    OpCounter,
    fwht_1d,
    fwht_2d,
    hadamard_matrix,
    hadamard_plan,
    inverse_fwht_2d,
    walsh3_basis,
    walsh3_forward,
)

rng = np.random.default_rng(0)

print("== 3x3 Walsh transform ==")
basis = walsh3_basis()
print("basis rows (sampled Walsh functions):")
print(basis.w.astype(int))

patch = rng.integers(0, 256, size=(3, 3)).astype(float)
block = walsh3_forward(patch)
print("\nrandom patch:\n", patch.astype(int))
print("coefficients g = (W^-1)^T f W^-1:\n", np.round(block.coeffs, 3))
print("DC term equals the weighted local average:", round(block.dc, 3))

flat = np.full((3, 3), 42.0)
print("\nconstant patch -> only the DC coefficient survives:")
print(np.round(walsh3_forward(flat).coeffs, 12))

print("\n== fast Walsh-Hadamard transform ==")
plan = hadamard_plan(8, ordering="sequency")
v = rng.integers(-10, 10, size=8).astype(float)
counter = OpCounter()
fast = fwht_1d(v, plan, counter)
dense = plan.matrix().astype(float) @ v
print("input:", v.astype(int))
print("butterfly result:", fast.astype(int))
print("dense matrix product:", dense.astype(int))
print(f"butterfly used {counter.ops} add/subtracts = n log2 n = {8 * 3}")

print("\nsequency ordering sorts rows by sign changes:")
h = plan.matrix()
for i, row in enumerate(h[:4]):
    changes = int(np.sum(row[1:] != row[:-1]))
    print(f"  row {i}: {row}  ({changes} sign changes)")

print("\n== 2D round trip ==")
plan4 = hadamard_plan(4)
f = rng.integers(0, 256, size=(4, 4)).astype(float)
g = fwht_2d(f, plan4)
back = inverse_fwht_2d(g, plan4)
print("max |inverse(forward(f)) - f| =", np.max(np.abs(back - f)))
