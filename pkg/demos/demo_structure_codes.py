"""Show how a pixel's neighborhood becomes a positional "structure number":
transform, DC-normalize, quantize to digits, and pack.

Run from the repository root:  python3 demos/demo_structure_codes.py
"""

import numpy as np

from walshreg import (
    GrayImage,
    encode_code,
    encode_image,
    normalize,
    quantize_digit,
    walsh3_forward,
)
from walshreg.bench import synthetic_image

print("== one pixel by hand ==")
patch = np.array([[30, 40, 30], [40, 90, 40], [30, 40, 30]], dtype=float)
print("3x3 neighborhood:\n", patch.astype(int))

block = walsh3_forward(patch)
print("\ncoefficients:\n", np.round(block.coeffs, 3))

norm = normalize(block)
print("\nnormalized by the DC term (illumination cancels here):")
print(np.round(norm.values, 3))

digits = [quantize_digit(a, 10) for a in norm.values]
print("\nquantized digits (base 10):", digits)
print("packed structure number:", encode_code(digits, 10))

print("\n== the same pixel at doubled illumination ==")
bright = walsh3_forward(2 * patch)
bright_digits = [quantize_digit(a, 10) for a in normalize(bright).values]
print("digits at 2x brightness:", bright_digits)
print("identical codes:", encode_code(bright_digits, 10) == encode_code(digits, 10))

print("\n== whole images ==")
img = synthetic_image(96, seed=1)
for backend in ("walsh3", "fwht4"):
    sci = encode_image(img, backend=backend, base=10)
    n = sci.valid_mask.sum()
    print(
        f"{backend}: {n} coded pixels, "
        f"{np.unique(sci.codes[sci.valid_mask]).size} distinct codes, "
        f"max code {sci.codes.max()}"
    )

print("\nscaling every intensity by 2 leaves the whole code image unchanged:")
half = GrayImage(pixels=(img.pixels // 2).astype(np.uint8))
double = GrayImage(pixels=(half.pixels * 2).astype(np.uint8))
a = encode_image(half, base=10)
b = encode_image(double, base=10)
print("bit-exact:", np.array_equal(a.codes, b.codes))
