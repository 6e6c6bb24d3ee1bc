"""Run a trimmed version of the perturbation benchmark protocol and the
encoding-path timing comparison, printing a small results table.

Run from the repository root:  python3 demos/demo_benchmark.py
(The full 21-triple protocol is available via `walshreg benchmark`.)
"""

from walshreg.bench import (
    DEFAULT_PERTURBATIONS,
    run_benchmark,
    synthetic_image,
    time_encoding_paths,
)
from walshreg.registration import SearchSpec

image = synthetic_image(160, seed=0)

print("== registration benchmark (first 5 of the 21 default triples) ==")
spec = SearchSpec(t_range=(-20, 20), s_range=(-20, 20), theta_range=(-20.0, 20.0))
rows, summary = run_benchmark(image, DEFAULT_PERTURBATIONS[:5], spec=spec)

print(f"{'s_no':>4} {'x':>4} {'y':>4} {'angle':>6} {'backend':>8} "
      f"{'t':>6} {'s':>6} {'theta':>6} {'cc':>7} {'sec':>6}")
for r in rows:
    print(f"{r.index:>4} {r.x_mm:>4.0f} {r.y_mm:>4.0f} {r.angle_deg:>6.0f} {r.backend:>8} "
          f"{r.t:>6.0f} {r.s:>6.0f} {r.theta:>6.0f} {r.cc_after:>7.4f} {r.elapsed_seconds:>6.2f}")

print("\nsummary:")
for key in sorted(summary):
    print(f"  {key} = {summary[key]:.4f}")

print("\n== fast 4x4 encoding vs the naive per-patch oracle ==")
timing = time_encoding_paths(synthetic_image(128, seed=1))
print(f"fast path : {timing['fast_seconds'] * 1000:.1f} ms")
print(f"naive path: {timing['naive_seconds'] * 1000:.1f} ms")
print(f"speedup   : {timing['speedup']:.0f}x, identical codes: {timing['codes_match']}")
