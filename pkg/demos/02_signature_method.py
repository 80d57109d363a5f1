"""Minimize a piecewise-linear model over a box with the active signature
method, and reproduce the iteration-count table on the nonsmooth
Rosenbrock-Nesterov chain.

The chain has one global minimizer at all-ones plus 2^(n-1) - 1 spurious
stationary points; the adapted method walks exactly 2^(n-1) signature
domains from the standard start, visiting a vanishing fraction of all
3^s domains.
"""
import time

import numpy as np

from absfw import bench, aasm_minimize, brute_force_pl_min, abs_linearize
from absfw.plmodel import affine_substitute

print("n  visited  target 2^(n-1)  #domains(+-1 only)  psi*      at ones?  seconds")
for n in range(1, 11):
    inst = bench.rosenbrock_nesterov2(n)
    form = affine_substitute(abs_linearize(inst.tape, inst.x0), 1.0, -inst.x0)
    t0 = time.perf_counter()
    res = aasm_minimize(form, inst.C, inst.x0)
    dt = time.perf_counter() - t0
    at_ones = np.max(np.abs(res.v_star - 1.0)) <= 1e-8
    print(f"{n:<2d} {res.polyhedra_visited:<8d} {2**(n-1):<15d} {2**form.s:<19d} "
          f"{res.psi_star:<9.2e} {str(bool(at_ones)):<9s} {dt:.2f}")

# cross-check a small instance against exhaustive enumeration
n = 4
inst = bench.rosenbrock_nesterov2(n)
form = affine_substitute(abs_linearize(inst.tape, inst.x0), 1.0, -inst.x0)
v_bf, psi_bf = brute_force_pl_min(form, inst.C)
res = aasm_minimize(form, inst.C, inst.x0)
print(f"\nbrute force over all 2^{form.s} sign patterns (n={n}): "
      f"psi={psi_bf:.2e} at {np.round(v_bf, 6)}")
print(f"signature method:                                 "
      f"psi={res.psi_star:.2e} at {np.round(res.v_star, 6)}")
