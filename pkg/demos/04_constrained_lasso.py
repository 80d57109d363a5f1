"""Constrained l1-regularized least squares, box and ordered variants.

With a dominant penalty weight the origin is the unique optimum and the
method lands on it exactly, stopping with a literal zero gap after two
iterations: the first full step (alpha_0 = 1) solves the piecewise-linear
model globally and the second certifies first-order minimality.  With a
small weight the run behaves like the generic open-loop method instead.
"""
import numpy as np

from absfw import bench
from absfw.asfw import StepRule, asfw_run

n, p, seed = 60, 120, 7
A, y = bench.lasso_design(n, p, seed)

for variant in ("box", "ordered"):
    probe = bench.constrained_lasso(n, p, rho=1.0, seed=seed, variant=variant)
    g0 = A.T @ (A @ probe.x0 - y)
    rho_big = 1.25 * float(max(np.max(np.abs(g0)), np.max(np.abs(A.T @ y))))
    inst = bench.constrained_lasso(n, p, rho=rho_big, seed=seed, variant=variant)
    res = asfw_run(inst.tape, inst.C, inst.x0, StepRule.open_loop_sqrt(), max_iters=100)
    print(f"{variant:8s} rho={rho_big:8.1f}: {res.status.value} after "
          f"{len(res.trace.rows)} iterations, |x|_inf = {np.max(np.abs(res.x_final)):.1e}")

inst = bench.constrained_lasso(n, p, rho=1.0, seed=seed, variant="box")
res = asfw_run(inst.tape, inst.C, inst.x0, StepRule.open_loop_sqrt(), max_iters=100)
g = res.trace.gaps()
print(f"\nsmall rho=1: {res.status.value} after {len(g)} iterations; "
      f"gap decayed {g[0]:.1f} -> {np.min(g):.2e}")
print("first trace rows (t, alpha, gap, fval):")
for row in res.trace.rows[:5]:
    print(f"  {row.t}  {row.alpha:.3f}  {row.gap:10.3f}  {row.fval:10.3f}")
