"""Run the conditional-gradient loop on the standard nonsmooth benchmarks and
print gap decay summaries.

The generalized gap -model_increment/alpha acts as the optimality
certificate: it stays nonnegative, vanishes exactly at first-order minimal
points, and its running minimum decays like 1/sqrt(t) with the open-loop
step 1/sqrt(1+t) (like 1/t with 2/(t+2) on the crescent problem).
"""
import numpy as np

from absfw import bench
from absfw.asfw import StepRule, asfw_run, running_min, loglog_slope


def show(name, inst, rule, iters):
    res = asfw_run(inst.tape, inst.C, inst.x0, rule, max_iters=iters)
    g = running_min(res.trace.gaps())
    t = res.trace.ts() + 1
    slope = loglog_slope(t, g) if np.count_nonzero(t >= 10) > 1 else float("-inf")
    fstar = inst.known_optimum[1] if inst.known_optimum else float("nan")
    print(f"{name:22s} status={res.status.value:16s} iters={len(t):4d} "
          f"f_final={res.f_final:+10.5f} (f*={fstar:+9.4f})  envelope slope {slope:+.2f}")
    return res


sqrt_rule = StepRule.open_loop_sqrt()

print("== max-of-squares with three feasible boxes (terminates at gap<=1e-10) ==")
for fs in ("C1", "C2", "C3"):
    show(f"maxq {fs} n=10", bench.maxq(10, fs), sqrt_rule, 500)

print("\n== chained LQ (convex; value approaches -(n-1)*sqrt(2)) ==")
for n in (5, 20):
    show(f"chained_lq n={n}", bench.chained_lq(n), sqrt_rule, 500)

print("\n== chained crescent 1 with the 2/(t+2) schedule (observed ~1/t) ==")
for n in (5, 20):
    show(f"crescent1 n={n}", bench.chained_crescent1(n), StepRule.open_loop_harmonic(), 500)

print("\n== step-rule variants on mifflin2 ==")
inst = bench.mifflin2()
show("mifflin2 sqrt", inst, sqrt_rule, 200)
show("mifflin2 monotone", inst, StepRule.open_loop_sqrt(monotone=True), 200)
show("mifflin2 short-step", inst, StepRule.short_step(gamma=4.0), 200)
show("mifflin2 horizon 200", inst, StepRule.fixed_horizon(200), 200)
