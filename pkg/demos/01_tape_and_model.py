"""Record an abs-smooth function on a tape and look at its piecewise-linear model.

The running example is max(0, x, 2x+1), written with three nested switching
variables exactly as one would derive it from the identity
max(u, v) = (u + v + |u - v|) / 2.
"""
import numpy as np

from absfw import TapeBuilder, evaluate, abs_linearize
from absfw.plmodel import eval_pl, delta_eval, signature, restrict

# --- record the tape ------------------------------------------------------
tb = TapeBuilder(1)
(x,) = tb.inputs()
w1 = tb.abs(x + 1.0)               # z1 = x + 1
w2 = tb.abs(3.0 * x + 1.0 + w1)    # z2 = 3x + 1 + |z1|
w3 = tb.abs(w1 + w2)               # z3 = |z1| + |z2|
tape = tb.build(0.25 * (3.0 * x + 1.0 + w3))

print("switching variables:", tape.num_switch)
for xv in (-2.0, -0.5, 0.0, 1.0):
    rec = evaluate(tape, [xv])
    print(f"  f({xv:+.1f}) = {rec.y:+.3f}   z = {np.round(rec.z, 3)}   "
          f"reference max(0,x,2x+1) = {max(0.0, xv, 2 * xv + 1):+.3f}")

# --- abs-linearize at a point ---------------------------------------------
xbar = np.array([0.0])
form = abs_linearize(tape, xbar)
fbar = evaluate(tape, xbar).y
print("\nmodel data at xbar=0:")
print("  c =", form.c, "  Z =", form.Z.ravel())
print("  value row: a =", form.a, " b =", form.b, " |z| coeffs =", form.babs)

# the tape is piecewise linear, so the model reproduces it exactly
print("\nmodel vs function on a grid:")
for dx in (-1.5, -0.5, 0.4):
    model, z = eval_pl(form, [dx])
    print(f"  dx={dx:+.2f}: model={model:+.4f}  f(xbar+dx)={evaluate(tape, xbar + dx).y:+.4f}"
          f"  signature={signature(form, [dx])}")

# --- one affine piece ------------------------------------------------------
sig = np.array([1, 1, 1])
res = restrict(form, sig)
print(f"\nrestriction to signature {sig}: value = {res.g[0]:+.2f}*dx {res.h:+.2f}"
      "  (the x>0 piece 2x+1)")

# a smooth tape collapses to the gradient
tb2 = TapeBuilder(1)
(u,) = tb2.inputs()
sq = tb2.build(tb2.square(u))
sform = abs_linearize(sq, [3.0])
print("\nsmooth case f=x^2 at 3: model slope a =", sform.a, "(gradient 2x = 6)")
print("delta at dx=1:", delta_eval(sform, 9.0, [1.0]))
