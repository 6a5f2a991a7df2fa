"""Orbits of exp(lambda z) and the derivative cocycle along them.

Run:  python3 demos/orbits_and_cocycle.py
"""
import math

from expdyn import classify_lambda, orbit, solve_fixed_point

# lambda = 1: the orbit of 0 runs 0, 1, e, e^e, ... and leaves the double range
# after five steps.  The log-polar points keep going where floats cannot.
rec = orbit(1, 0, 10)
print("lambda = 1, orbit of 0:", rec.status)
for n, (p, d) in enumerate(zip(rec.points, rec.dlog)):
    print(f"  n={n}  log|z|={p.logmod:<22.6g} log|(f^n)'(0)|={d.logmod:.6g}")

# lambda = -1 settles on the fixed point of exp(-z) = z.
rec = orbit(-1, 0, 200)
print("\nlambda = -1:", rec.status.kind, "period", rec.status.period,
      "after", rec.status.step, "steps")
fp = solve_fixed_point(-1, rec.status.cycle[0])
print(f"  Newton-polished fixed point {fp.z.real:.15f}, |multiplier| {fp.abs_multiplier:.6f}")

# The consecutive derivative ratio tends to |lambda * z*|, here the fixed point itself.
L = orbit(-1, 1.0, 200, stop_on_cycle=False).derivative_logmods()
print(f"  |(f^200)'(1)| / |(f^199)'(1)| = {math.exp(L[-1] - L[-2]):.12f}")

for lam in (-1, 1, 0.2, 0.5j):
    r = classify_lambda(lam, 200)
    print(f"classify({lam}): {r.case:<18} period={r.period}  summable: {r.w_evidence.summable}")
