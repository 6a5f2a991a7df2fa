"""The push-forward operator on combinations of gamma_a.

Run:  python3 demos/push_forward_operator.py
"""
import math

from expdyn import (GammaCombo, branch_sum, fixed_point_residual, mobius_identity_residual,
                    phi_truncation, push_forward, push_forward_iter)
from expdyn.verify import DEFAULT_SAMPLES

g = GammaCombo.gamma(2.0)
pf = push_forward(1, g)
print("push_forward(gamma_2) for lambda = 1:", pf)
exact = pf.evaluate(3)
print(f"closed form at z=3: {exact.real:.15f}")
prev = None
for K in (25, 50, 100, 200, 400):
    err = abs(branch_sum(1, g, 3, K) - exact)
    note = "" if prev is None else f"  shrink factor {prev / err:.2f}"
    print(f"  branch sum, K={K:<4d} error {err:.3e}{note}")
    prev = err
print("(the +k and -k branches cancel the leading tail term: the error falls like 1/K^3)")

two = push_forward_iter(1, g, 2)
print("\nsecond iterate:", two.combo)
print("iterated-formula weights:", [complex(w) for w in two.cascade[0]])

phi = phi_truncation(1, 12)
print(f"\nphi_12 keeps {len(phi)} terms; {phi.dropped} more lie below the smallest double")
r = fixed_point_residual(1, 12, DEFAULT_SAMPLES)
print("R(phi) - phi has poles only at", r.difference.poles)
print(f"|1 + B_12(e)| = {abs(r.one_plus_b):.12f};  normalized residual "
      f"min/max = {r.normalized.min():.12f}/{r.normalized.max():.12f}")

m = mobius_identity_residual(1, 3 + 1j, 12, DEFAULT_SAMPLES)
print(f"Moebius identity residual (y=3+i): {m.max_residual:.2e}")
