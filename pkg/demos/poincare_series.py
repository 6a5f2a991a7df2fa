"""Partial sums of the Poincare series and of B(a).

Run:  python3 demos/poincare_series.py
"""
from expdyn import b_series, poincare_report, summability_report

rep = poincare_report(1, 12)
print("lambda = 1 Poincare partial sums:")
for i, s in zip(rep.index, rep.partial_sums):
    print(f"  S_{i:<3d} = {s.real:.16f}")
print("verdict:", rep.verdict, " tail bound:", rep.tail_bound)

# The orbit of 1 escapes, so the summability series at 1 converges (it is S - 1 here).
print("\nsummability at a=1, lambda=1:", summability_report(1, 1, 30).verdict)

# lambda = -1: the terms grow like 1/Omega^n and the ratio test says so.
rep = summability_report(-1, 1, 200)
print("summability at a=1, lambda=-1:", rep.verdict, f"(last ratio {rep.ratios[-1]:.6f})")

b = b_series(1, 2.718281828459045, 12)
print(f"\nB_12(e) = {b.value.real:.16f},  |B_12(e) + 1| = {b.dichotomy_gap:.6f}")

# CSV form, with the reproducibility stamp on the first line
print("\n" + poincare_report(0.5 + 0.5j, 6).to_csv())
