"""Colour the lambda-plane by classification and write a P6 image.

Run:  python3 demos/parameter_scan.py [output.ppm]
"""
import sys
import time

from expdyn.scan import DYNAMICAL, ScanJob, run_scan, worker_count, write_outputs

out = sys.argv[1] if len(sys.argv) > 1 else "lambda_plane.ppm"

job = ScanJob(region=(-3.5, 1.5, -2.5, 2.5), width=300, height=300, horizon=200)
t0 = time.perf_counter()
res = run_scan(job, workers=worker_count())
print(f"{job.width}x{job.height} parameter scan in {time.perf_counter() - t0:.1f}s")
for case, count in res.case_counts().items():
    print(f"  {case:<22} {count}")
write_outputs(res, out, out.replace(".ppm", "") + ".csv")
print("wrote", out)

# Along the positive real axis the attracting fixed point disappears near 1/e.
strip = run_scan(ScanJob((0.0, 1.0, -0.001, 0.001), 1000, 1))
codes, re = strip.codes[0], strip.coords[0].real
first = next(k for k in range(len(codes)) if codes[k] != codes[0])
print(f"first change of class on the positive real axis at lambda ~ {re[first]:.4f}")

dyn = run_scan(ScanJob((-2, 4, -3, 3), 200, 200, DYNAMICAL, 100, 1.0), worker_count())
write_outputs(dyn, "escape_lambda1.ppm")
print("wrote escape_lambda1.ppm (dynamical plane, lambda = 1)")
