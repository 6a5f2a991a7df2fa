"""Named verification suites comparing the closed-form operator with oracles.

Each suite returns a :class:`SuiteResult`; ``passed`` is true when every
check is within its tolerance.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .ruelle import (GammaCombo, branch_sum, fixed_point_residual, mobius_identity_residual,
                     nested_branch_sum, push_forward, push_forward_iter)

#: pole-free evaluation points used when the caller gives none
DEFAULT_SAMPLES = (2 + 2j, -1.5 + 0.5j, 0.3 - 1.2j, 3 + 0.1j, -2 - 2j,
                   0.5 + 3j, 4 - 1j, -0.7 - 0.4j, 1.5 - 2.5j, -3 + 1j)

SUITES = ("prop2", "iterate", "lemma5", "mobius")


@dataclass(frozen=True)
class Check:
    label: str
    residual: float
    tolerance: float

    @property
    def ok(self):
        return bool(self.residual <= self.tolerance)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    checks: list
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.ok for c in self.checks)

    @property
    def worst(self):
        return max(self.checks, key=lambda c: c.residual / c.tolerance
                   if c.tolerance > 0 else math.inf)

    def lines(self):
        out = [f"suite {self.name}: {'ok' if self.passed else 'FAILED'}"]
        for c in self.checks:
            out.append(f"  {c.label}: residual={c.residual:.3e} tol={c.tolerance:.3e}"
                       f" {'ok' if c.ok else 'FAIL'}")
        for k, v in self.info.items():
            out.append(f"  {k}: {v}")
        if not self.passed:
            w = self.worst
            out.append(f"  worst: {w.label} residual={w.residual:.3e} tol={w.tolerance:.3e}")
        return out


def prop2(lam=1.0, a=2.0, z=3.0, K=10_000, scale=1e-6):
    """Closed-form push-forward of gamma_a against the truncated branch sum.

    The tolerance scales as ``scale * (1e4 / K)^2`` so that small K is judged
    against the truncation bound; the K vs 2K error ratio is reported.
    """
    g = GammaCombo.gamma(a)
    exact = push_forward(lam, g).evaluate(z)
    err = abs(branch_sum(lam, g, z, K) - exact)
    err2 = abs(branch_sum(lam, g, z, 2 * K) - exact)
    tol = scale * (1e4 / K) ** 2
    info = {"closed_form": exact, "error_K": err, "error_2K": err2,
            "ratio_K_to_2K": err / err2 if err2 > 0 else float("inf")}
    return SuiteResult("prop2", [Check(f"lambda={lam} a={a} z={z} K={K}", err, tol)], info)


def iterate(lam=1.0, a=2.0, z=3.0, K=400, n=2, tol=1e-5):
    """n-fold closed form against nested branch sums."""
    g = GammaCombo.gamma(a)
    exact = push_forward_iter(lam, g, n).combo.evaluate(z)
    nested = nested_branch_sum(lam, g, z, K, depth=n)
    return SuiteResult("iterate", [Check(f"n={n} K={K} z={z}", abs(nested - exact), tol)],
                       {"closed_form": exact, "nested": nested})


def lemma5(lam=1.0, N=12, samples=DEFAULT_SAMPLES, rtol=1e-9):
    """R(phi_N) - phi_N against -(1 + B_N(f(1))) gamma_{f(1)} + tail, relative."""
    r = fixed_point_residual(lam, N, samples)
    rel = float(np.max(np.abs(r.residual - r.predicted)) / np.max(np.abs(r.predicted)))
    return SuiteResult("lemma5", [Check(f"N={N} samples={len(r.samples)}", rel, rtol)],
                       {"abs_one_plus_B": abs(r.one_plus_b), "max_residual": r.max_residual,
                        "difference_poles": r.difference.poles, "dropped_terms": r.difference.dropped})


def mobius(lam=1.0, y=3 + 1j, N=12, samples=DEFAULT_SAMPLES, tol=1e-8):
    r = mobius_identity_residual(lam, y, N, samples)
    return SuiteResult("mobius", [Check(f"y={y} N={N}", r.max_residual, tol)])
