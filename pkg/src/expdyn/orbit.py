"""Orbits of f(z) = exp(lam * z) with their derivative cocycle.

Points and derivatives are kept in log-polar form.  ``points[n]`` is the n-th
iterate of the seed and ``dlog[n]`` is ``(f^n)'(seed) = lam^n * prod_{k=1..n}
points[k]``; both can grow far past the double range before the orbit is
declared escaped.
"""

import cmath
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _io
from .errors import NoConvergence, TruncatedAtEscape
from .logcplx import LogComplex, exp_of, from_cartesian

DEFAULT_ESCAPE_LOG = 50.0
DEFAULT_CYCLE_TOL = 1e-10
DEFAULT_MAX_PERIOD = 64
CONFIRMATIONS = 3


@dataclass(frozen=True)
class Escaped:
    step: int
    kind = "escaped"


@dataclass(frozen=True)
class Converged:
    period: int
    cycle: tuple
    step: int
    kind = "converged"


@dataclass(frozen=True)
class Horizon:
    kind = "horizon"


def _status_json(status):
    out = {"kind": status.kind}
    if isinstance(status, Escaped):
        out["step"] = status.step
    elif isinstance(status, Converged):
        out.update(period=status.period, step=status.step,
                   cycle=[_io.pair(c) for c in status.cycle])
    return out


@dataclass(frozen=True)
class OrbitRecord:
    lam: complex
    seed: complex
    points: tuple
    dlog: tuple
    status: object
    escape_log_threshold: float = DEFAULT_ESCAPE_LOG

    def __len__(self):
        return len(self.points)

    @property
    def escaped(self):
        return isinstance(self.status, Escaped)

    def native_points(self):
        """Points as complex, NaN where a point is beyond the native range."""
        return np.array([p.to_complex() if p.is_native else complex(np.nan, np.nan)
                         for p in self.points])

    def derivative_logmods(self):
        return np.array([d.logmod for d in self.dlog])

    def stamp(self):
        return {"lambda": _fmt_c(self.lam), "seed": _fmt_c(self.seed),
                "escape_log_threshold": self.escape_log_threshold,
                "status": self.status.kind}

    def write_csv(self, fh):
        rows = [(n, p.logmod, p.arg, d.logmod, d.arg)
                for n, (p, d) in enumerate(zip(self.points, self.dlog))]
        _io.write_csv(fh, ["n", "logmod_z", "arg_z", "logmod_dlog", "arg_dlog"],
                      rows, self.stamp())

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def to_json(self):
        return {
            "lambda": _io.pair(self.lam),
            "seed": _io.pair(self.seed),
            "escape_log_threshold": self.escape_log_threshold,
            "status": _status_json(self.status),
            "points": [p.to_json() for p in self.points],
            "dlog": [d.to_json() for d in self.dlog],
        }


def _fmt_c(z):
    z = complex(z)
    return f"{z.real!r}{z.imag:+.17g}i"


def step(lam, z, escape_log_threshold=DEFAULT_ESCAPE_LOG):
    """One application of f.  Returns ``None`` to signal escape."""
    if not z.is_native:
        return None
    w = complex(lam) * z.to_complex()
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        return None
    if w != 0 and math.log(abs(w)) > escape_log_threshold:
        return None
    return exp_of(w)


def cocycle(lam, points):
    """Log-polar ``(f^n)'(points[0])`` for n = 0..len(points)-1."""
    lam_l = from_cartesian(lam)
    out = [LogComplex.one()]
    for p in points[1:]:
        out.append(out[-1] * lam_l * p)
    return tuple(out)


def orbit(lam, seed, N, escape_log_threshold=DEFAULT_ESCAPE_LOG,
          cycle_tol=DEFAULT_CYCLE_TOL, max_period=DEFAULT_MAX_PERIOD,
          stop_on_cycle=True):
    """Iterate ``N`` steps from ``seed``.

    Convergence to a cycle of period p is declared after ``|z_n - z_{n-p}| <
    cycle_tol`` holds for three consecutive n.  With ``stop_on_cycle=False``
    the iteration continues to the horizon (the status still records the
    detected cycle).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lam = complex(lam)
    z0 = seed if isinstance(seed, LogComplex) else from_cartesian(seed)
    points = [z0]
    hist = np.full(N + 1, complex(np.nan, np.nan))
    if z0.is_native:
        hist[0] = z0.to_complex()
    counts = np.zeros(max_period, dtype=int)
    status = Horizon()
    for n in range(1, N + 1):
        z = step(lam, points[-1], escape_log_threshold)
        if z is None:
            status = Escaped(n)
            break
        points.append(z)
        if not z.is_native:
            counts[:] = 0
            continue
        zc = z.to_complex()
        hist[n] = zc
        if isinstance(status, Converged):
            continue
        P = min(max_period, n)
        past = hist[n - 1::-1][:P] if n - 1 >= 0 else hist[:0]
        hit = np.abs(past - zc) < cycle_tol
        counts[:P] = np.where(hit, counts[:P] + 1, 0)
        done = np.flatnonzero(counts[:P] >= CONFIRMATIONS)
        if done.size:
            p = int(done[0]) + 1
            status = Converged(p, tuple(complex(c) for c in hist[n - p + 1:n + 1]), n)
            if stop_on_cycle:
                break
    seed_c = z0.to_complex() if z0.is_native else complex(np.nan)
    return OrbitRecord(lam, seed_c, tuple(points), cocycle(lam, points), status,
                       escape_log_threshold)


def derivative_cocycle(record, n=None):
    """``(f^k)'(seed)`` for k = 0..n, recomputed from the stored points.

    Raises :class:`TruncatedAtEscape` if n lies past the last point the
    orbit reached.
    """
    last = len(record.points) - 1
    if n is None:
        n = last
    if n > last:
        raise TruncatedAtEscape(f"orbit stops at n={last}, requested n={n}")
    return cocycle(record.lam, record.points[:n + 1])


@dataclass(frozen=True)
class PostsingularApprox:
    lam: complex
    points: np.ndarray = field(repr=False)
    min_dist_to_zero: float
    max_logmod: float
    bounded_verdict: str
    escaped_at: object = None


def postsingular(lam, M, escape_log_threshold=DEFAULT_ESCAPE_LOG):
    """First ``M`` points of the orbit of the omitted value 0 (from f(0) = 1)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    rec = orbit(lam, 0j, M, escape_log_threshold, stop_on_cycle=False)
    pts = rec.points[1:]
    native = np.array([p.to_complex() for p in pts if p.is_native])
    logmods = np.array([p.logmod for p in pts])
    if rec.escaped:
        verdict = "escaped"
    elif len(logmods) < 4:
        verdict = "indeterminate"
    else:
        h = len(logmods) // 2
        # the running maximum has stopped growing over the second half
        verdict = ("bounded-so-far" if logmods[h:].max() <= logmods[:h].max() + math.log(2)
                   else "indeterminate")
    return PostsingularApprox(
        complex(lam), native,
        float(np.abs(native).min()) if native.size else math.inf,
        float(logmods.max()), verdict,
        rec.status.step if rec.escaped else None)


@dataclass(frozen=True)
class FixedPoint:
    z: complex
    multiplier: complex
    residual: float
    iterations: int

    @property
    def abs_multiplier(self):
        return abs(self.multiplier)

    @property
    def attracting(self):
        return abs(self.multiplier) < 1


def solve_fixed_point(lam, guess, tol=1e-13, max_iter=100):
    """Damped Newton for ``exp(lam z) = z``; multiplier is ``lam * f(z)``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = complex(lam)
    z = complex(guess)

    def g(u):
        return cmath.exp(lam * u) - u

    gz = g(z)
    for it in range(max_iter):
        if abs(gz) < tol:
            return FixedPoint(z, lam * cmath.exp(lam * z), abs(gz), it)
        dg = lam * cmath.exp(lam * z) - 1.0
        if dg == 0:
            break
        dz = gz / dg
        t = 1.0
        while True:
            cand = z - t * dz
            try:
                gc = g(cand)
            except OverflowError:
                gc = complex(math.inf)
            if abs(gc) < abs(gz) or t < 1e-3:
                break
            t *= 0.5
        z, gz = cand, gc
    if abs(gz) < tol:
        return FixedPoint(z, lam * cmath.exp(lam * z), abs(gz), max_iter)
    raise NoConvergence(f"Newton did not reach |f(z)-z| < {tol} in {max_iter} steps "
                        f"(last z={z}, residual={abs(gz):.3g})")
