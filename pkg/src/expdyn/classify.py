"""Per-parameter classification of the orbit of the singular value.

The case is read off the trend of ``log|(f^n)'(1)|`` over the final window of
the horizon (derivatives at 1; ``(f^n)'(0) = lam (f^{n-1})'(1)``):

* ``DerivativeToZero``     -- the trend decreases (sampled at the cycle period
  when an attracting cycle is detected);
* ``SubseqToInfinity``     -- the orbit escapes, or the running maximum keeps
  climbing;
* ``BoundedAwayCandidate`` -- the window stays inside a narrow band;
* ``Indeterminate``        -- none of the above at this horizon.

The hypothesis flags for the instability criteria are evidence markers
measured at a finite horizon; nothing here decides stability.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _io
from .errors import InsufficientSamples
from .orbit import Converged, orbit, postsingular
from .series import poincare_report, summability_report

DERIVATIVE_TO_ZERO = "DerivativeToZero"
SUBSEQ_TO_INFINITY = "SubseqToInfinity"
BOUNDED_AWAY = "BoundedAwayCandidate"
INDETERMINATE = "Indeterminate"

CASE_CODES = {INDETERMINATE: 0, DERIVATIVE_TO_ZERO: 1, SUBSEQ_TO_INFINITY: 2, BOUNDED_AWAY: 3}
CASES_BY_CODE = {v: k for k, v in CASE_CODES.items()}

NORMALIZATION = "derivatives along the orbit of 1: (f^n)'(1)"
UNDECIDABLE = "not numerically decidable"


@dataclass(frozen=True)
class Thresholds:
    window_fraction: float = 0.25
    # one tolerated inversion per this many samples of a decreasing trend
    inversions_per: int = 50
    # rise of the running max of log|(f^n)'(1)| that counts as unbounded growth
    growth_log: float = 5.0
    # spread of log|(f^n)'(1)| over the window for a bounded-away candidate
    bounded_band_log: float = 2.0
    escape_log_threshold: float = 50.0
    cycle_tol: float = 1e-10
    max_period: int = 64
    delta: float = 0.05
    s_floor: float = 1e-8
    s_big: float = 1e6
    ratio_cap: float = 1e8
    min_dist_floor: float = 1e-6

    def as_dict(self):
        return asdict(self)


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class Flag:
    """Hypothesis-pattern evidence; ``value`` is None when the pattern does not apply."""
    value: object
    horizon: int
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"value": self.value, "horizon": self.horizon, "detail": self.detail,
                "label": "hypothesis-pattern evidence"}


def _window_len(n, fraction):
    return max(4, math.ceil(fraction * n))


def assign_case(logmods, escaped, period=1, th=DEFAULT_THRESHOLDS):
    """Case from one trend of log|(f^n)'(1)| (n = 0..len-1)."""
    if escaped:
        return SUBSEQ_TO_INFINITY
    L = np.asarray(logmods, dtype=float)
    n = len(L)
    if n < 5 or not np.all(np.isfinite(L)):
        return INDETERMINATE
    w = min(n - 1, _window_len(n, th.window_fraction))
    p = max(1, int(period))
    m = max(3, math.ceil(w / p))
    idx = n - 1 - p * np.arange(m)[::-1]
    idx = idx[idx >= 0]
    sampled = L[idx]
    if len(sampled) >= 2:
        inversions = int(np.count_nonzero(np.diff(sampled) >= 0))
        allowed = len(sampled) // th.inversions_per
        if inversions <= allowed and sampled[-1] < sampled[0]:
            return DERIVATIVE_TO_ZERO
    window = L[n - w:]
    before = L[:n - w]
    if window.max() >= before.max() + th.growth_log:
        return SUBSEQ_TO_INFINITY
    if window.max() - window.min() <= th.bounded_band_log:
        return BOUNDED_AWAY
    return INDETERMINATE


@dataclass(frozen=True)
class WEvidence:
    summable: str
    summable_horizon: int
    min_dist_to_zero: float
    zero_not_in_X: Flag
    bounded_X: str
    separation: str = UNDECIDABLE
    measure_zero: str = UNDECIDABLE

    def to_json(self):
        return {"summable": self.summable, "summable_horizon": self.summable_horizon,
                "min_dist_to_zero": self.min_dist_to_zero,
                "zero_not_in_X": self.zero_not_in_X.to_json(),
                "bounded_X": self.bounded_X, "separation": self.separation,
                "measure_zero": self.measure_zero}


def w_evidence(lam, horizon, th=DEFAULT_THRESHOLDS):
    """Numerical evidence for the summability and postsingular conditions.

    Summability at 0 and at 1 are equivalent for lam != 0, so the verdict is
    read from the series at 1.  Plane separation and Lebesgue measure of the
    postsingular set are reported as undecidable.
    """
    if horizon < 20:
        raise ValueError("horizon must be >= 20")
    lam = complex(lam)
    if lam == 0:
        verdict = "indeterminate"
    else:
        verdict = summability_report(lam, 1.0, horizon, th.escape_log_threshold,
                                     th.window_fraction, th.delta).verdict
    ps = postsingular(lam, horizon, th.escape_log_threshold)
    flag = Flag(bool(ps.min_dist_to_zero > th.min_dist_floor), horizon,
                {"min_dist": ps.min_dist_to_zero, "floor": th.min_dist_floor})
    return WEvidence(verdict, horizon, ps.min_dist_to_zero, flag, ps.bounded_verdict)


@dataclass(frozen=True)
class ClassReport:
    lam: complex
    horizon: int
    case: str
    derivative_trend: np.ndarray = field(repr=False)
    sn_trend: np.ndarray = field(repr=False)
    escaped: bool
    period: object
    cycle_multiplier: object
    ratio_last: object
    thm1_flags: dict
    w_evidence: WEvidence
    thresholds: Thresholds = DEFAULT_THRESHOLDS

    @property
    def code(self):
        return CASE_CODES[self.case]

    def to_json(self):
        cm = self.cycle_multiplier
        return {
            "lambda": _io.pair(self.lam),
            "horizon": self.horizon,
            "case": self.case,
            "case_code": self.code,
            "normalization": NORMALIZATION,
            "escaped": self.escaped,
            "period": self.period,
            "cycle_multiplier": None if cm is None else _io.pair(cm),
            "ratio_last": self.ratio_last,
            "derivative_trend": [float(x) for x in self.derivative_trend],
            "sn_trend": [_io.pair(s) for s in self.sn_trend],
            "thm1_flags": {k: v.to_json() for k, v in self.thm1_flags.items()},
            "w_evidence": self.w_evidence.to_json(),
            "thresholds": self.thresholds.as_dict(),
        }

    def dumps(self):
        return _io.dumps(self.to_json(), sort_keys=True)


def _thm1_flags(L, S, case, escaped, horizon, th):
    """Evidence for the three hypothesis patterns of the instability criteria."""
    absS = np.abs(S)
    flags = {}
    # (1) derivatives -> infinity along n_i with limsup |S_{n_i}| > 0
    running = np.maximum.accumulate(L)
    records = [n for n in range(1, len(L)) if L[n] >= running[n - 1] and L[n] > L[0]]
    if escaped and len(absS):
        tail = float(absS[-1])
        flags["h1"] = Flag(tail > th.s_floor, horizon,
                           {"subsequence": "all n past escape", "abs_S_tail": tail})
    elif case == SUBSEQ_TO_INFINITY and records:
        late = [n for n in records[len(records) // 2:] if n < len(absS)]
        best = float(absS[late].max()) if late else math.nan
        flags["h1"] = Flag(bool(best > th.s_floor), horizon,
                           {"subsequence": "running-max records", "limsup_abs_S": best})
    else:
        flags["h1"] = Flag(None, horizon, {"reason": "no growing-derivative subsequence"})
    # (2) derivatives bounded away from 0 and infinity along n_i with |S_{n_i}| -> infinity
    if case == BOUNDED_AWAY:
        w = _window_len(len(L), th.window_fraction)
        idx = [n for n in range(len(L) - w, len(L)) if n < len(absS)]
        best = float(absS[idx].max()) if idx else math.nan
        flags["h2"] = Flag(bool(best >= th.s_big), horizon,
                           {"subsequence": "final window", "max_abs_S": best})
    else:
        flags["h2"] = Flag(None, horizon, {"reason": "no bounded-derivative subsequence"})
    # (3) derivatives -> 0 with bounded ratio (limsup < inf or liminf > 0)
    if case == DERIVATIVE_TO_ZERO:
        w = _window_len(len(L), th.window_fraction)
        r = np.exp(np.diff(L[-w:]))
        rmax, rmin = float(r.max()), float(r.min())
        flags["h3_ratio_bounded"] = Flag(bool(rmax < th.ratio_cap or rmin > 1.0 / th.ratio_cap),
                                         horizon, {"ratio_max": rmax, "ratio_min": rmin})
    else:
        flags["h3_ratio_bounded"] = Flag(None, horizon, {"reason": "derivative not tending to 0"})
    return flags


def classify_lambda(lam, horizon=200, th=DEFAULT_THRESHOLDS):
    if horizon < 20:
        raise ValueError("horizon must be >= 20")
    lam = complex(lam)
    rec = orbit(lam, 1.0, horizon, th.escape_log_threshold, th.cycle_tol, th.max_period,
                stop_on_cycle=False)
    L = rec.derivative_logmods()
    period, mult = None, None
    if isinstance(rec.status, Converged):
        period = rec.status.period
        # the last p points are closer to the cycle than those at detection
        last = rec.native_points()[-period:]
        mult = lam ** period * complex(np.prod(last))
    if lam == 0:
        case = INDETERMINATE
        S = np.zeros(0, dtype=complex)
    else:
        case = assign_case(L, rec.escaped, period or 1, th)
        S = poincare_report(lam, len(L) + 1, th.escape_log_threshold,
                            th.window_fraction, th.delta).partial_sums
    ratio_last = None
    if len(L) > 1 and np.isfinite(L[-2]):
        step = L[-1] - L[-2]
        ratio_last = math.exp(step) if step < 709 else math.inf
    flags = _thm1_flags(L, S, case, rec.escaped, horizon, th)
    return ClassReport(lam, horizon, case, L, S, rec.escaped, period, mult, ratio_last,
                       flags, w_evidence(lam, horizon, th), th)


# -- the non-existence scan --------------------------------------------------

@dataclass(frozen=True)
class Prop1Evidence:
    lam: complex
    flagged: bool
    escaped: bool
    spread_log: float
    drift: float
    band_log: float
    note: str = ""


@dataclass(frozen=True)
class Prop1Result:
    evidence: list
    horizon: int
    delta: float

    @property
    def flags(self):
        return [(e.lam, e) for e in self.evidence if e.flagged]

    def near_misses(self, k=5):
        cand = [e for e in self.evidence if not e.escaped and math.isfinite(e.spread_log)]
        return sorted(cand, key=lambda e: e.spread_log)[:k]


def prop1_evidence(lam, horizon=200, delta=0.02, th=DEFAULT_THRESHOLDS):
    """Does |(f^n)'(1)| settle into [C/(1+delta), C(1+delta)] over the final window?"""
    lam = complex(lam)
    band = 2.0 * math.log1p(delta)
    if lam == 0:
        return Prop1Evidence(lam, False, False, math.inf, math.nan, band,
                             "lambda = 0: derivative identically zero")
    rec = orbit(lam, 1.0, horizon, th.escape_log_threshold, th.cycle_tol, th.max_period,
                stop_on_cycle=False)
    if rec.escaped:
        return Prop1Evidence(lam, False, True, math.inf, math.inf, band, "escaped")
    L = rec.derivative_logmods()
    w = _window_len(len(L), th.window_fraction)
    win = L[-w:]
    spread = float(win.max() - win.min())
    drift = float(np.polyfit(np.arange(w, dtype=float), win, 1)[0])
    return Prop1Evidence(lam, spread <= band, False, spread, drift, band)


def prop1_scan(lambda_grid, horizon=200, delta=0.02, th=DEFAULT_THRESHOLDS):
    grid = list(lambda_grid)
    if not grid:
        raise ValueError("empty parameter grid")
    return Prop1Result([prop1_evidence(l, horizon, delta, th) for l in grid], horizon, delta)


# -- expansion along the postsingular set -------------------------------------

@dataclass(frozen=True)
class ExpansionReport:
    lam: complex
    samples: np.ndarray = field(repr=False)
    logmods: np.ndarray = field(repr=False)

    @property
    def min_logmod(self):
        """min over samples of log|(f^n)'(x)|, n = 0..n_steps."""
        return self.logmods.min(axis=0)


def expansion_diagnostic(lam, n_steps, sample_count, th=DEFAULT_THRESHOLDS):
    """Growth of |(f^n)'(x)| for x among the first points of the orbit of 0.

    After an orbit escapes its derivative is recorded as +inf.
    """
    lam = complex(lam)
    ps = postsingular(lam, sample_count, th.escape_log_threshold)
    if len(ps.points) < sample_count:
        raise InsufficientSamples(
            f"only {len(ps.points)} representable orbit points, {sample_count} requested")
    xs = ps.points[:sample_count]
    out = np.full((sample_count, n_steps + 1), np.inf)
    for i, x in enumerate(xs):
        L = orbit(lam, x, max(n_steps, 1), th.escape_log_threshold,
                  stop_on_cycle=False).derivative_logmods()[:n_steps + 1]
        out[i, :len(L)] = L
    return ExpansionReport(lam, xs, out)
