"""Poincaré series, summability series and the auxiliary series B(a).

All three are sums of reciprocals of the derivative cocycle along an orbit:

* Poincaré:    S_n = 1 + (1/lam) * sum_{i=2..n} 1 / (f^{i-2})'(1)
* summability: sum_{i>=0} 1 / (f^i)'(a)
* B(a):        (1/f'(1)) * sum_{j>=1} f^{j-1}(a) / (f^{j-1})'(a)

Terms are formed in log-polar form and converted to complex only for
accumulation.  Once the orbit escapes, the remaining terms are smaller than
the last computed one by at least ``exp(-escape_log_threshold)`` per step;
they are entered as zeros and flagged.
"""

import cmath
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _io
from .errors import LambdaZero
from .logcplx import NATIVE_LOG_LIMIT, LogComplex, from_cartesian
from .orbit import DEFAULT_ESCAPE_LOG, orbit

TAIL_FRACTION = 0.25
DELTA = 0.05
MIN_TERMS = 4

CONVERGENT = "absolutely-convergent"
DIVERGING = "diverging"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class SeriesReport:
    kind: str
    lam: complex
    a: object
    index: np.ndarray = field(repr=False)
    terms: np.ndarray = field(repr=False)
    term_logmods: np.ndarray = field(repr=False)
    partial_sums: np.ndarray = field(repr=False)
    ratios: np.ndarray = field(repr=False)
    flagged: np.ndarray = field(repr=False)
    verdict: str
    tail_bound: object
    truncation_n: int
    escaped: bool
    dichotomy_gap: object = None
    params: dict = field(default_factory=dict)

    @property
    def value(self):
        return complex(self.partial_sums[-1]) if len(self.partial_sums) else 0j

    def stamp(self):
        s = {"kind": self.kind, "lambda": f"{self.lam.real!r}{self.lam.imag:+.17g}i"}
        if self.a is not None:
            a = complex(self.a)
            s["a"] = f"{a.real!r}{a.imag:+.17g}i"
        s.update(self.params)
        s["verdict"] = self.verdict
        return s

    def write_csv(self, fh):
        ratios = np.concatenate([[np.nan], self.ratios])
        rows = []
        for k in range(len(self.terms)):
            t = self.terms[k]
            S = self.partial_sums[k]
            rows.append((int(self.index[k]), t.real, t.imag, abs(t),
                         float(ratios[k]) if k < len(ratios) else math.nan,
                         S.real, S.imag))
        _io.write_csv(fh, ["i", "re_term", "im_term", "abs_term", "ratio", "re_S", "im_S"],
                      rows, self.stamp())

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def to_json(self):
        return {
            "kind": self.kind,
            "lambda": _io.pair(self.lam),
            "a": None if self.a is None else _io.pair(self.a),
            "verdict": self.verdict,
            "tail_bound": self.tail_bound,
            "truncation_n": self.truncation_n,
            "escaped": self.escaped,
            "flagged_terms": int(self.flagged.sum()),
            "value": _io.pair(self.value),
            "dichotomy_gap": self.dichotomy_gap,
            "params": self.params,
            "index": [int(i) for i in self.index],
            "terms": [_io.pair(t) for t in self.terms],
            "term_logmods": [float(x) for x in self.term_logmods],
            "partial_sums": [_io.pair(s) for s in self.partial_sums],
            "ratios": [float(r) for r in self.ratios],
        }


def _verdict(term_logmods, n_computed, escaped, tail_fraction, delta, escape_log):
    """Return (verdict, tail_bound, ratios) from the computed terms."""
    lm = np.asarray(term_logmods[:n_computed], dtype=float)
    ratios = np.exp(np.diff(lm)) if len(lm) > 1 else np.zeros(0)
    if n_computed < MIN_TERMS:
        return INDETERMINATE, None, ratios
    last = math.exp(lm[-1]) if lm[-1] < NATIVE_LOG_LIMIT else math.inf
    if escaped:
        # next term is below last * exp(-threshold); later ones assumed to halve at least
        return CONVERGENT, 2.0 * last * math.exp(-escape_log), ratios
    w = max(2, math.ceil(tail_fraction * len(ratios)))
    window = ratios[-w:]
    if np.all(window < 1.0 - delta):
        r = float(window.max())
        return CONVERGENT, last * r / (1.0 - r), ratios
    if np.all(window > 1.0 + delta):
        return DIVERGING, None, ratios
    return INDETERMINATE, None, ratios


def _assemble(kind, lam, a, index, logterms, n_total, escaped, base,
              tail_fraction, delta, escape_log, dichotomy=False):
    """Convert log-polar terms, pad flagged zeros and build the report."""
    terms, lms = [], []
    overflow = False
    for t in logterms:
        if t is None or not t.is_native:
            overflow = True
            break
        terms.append(t.to_complex())
        lms.append(t.logmod)
    n_computed = len(terms)
    flagged = [False] * n_computed
    if escaped and not overflow:
        pad = n_total - n_computed
        terms += [0j] * pad
        lms += [-math.inf] * pad
        flagged += [True] * pad
    terms = np.array(terms, dtype=complex)
    # partial sums of a diverging series may overflow to inf; that is the answer
    with np.errstate(over="ignore", invalid="ignore"):
        partial = base + np.cumsum(terms) if len(terms) else np.zeros(0, dtype=complex)
    verdict, tail, ratios = _verdict(lms, n_computed, escaped and not overflow,
                                     tail_fraction, delta, escape_log)
    if overflow and verdict == INDETERMINATE and len(ratios) and ratios[-1] > 1:
        verdict = DIVERGING
    gap = None
    if dichotomy and len(partial):
        gap = abs(complex(partial[-1]) + 1.0)
    return SeriesReport(
        kind, complex(lam), a, np.asarray(index[:len(terms)]), terms,
        np.array(lms, dtype=float), partial, ratios, np.array(flagged, dtype=bool),
        verdict, tail, len(terms), bool(escaped), gap,
        {"tail_fraction": tail_fraction, "delta": delta,
         "escape_log_threshold": escape_log})


def _derivatives(lam, a, count, escape_log):
    """Points and log-derivatives along the orbit of ``a``, at most ``count`` each."""
    rec = orbit(lam, a, max(count - 1, 1), escape_log, stop_on_cycle=False)
    pts = rec.points[:count]
    dl = rec.dlog[:count]
    return pts, dl, rec.escaped and len(rec.points) < count


def poincare_report(lam, N, escape_log=DEFAULT_ESCAPE_LOG,
                    tail_fraction=TAIL_FRACTION, delta=DELTA):
    """Partial sums S_2..S_N of the Poincaré series (S_1 = 1)."""
    lam = complex(lam)
    if lam == 0:
        raise LambdaZero("lambda must be nonzero")
    if N < 1:
        raise ValueError("N must be >= 1")
    count = N - 1
    index = np.arange(2, N + 1)
    if count == 0:
        return _assemble("poincare", lam, None, index, [], 0, False, 1.0 + 0j,
                         tail_fraction, delta, escape_log)
    _, dl, escaped = _derivatives(lam, 1.0, count, escape_log)
    inv_lam = from_cartesian(1.0 / lam)
    logterms = [inv_lam / d for d in dl]
    return _assemble("poincare", lam, None, index, logterms, count, escaped, 1.0 + 0j,
                     tail_fraction, delta, escape_log)


def poincare_partial(lam, n, escape_log=DEFAULT_ESCAPE_LOG):
    """S_n = 1 + (1/lam) sum_{i=2..n} 1/(f^{i-2})'(1)."""
    rep = poincare_report(lam, n, escape_log)
    return complex(rep.partial_sums[-1]) if len(rep.partial_sums) else 1.0 + 0j


def summability_report(lam, a, N, escape_log=DEFAULT_ESCAPE_LOG,
                       tail_fraction=TAIL_FRACTION, delta=DELTA):
    """Terms 1/(f^i)'(a), i = 0..N-1, with a ratio-test verdict.

    Consecutive ratios are ``1/|lam f^{i+1}(a)|``.  An escaping orbit gives an
    absolutely convergent series outright; otherwise the last quarter of the
    ratios decides (all below ``1 - delta``, all above ``1 + delta``, or
    indeterminate).
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    _, dl, escaped = _derivatives(lam, a, N, escape_log)
    one = LogComplex.one()
    # a zero derivative (lam = 0) makes the term infinite: treated as overflow
    logterms = [None if d.is_zero else one / d for d in dl]
    return _assemble("summability", lam, complex(a), np.arange(N), logterms, N, escaped,
                     0j, tail_fraction, delta, escape_log)


def b_series(lam, a, N, escape_log=DEFAULT_ESCAPE_LOG,
             tail_fraction=TAIL_FRACTION, delta=DELTA):
    """Partial sums B_1(a)..B_N(a).

    When ``a`` equals ``f(1) = exp(lam)`` the report also carries
    ``dichotomy_gap = |B_N(a) + 1|``.
    """
    lam = complex(lam)
    if lam == 0:
        raise LambdaZero("lambda must be nonzero")
    if N < 1:
        raise ValueError("N must be >= 1")
    a_l = a if isinstance(a, LogComplex) else from_cartesian(a)
    pts, dl, escaped = _derivatives(lam, a_l, N, escape_log)
    fp1 = from_cartesian(lam * cmath.exp(lam))
    logterms = [p / (d * fp1) for p, d in zip(pts, dl)]
    d1 = cmath.exp(lam)
    a_c = a_l.to_complex() if a_l.is_native else None
    at_d = a_c is not None and abs(a_c - d1) <= 1e-12 * max(1.0, abs(d1))
    return _assemble("B", lam, a_c, np.arange(1, N + 1), logterms, N, escaped, 0j,
                     tail_fraction, delta, escape_log, dichotomy=at_d)


def b_partial(lam, a, N, escape_log=DEFAULT_ESCAPE_LOG):
    return b_series(lam, a, N, escape_log).value
