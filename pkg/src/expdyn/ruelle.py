"""Push-forward (Ruelle) operator of f(z) = exp(lam z) on the rational basis

    gamma_a(z) = a (a - 1) / (z (z - 1) (z - a)),     a not in {0, 1}.

Two independent routes are provided:

* ``branch_sum`` evaluates ``(1/(lam z)^2) * sum_k phi(xi_k)`` over the inverse
  branches ``xi_k = (Log z + 2 pi i k)/lam``, truncated at |k| <= K;
* ``push_forward`` acts exactly on finite combinations of gamma_a:

      R(gamma_a) = gamma_{f(a)} / f'(a) - a / f'(1) * gamma_{f(1)}.

Coefficients and poles are native complex numbers when representable and
:class:`~expdyn.logcplx.LogComplex` otherwise.  Orbit poles can leave the
double range after three or four steps while their contribution ``c * a``
stays of order 1e-8, so dropping them is not an option.  A far pole enters
evaluation only through ``w = c * a`` and ``u = 1 / a``:

      c * gamma_a(z) = w (1 - u) / ((z u - 1) z (z - 1)).
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _io
from .errors import (EmptyGridAfterExclusion, ImageAtForbiddenPole, MoebiusDegenerate,
                     PoleHit, RangeExceeded, ZeroArgument)
from .logcplx import LOG_UNDERFLOW, LogComplex, exp_of, from_cartesian
from .series import b_series

POLE_TOL = 1e-9
_NATIVE = 700.0


# -- mixed native / log-polar scalars ---------------------------------------

def _lc(x):
    return x if isinstance(x, LogComplex) else from_cartesian(x)


def _norm(x):
    """Prefer a native complex whenever it is comfortably in range."""
    if isinstance(x, LogComplex):
        if x.is_zero:
            return 0j
        if -_NATIVE < x.logmod < _NATIVE:
            return x.to_complex()
        return x
    return complex(x)


def _is_far(x):
    return isinstance(x, LogComplex)


def _mul(x, y):
    if not _is_far(x) and not _is_far(y):
        r = x * y
        if (math.isfinite(r.real) and math.isfinite(r.imag)
                and (r == 0 and (x == 0 or y == 0) or abs(r) > 1e-290)):
            return r
    return _norm(_lc(x) * _lc(y))


def _div(x, y):
    if not _is_far(x) and not _is_far(y) and y != 0:
        r = x / y
        if (math.isfinite(r.real) and math.isfinite(r.imag)
                and (r == 0 and x == 0 or abs(r) > 1e-290)):
            return r
    return _norm(_lc(x) / _lc(y))


def _add(x, y):
    if not _is_far(x) and not _is_far(y):
        return x + y
    return _norm(_lc(x) + _lc(y))


def _neg(x):
    return -x if not _is_far(x) else _norm(-x)


def _is_zero(x):
    return x.is_zero if _is_far(x) else x == 0


def _native(x):
    """Native value of x; RangeExceeded if it is too large, 0 if it underflows."""
    if _is_far(x):
        return x.to_complex()
    return x


def _same_pole(a, b, tol):
    if _is_far(a) != _is_far(b):
        return False
    if _is_far(a):
        return abs(a.logmod - b.logmod) <= tol and abs(a.arg - b.arg) <= tol
    return abs(a - b) <= tol


def _scalar_json(x):
    return x.to_json() if _is_far(x) else _io.pair(x)


def _scalar_from_json(obj):
    if isinstance(obj, dict):
        return _norm(LogComplex.from_json(obj))
    return _io.unpair(obj)


# -- the basis ---------------------------------------------------------------

def gamma_eval(a, z, pole_tol=POLE_TOL):
    """gamma_a(z) for native a and z."""
    a, z = complex(a), complex(z)
    if abs(a) <= pole_tol or abs(a - 1) <= pole_tol:
        raise ValueError(f"gamma_a needs a outside {{0, 1}}, got {a}")
    if abs(z) <= pole_tol:
        raise PoleHit("z=0")
    if abs(z - 1) <= pole_tol:
        raise PoleHit("z=1")
    if abs(z - a) <= pole_tol:
        raise PoleHit("z=a")
    return a * (a - 1) / (z * (z - 1) * (z - a))


class GammaCombo:
    """Finite combination sum_i c_i gamma_{a_i}.

    Poles closer than ``pole_tol`` are merged on construction (coefficients
    add) and terms whose coefficient cancels exactly are removed.
    ``dropped`` counts terms discarded by :func:`push_forward` because their
    whole contribution underflows double precision.
    """

    def __init__(self, terms=(), pole_tol=POLE_TOL, dropped=0):
        self.pole_tol = pole_tol
        self.dropped = dropped
        merged = []
        for c, a in terms:
            c, a = _norm(c), _norm(a)
            if not _is_far(a) and (abs(a) <= pole_tol or abs(a - 1) <= pole_tol):
                raise ValueError(f"pole {a} is within {pole_tol} of 0 or 1")
            for i, (c0, a0) in enumerate(merged):
                if _same_pole(a0, a, pole_tol):
                    merged[i] = (_add(c0, c), a0)
                    break
            else:
                merged.append((c, a))
        self.terms = tuple((c, a) for c, a in merged if not _is_zero(c))

    @classmethod
    def gamma(cls, a, coef=1.0, pole_tol=POLE_TOL):
        return cls([(coef, a)], pole_tol)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self):
        body = ", ".join(f"({c!r}, {a!r})" for c, a in self.terms)
        return f"GammaCombo([{body}])"

    @property
    def poles(self):
        return [a for _, a in self.terms]

    def coefficient_at(self, pole, tol=None):
        tol = self.pole_tol if tol is None else tol
        pole = _norm(pole)
        for c, a in self.terms:
            if _same_pole(a, pole, tol):
                return c
        return 0j

    def __add__(self, other):
        return GammaCombo(self.terms + other.terms, self.pole_tol,
                          self.dropped + other.dropped)

    def __neg__(self):
        return GammaCombo([(_neg(c), a) for c, a in self.terms], self.pole_tol, self.dropped)

    def __sub__(self, other):
        # subtract coefficientwise so identical terms cancel exactly
        out = [list(t) for t in self.terms]
        extra = []
        for c, a in other.terms:
            for t in out:
                if _same_pole(t[1], a, self.pole_tol):
                    t[0] = 0j if t[0] == c else _add(t[0], _neg(c))
                    break
            else:
                extra.append((_neg(c), a))
        return GammaCombo([tuple(t) for t in out] + extra, self.pole_tol,
                          self.dropped + other.dropped)

    def scale(self, s):
        return GammaCombo([(_mul(c, s), a) for c, a in self.terms], self.pole_tol, self.dropped)

    def _split(self):
        """Arrays (w, a, u, far) with w = c a and u = 1/a."""
        w, a, u, far = [], [], [], []
        for c, p in self.terms:
            w.append(_native(_mul(c, p)))
            if _is_far(p):
                a.append(complex(np.nan, np.nan))
                u.append(_native(_div(1.0 + 0j, p)))
                far.append(True)
            else:
                a.append(p)
                u.append(1.0 / p)
                far.append(False)
        return (np.array(w, dtype=complex), np.array(a, dtype=complex),
                np.array(u, dtype=complex), np.array(far, dtype=bool))

    def __call__(self, z):
        return self.evaluate(z)

    def evaluate(self, z, check=True):
        """Value at z (scalar or array).  Raises PoleHit at 0, 1 or a pole."""
        scalar = np.ndim(z) == 0
        Z = np.atleast_1d(np.asarray(z, dtype=complex))
        tol = self.pole_tol
        if check:
            _check_poles(Z, [a for _, a in self.terms if not _is_far(a)], tol)
        out = np.zeros(Z.shape, dtype=complex)
        if self.terms:
            w, a, u, far = self._split()
            base = Z * (Z - 1.0)
            for k in range(len(w)):
                if w[k] == 0:
                    continue
                if far[k]:
                    out += w[k] * (1.0 - u[k]) / ((Z * u[k] - 1.0) * base)
                else:
                    out += w[k] * (a[k] - 1.0) / (base * (Z - a[k]))
        return complex(out[0]) if scalar else out

    def partial_fractions(self):
        """(C0, C1, [(residue, pole)]) with combo = C0/z + C1/(z-1) + sum r/(z-a)."""
        C0 = 0j
        C1 = 0j
        res = []
        for c, a in self.terms:
            w = _native(_mul(c, a))
            if _is_far(a):
                u = _native(_div(1.0 + 0j, a))
                C0 += w * (1.0 - u)
                res.append((w * u, a))
            else:
                C0 += w - _native(c)
                res.append((_native(c), a))
            C1 -= w
        return C0, C1, res

    def to_json(self):
        return [{"coef": _scalar_json(c), "pole": _scalar_json(a)} for c, a in self.terms]

    @classmethod
    def from_json(cls, obj, pole_tol=POLE_TOL):
        return cls([(_scalar_from_json(t["coef"]), _scalar_from_json(t["pole"]))
                    for t in obj], pole_tol)


def _check_poles(Z, poles, tol, branch_offset=None):
    def fail(mask, where):
        idx = int(np.flatnonzero(mask.ravel())[0])
        raise PoleHit(where, None if branch_offset is None else idx - branch_offset)

    m = np.abs(Z) <= tol
    if m.any():
        fail(m, "z=0")
    m = np.abs(Z - 1.0) <= tol
    if m.any():
        fail(m, "z=1")
    for a in poles:
        m = np.abs(Z - a) <= tol
        if m.any():
            fail(m, "z=a")


# -- inverse branches --------------------------------------------------------

@dataclass(frozen=True)
class BranchSet:
    lam: complex
    z: complex
    K: int
    k: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)


def branches(lam, z, K):
    """All preimages xi_k = (Log z + 2 pi i k)/lam, k = -K..K."""
    lam, z = complex(lam), complex(z)
    if z == 0:
        raise ZeroArgument("0 is omitted by exp and has no preimages")
    k = np.arange(-K, K + 1)
    return BranchSet(lam, z, K, k, (cmath.log(z) + 2j * np.pi * k) / lam)


def _branch_values(lam, combo, z, K):
    if K < 1:
        raise ValueError("K must be >= 1")
    bs = branches(lam, z, K)
    _check_poles(bs.xi, [a for _, a in combo.terms if not _is_far(a)],
                 combo.pole_tol, branch_offset=K)
    return combo.evaluate(bs.xi, check=False)


def branch_sum(lam, combo, z, K):
    """(1/(lam z)^2) sum_{|k|<=K} combo(xi_k(z)), summed in fixed k order."""
    vals = _branch_values(lam, combo, z, K)
    return complex(np.sum(vals) / (complex(lam) * complex(z)) ** 2)


def modulus_branch_sum(lam, combo, z, K):
    """(1/|lam z|^2) sum_{|k|<=K} |combo(xi_k(z))|."""
    vals = _branch_values(lam, combo, z, K)
    return float(np.sum(np.abs(vals)) / abs(complex(lam) * complex(z)) ** 2)


def _branch_apply(lam, fn, Z, K):
    """Vectorised one-level branch sum of ``fn`` at every point of ``Z``."""
    k = np.arange(-K, K + 1)
    XI = (np.log(Z)[..., None] + 2j * np.pi * k) / lam
    return fn(XI).sum(axis=-1) / (lam * Z) ** 2


def nested_branch_sum(lam, combo, z, K, depth=2):
    """depth-fold branch sum: an oracle for the iterated operator."""
    lam = complex(lam)
    fn = combo.evaluate
    for _ in range(depth):
        fn = (lambda inner: (lambda X: _branch_apply(lam, inner, X, K)))(fn)
    return complex(fn(np.array([complex(z)]))[0])


# -- exact action on the basis -----------------------------------------------

def _image(lam, c, a, pole_tol):
    """(c / f'(a), f(a)) for one term, or None when it underflows entirely.

    For a pole beyond the native range the image term has weight ``c / lam``
    whatever the size of f(a); if that weight underflows the term is dropped,
    otherwise the image cannot be represented.
    """
    if not _is_far(a):
        w = lam * a
        if math.isfinite(w.real) and math.isfinite(w.imag):
            fa = exp_of(w)
            if fa.logmod <= math.log(pole_tol):
                raise ImageAtForbiddenPole(a, fa)
            fa = _norm(fa)
            if not _is_far(fa) and (abs(fa) <= pole_tol or abs(fa - 1) <= pole_tol):
                raise ImageAtForbiddenPole(a, fa)
            return _div(c, _mul(lam, fa)), fa
    if _lc(c).logmod - math.log(abs(lam)) < LOG_UNDERFLOW:
        return None
    raise RangeExceeded(f"image of pole {a!r} under f is not representable")


def push_forward(lam, combo):
    """Exact R on a gamma combination."""
    lam = complex(lam)
    tol = combo.pole_tol
    d = cmath.exp(lam)
    fp1 = lam * d
    out = []
    dropped = combo.dropped
    for c, a in combo.terms:
        img = _image(lam, c, a, tol)
        if img is None:
            dropped += 1
        else:
            out.append(img)
        out.append((_neg(_div(_mul(c, a), fp1)), d))
    return GammaCombo(out, tol, dropped)


@dataclass(frozen=True)
class IterResult:
    combo: GammaCombo
    # per input term: (1/(f^n)'(a), f^n(a)) and the weights
    # w_j = f^j(a) / ((f^j)'(a) f'(1)), j = 0..n-1, multiplying R^{n-1-j}(gamma_{f(1)})
    leading: list
    cascade: list


def push_forward_iter(lam, combo, n):
    """n-fold push_forward, plus the coefficients of the closed iterated formula."""
    lam = complex(lam)
    if n < 0:
        raise ValueError("n must be >= 0")
    cur = combo
    for _ in range(n):
        cur = push_forward(lam, cur)
    fp1 = lam * cmath.exp(lam)
    leading, cascade = [], []
    for c, a in combo.terms:
        ws = []
        p, dl = a, 1.0 + 0j
        for _ in range(n):
            ws.append(_div(_mul(c, _div(p, dl)), fp1))
            img = _image(lam, 1.0 + 0j, p, combo.pole_tol)
            if img is None:
                break
            p = img[1]
            dl = _mul(dl, _mul(lam, p))
        leading.append((_div(c, dl), p))
        cascade.append(ws)
    return IterResult(cur, leading, cascade)


def expand_star(lam, a, n, coef=1.0 + 0j, pole_tol=POLE_TOL):
    """R^n(c gamma_a) rebuilt from the closed iterated formula.

    c/(f^n)'(a) gamma_{f^n(a)} - sum_j w_j R^{n-1-j}(gamma_{f(1)}), with the
    powers of R applied to the single function gamma_{f(1)}.
    """
    lam = complex(lam)
    res = push_forward_iter(lam, GammaCombo([(coef, a)], pole_tol), n)
    lead_c, lead_p = res.leading[0]
    d = cmath.exp(lam)
    powers = [GammaCombo.gamma(d, pole_tol=pole_tol)]
    for _ in range(n - 1):
        powers.append(push_forward(lam, powers[-1]))
    total = GammaCombo([(lead_c, lead_p)], pole_tol)
    for j, w in enumerate(res.cascade[0]):
        total = total - powers[n - 1 - j].scale(w)
    return total


def phi_truncation(lam, N, pole_tol=POLE_TOL):
    """phi_N = sum_{n<N} gamma_{f^n(d)} / (f^n)'(d), d = f(1).

    Built by repeated :func:`_image`, the same step :func:`push_forward`
    uses, so ``push_forward(phi_N) - phi_N`` cancels exactly term by term.
    Terms past the point where the orbit of d leaves every representable
    range contribute less than the smallest double and are counted in
    ``dropped``.
    """
    lam = complex(lam)
    if N < 1:
        raise ValueError("N must be >= 1")
    c, a = 1.0 + 0j, _norm(exp_of(lam))
    terms = [(c, a)]
    dropped = 0
    for n in range(1, N):
        img = _image(lam, c, a, pole_tol)
        if img is None:
            dropped = N - n
            break
        c, a = img
        terms.append((c, a))
    return GammaCombo(terms, pole_tol, dropped)


@dataclass(frozen=True)
class FixedPointResidual:
    max_residual: float
    one_plus_b: complex
    samples: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    predicted: np.ndarray = field(repr=False)
    gamma_d: np.ndarray = field(repr=False)
    difference: GammaCombo = field(repr=False)

    @property
    def normalized(self):
        """|residual| / |gamma_{f(1)}(z)| at each sample; compare with |1 + B_N|."""
        return np.abs(self.residual) / np.abs(self.gamma_d)


def fixed_point_residual(lam, N, sample_points, pole_tol=POLE_TOL):
    """Residual of R(phi_N) = phi_N at sample points.

    Summing the exact action term by term gives

        R(phi_N) - phi_N = -(1 + B_N(d)) gamma_d + gamma_{f^N(d)} / (f^N)'(d),

    with d = f(1); ``predicted`` holds the right-hand side.
    """
    lam = complex(lam)
    Z = np.asarray(sample_points, dtype=complex)
    phi = phi_truncation(lam, N, pole_tol)
    pushed = push_forward(lam, phi)
    d = cmath.exp(lam)
    B = b_series(lam, d, N).value
    diff = pushed - phi
    resid = pushed.evaluate(Z) - phi.evaluate(Z)
    g_d = GammaCombo.gamma(d, pole_tol=pole_tol).evaluate(Z)
    tail = diff - GammaCombo.gamma(d, coef=diff.coefficient_at(d), pole_tol=pole_tol)
    predicted = -(1.0 + B) * g_d + tail.evaluate(Z)
    return FixedPointResidual(float(np.max(np.abs(resid))) if Z.size else 0.0,
                              1.0 + B, Z, resid, predicted, g_d, diff)


def moebius(y):
    """g(z) = y z / (z + y - 1) and its derivative."""
    y = complex(y)
    if y == 0 or y == 1:
        raise MoebiusDegenerate(f"g(z) = yz/(z+y-1) is constant for y = {y}")
    return (lambda z: y * z / (z + y - 1.0),
            lambda z: y * (y - 1.0) / (z + y - 1.0) ** 2)


def _moebius_image_of_pole(y, a):
    if _is_far(a):
        u = _native(_div(1.0 + 0j, a))
        return y / (1.0 + (y - 1.0) * u)
    return y * a / (a + y - 1.0)


@dataclass(frozen=True)
class MoebiusResidual:
    max_residual: float
    samples: np.ndarray = field(repr=False)
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)


def mobius_identity_residual(lam, y, N, sample_points, pole_tol=POLE_TOL):
    """max |G_N(g(z)) g'(z) - phi_N(z)| over the samples.

    G_N(w) = C1/w - C2/(w - 1) + sum_i c_i / (w - g(a_i)) with
    C1 = sum c_i (a_i - 1), C2 = sum c_i a_i, where phi_N = sum c_i gamma_{a_i}.
    """
    lam, y = complex(lam), complex(y)
    g, dg = moebius(y)
    phi = phi_truncation(lam, N, pole_tol)
    # C1 = sum c_i (a_i - 1) and -C2 = -sum c_i a_i are the residues at 0 and 1
    C1, minus_C2, residues = phi.partial_fractions()
    shifted = [(r, _moebius_image_of_pole(y, a)) for r, a in residues]
    if any(not _is_far(a) and abs(a - (1.0 - y)) <= pole_tol for _, a in phi.terms):
        raise PoleHit("1-y is a pole of phi_N")
    Z = np.asarray(sample_points, dtype=complex)
    if np.any(np.abs(Z - (1.0 - y)) <= pole_tol):
        raise PoleHit("z=1-y")
    W = g(Z)
    G = C1 / W + minus_C2 / (W - 1.0)
    for r, b in shifted:
        G = G + r / (W - b)
    lhs = G * dg(Z)
    rhs = phi.evaluate(Z)
    return MoebiusResidual(float(np.max(np.abs(lhs - rhs))) if Z.size else 0.0, Z, lhs, rhs)


def nonvanishing_scan(combo, grid, exclusion_radius):
    """Minimum of |combo| over grid points away from its poles and from 0, 1.

    Numerical evidence only.
    """
    G = np.asarray(grid, dtype=complex).ravel()
    keep = (np.abs(G) > exclusion_radius) & (np.abs(G - 1.0) > exclusion_radius)
    for a in combo.poles:
        if not _is_far(a):
            keep &= np.abs(G - a) > exclusion_radius
    G = G[keep]
    if G.size == 0:
        raise EmptyGridAfterExclusion("no grid point survives the pole exclusion")
    vals = np.abs(combo.evaluate(G, check=False))
    i = int(np.argmin(vals))
    return float(vals[i]), complex(G[i])


def grid_points(re_range, im_range, step):
    """Rectangular grid of complex points with the given spacing (inclusive)."""
    nre = int(round((re_range[1] - re_range[0]) / step)) + 1
    nim = int(round((im_range[1] - im_range[0]) / step)) + 1
    x = np.linspace(re_range[0], re_range[1], nre)
    y = np.linspace(im_range[0], im_range[1], nim)
    return (x[None, :] + 1j * y[:, None]).ravel()


@dataclass(frozen=True)
class L1Evidence:
    box_integral: float
    plane_integral: float

    @property
    def ratio(self):
        return self.box_integral / self.plane_integral


def l1_evidence(lam, combo, box, h_box=0.1, K=100, R=20.0, h_plane=0.05, disk=0.05):
    """Midpoint-rule integrals of |R|(|combo|) over ``box`` and |combo| over [-R, R]^2.

    ``box = (x0, x1, y0, y1)``; disks of radius ``disk`` around 0, 1 and every
    native pole are excised from both integrals.  Evidence-grade only.
    """
    lam = complex(lam)
    poles = [0j, 1 + 0j] + [a for a in combo.poles if not _is_far(a)]

    def cells(x0, x1, y0, y1, h):
        nx, ny = int(round((x1 - x0) / h)), int(round((y1 - y0) / h))
        x = x0 + h * (np.arange(nx) + 0.5)
        y = y0 + h * (np.arange(ny) + 0.5)
        Z = (x[None, :] + 1j * y[:, None]).ravel()
        keep = np.ones(Z.shape, dtype=bool)
        for p in poles:
            keep &= np.abs(Z - p) > disk
        return Z[keep]

    Zp = cells(-R, R, -R, R, h_plane)
    plane = float(np.abs(combo.evaluate(Zp, check=False)).sum() * h_plane ** 2)
    Zb = cells(*box, h_box)
    k = np.arange(-K, K + 1)
    XI = (np.log(Zb)[:, None] + 2j * np.pi * k) / lam
    vals = np.abs(combo.evaluate(XI.ravel(), check=False)).reshape(XI.shape).sum(axis=1)
    boxv = float((vals / np.abs(lam * Zb) ** 2).sum() * h_box ** 2)
    return L1Evidence(boxv, plane)
