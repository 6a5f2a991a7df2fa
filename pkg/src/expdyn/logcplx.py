"""Log-polar complex numbers.

A :class:`LogComplex` stores ``(logmod, arg)`` with ``logmod = ln|w|`` and
``arg`` wrapped into ``(-pi, pi]``.  Orbits of ``exp(lambda z)`` and products of
derivatives along them leave the double-precision range after a handful of
steps; in log-polar form they stay representable, and products are exact
additions of log-moduli.

Native complex numbers (Python ``complex``) play the role of the Cartesian
window onto these values.
"""

import math
import sys
from dataclasses import dataclass

from .errors import RangeExceeded

TAU = 2.0 * math.pi
#: ln of the largest finite double
LOG_MAX = math.log(sys.float_info.max)
#: values with logmod below this convert to native complex (one unit of headroom)
NATIVE_LOG_LIMIT = LOG_MAX - 1.0
#: below this logmod a value rounds to 0.0 in double precision
LOG_UNDERFLOW = math.log(5e-324)

_SAFE_ADD = 700.0


def wrap(theta):
    """Wrap an angle into ``(-pi, pi]``."""
    r = math.remainder(theta, TAU)
    if r <= -math.pi:
        r += TAU
    return r


@dataclass(frozen=True, slots=True)
class LogComplex:
    logmod: float
    arg: float = 0.0

    def __post_init__(self):
        lm = float(self.logmod)
        th = float(self.arg)
        if math.isnan(lm) or lm == math.inf:
            raise ValueError(f"invalid log-modulus {self.logmod!r}")
        if not math.isfinite(th):
            raise ValueError(f"invalid argument {self.arg!r}")
        object.__setattr__(self, "logmod", lm)
        object.__setattr__(self, "arg", 0.0 if lm == -math.inf else wrap(th))

    @classmethod
    def zero(cls):
        return cls(-math.inf, 0.0)

    @classmethod
    def one(cls):
        return cls(0.0, 0.0)

    @property
    def is_zero(self):
        return self.logmod == -math.inf

    @property
    def is_native(self):
        """True when :meth:`to_complex` will succeed."""
        return self.logmod < NATIVE_LOG_LIMIT

    def to_complex(self):
        return to_cartesian(self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if self.is_zero:
            if n < 0:
                raise ZeroDivisionError("zero to a negative power")
            return self if n else LogComplex.one()
        return LogComplex(n * self.logmod, n * self.arg)

    def to_json(self):
        lm = "-inf" if self.is_zero else self.logmod
        return {"logmod": lm, "arg": self.arg}

    @classmethod
    def from_json(cls, obj):
        lm = obj["logmod"]
        return cls(-math.inf if lm == "-inf" else float(lm), float(obj["arg"]))


def _coerce(x):
    if isinstance(x, LogComplex):
        return x
    if isinstance(x, (int, float, complex)):
        return from_cartesian(complex(x))
    raise TypeError(f"cannot combine LogComplex with {type(x).__name__}")


def from_cartesian(w):
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ValueError(f"non-finite complex value {w!r}")
    if w == 0:
        return LogComplex.zero()
    r = abs(w)
    if r == math.inf:
        # both parts near the float maximum; scale before taking the modulus
        r_log = math.log(abs(w / 4.0)) + math.log(4.0)
    elif r < 1e-300:
        r_log = math.log(abs(w * 2.0**600)) - 600 * math.log(2.0)
    else:
        r_log = math.log(r)
    return LogComplex(r_log, math.atan2(w.imag, w.real))


def to_cartesian(x):
    if x.logmod >= NATIVE_LOG_LIMIT:
        raise RangeExceeded(f"logmod {x.logmod:.6g} exceeds the native range")
    if x.is_zero:
        return 0j
    m = math.exp(x.logmod)
    th = x.arg
    # exact on the axes so that e.g. (ln 2, pi) gives -2+0j
    if th == 0.0:
        return complex(m, 0.0)
    if th == math.pi:
        return complex(-m, 0.0)
    if th == 0.5 * math.pi:
        return complex(0.0, m)
    if th == -0.5 * math.pi:
        return complex(0.0, -m)
    return complex(m * math.cos(th), m * math.sin(th))


def exp_of(w):
    """``exp(w)`` in log-polar form; exact in the log-modulus."""
    w = complex(w)
    return LogComplex(w.real, w.imag)


def mul(x, y):
    if x.is_zero or y.is_zero:
        return LogComplex.zero()
    return LogComplex(x.logmod + y.logmod, x.arg + y.arg)


def div(x, y):
    if y.is_zero:
        raise ZeroDivisionError("LogComplex division by zero")
    if x.is_zero:
        return x
    return LogComplex(x.logmod - y.logmod, x.arg - y.arg)


def neg(x):
    if x.is_zero:
        return x
    return LogComplex(x.logmod, x.arg + math.pi)


def recip(x):
    return div(LogComplex.one(), x)


def add(x, y):
    if x.is_zero:
        return y
    if y.is_zero:
        return x
    if abs(x.logmod) < _SAFE_ADD and abs(y.logmod) < _SAFE_ADD:
        return from_cartesian(to_cartesian(x) + to_cartesian(y))
    big, small = (x, y) if x.logmod >= y.logmod else (y, x)
    s = 1.0 + to_cartesian(div(small, big))
    if s == 0:
        return LogComplex.zero()
    return mul(big, from_cartesian(s))


def sub(x, y):
    if x == y:
        return LogComplex.zero()
    return add(x, neg(y))


def isclose(x, y, logmod_tol, arg_tol):
    """Compare with caller-supplied tolerances on log-modulus and argument."""
    if x.is_zero or y.is_zero:
        return x.is_zero and y.is_zero
    return (abs(x.logmod - y.logmod) <= logmod_tol
            and abs(wrap(x.arg - y.arg)) <= arg_tol)


def log_abs(w):
    """ln|w| for a native complex, ``-inf`` at zero."""
    if w == 0:
        return -math.inf
    return from_cartesian(w).logmod
