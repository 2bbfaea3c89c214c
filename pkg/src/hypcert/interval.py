"""Outward-rounded interval arithmetic.

Every operation returns an interval guaranteed to contain the exact real
result set of its inputs.  Two endpoint backends share one protocol:

* ``Interval`` -- IEEE754 double endpoints (precision 53).  Exact error
  terms (two-sum / Dekker two-product) detect when an endpoint is exact;
  otherwise the endpoint is nudged one ulp outward with ``math.nextafter``.
  Transcendental endpoints are evaluated with libm and widened by two ulps,
  which covers the documented worst-case libm error for the functions used
  here (cos, sin, cosh, acosh, acos are all correctly rounded to <= 2 ulp
  on mainstream libms; sqrt is exactly rounded).
* ``MPInterval`` -- arbitrary-precision endpoints via mpmath's directed
  rounding primitives, plus one extra ulp of outward slack per endpoint.

No global floating-point state is touched; rounding is done value-by-value,
so intervals are safe to share across threads.
"""

from __future__ import annotations

import math
from math import inf, isfinite, isnan, nextafter

import numpy as np
from mpmath import libmp

__all__ = [
    "Interval",
    "MPInterval",
    "IntervalError",
    "DomainError",
    "FloatKernel",
    "MPKernel",
    "kernel_for_precision",
    "IntervalMatrix",
    "interval_matrix_invertible",
    "PI",
    "TWO_PI",
]

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


class IntervalError(ValueError):
    """Malformed interval (reversed or NaN endpoints, shape mismatch)."""


class DomainError(IntervalError):
    """Operation evaluated outside its real domain (div by 0-straddling
    interval, sqrt of negatives, arccos outside [-1,1], ...)."""


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


_TWO_PROD_TINY = 2.0 ** -960  # below this the Dekker error term may round


def _two_prod(a, b):
    p = a * b
    if not isfinite(p) or abs(p) < _TWO_PROD_TINY:
        # overflowed splitting or (sub)normal underflow: the error term
        # cannot be trusted, report it unknown
        return p, math.nan
    ta = _SPLITTER * a
    ah = ta - (ta - a)
    al = a - ah
    tb = _SPLITTER * b
    bh = tb - (tb - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _down(s, err):
    # err is the exact residual (true - rounded); err = NaN means unknown.
    if isnan(err):
        return -inf if s == -inf else nextafter(s, -inf)
    if err >= 0.0:
        return s
    return nextafter(s, -inf)


def _up(s, err):
    if isnan(err):
        return inf if s == inf else nextafter(s, inf)
    if err <= 0.0:
        return s
    return nextafter(s, inf)


def _lib_down(v, ulps=2):
    for _ in range(ulps):
        v = nextafter(v, -inf)
    return v


def _lib_up(v, ulps=2):
    for _ in range(ulps):
        v = nextafter(v, inf)
    return v


class Interval:
    """Closed real interval with double-precision endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = float(lo)
        hi = float(hi)
        if isnan(lo) or isnan(hi):
            raise IntervalError("NaN endpoint")
        if lo > hi:
            raise IntervalError(f"reversed endpoints [{lo!r}, {hi!r}]")
        # normalize -0.0 so serialization is deterministic
        self.lo = lo + 0.0
        self.hi = hi + 0.0

    # -- construction -------------------------------------------------

    @classmethod
    def point(cls, x):
        return cls(x, x)

    @staticmethod
    def _coerce(x):
        if isinstance(x, Interval):
            return x
        if isinstance(x, (int, float)):
            return Interval(x, x)
        return NotImplemented

    # -- queries ------------------------------------------------------

    def mid(self):
        if self.lo == self.hi:
            return self.lo
        m = 0.5 * (self.lo + self.hi)
        if isfinite(m):
            return m
        return 0.5 * self.lo + 0.5 * self.hi

    def width(self):
        s, e = _two_sum(self.hi, -self.lo)
        return _up(s, e)

    def mag(self):
        return max(abs(self.lo), abs(self.hi))

    def is_finite(self):
        return isfinite(self.lo) and isfinite(self.hi)

    def contains(self, x):
        return self.lo <= x <= self.hi

    def encloses(self, other):
        return self.lo <= other.lo and other.hi <= self.hi

    def strictly_inside(self, other):
        """self contained in the interior of other."""
        return other.lo < self.lo and self.hi < other.hi

    def intersects(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other):
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise IntervalError("empty intersection")
        return Interval(lo, hi)

    def hull(self, other):
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"

    def __eq__(self, other):
        return (
            isinstance(other, Interval)
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self):
        return hash((self.lo, self.hi))

    # -- arithmetic ---------------------------------------------------

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        slo, elo = _two_sum(self.lo, other.lo)
        shi, ehi = _two_sum(self.hi, other.hi)
        return Interval(_down(slo, elo), _up(shi, ehi))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        lo = inf
        hi = -inf
        for x in (self.lo, self.hi):
            for y in (other.lo, other.hi):
                if x == 0.0 or y == 0.0:
                    p, e = 0.0, 0.0
                else:
                    p, e = _two_prod(x, y)
                d = _down(p, e)
                u = _up(p, e)
                if d < lo:
                    lo = d
                if u > hi:
                    hi = u
        return Interval(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.lo <= 0.0 <= other.hi:
            raise DomainError("division by interval containing zero")
        lo = inf
        hi = -inf
        for x in (self.lo, self.hi):
            for y in (other.lo, other.hi):
                q = x / y
                if not isfinite(q):
                    d, u = _down(q, math.nan), _up(q, math.nan)
                else:
                    p, e = _two_prod(q, y)
                    # compare q*y against x to learn the rounding direction;
                    # an overflowed splitting gives no information
                    if isnan(e) or not isfinite(p):
                        d, u = nextafter(q, -inf), nextafter(q, inf)
                    elif p == x and e == 0.0:
                        d = u = q
                    else:
                        qy_gt_x = p > x or (p == x and e > 0.0)
                        if qy_gt_x == (y > 0.0):
                            d, u = nextafter(q, -inf), q
                        else:
                            d, u = q, nextafter(q, inf)
                if d < lo:
                    lo = d
                if u > hi:
                    hi = u
        return Interval(lo, hi)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__truediv__(self)

    def abs(self):
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    # -- elementary functions ------------------------------------------

    def sqrt(self):
        if self.lo < 0.0:
            raise DomainError(f"sqrt of interval with negative part {self!r}")

        def point_sqrt(x):
            s = math.sqrt(x)
            p, e = _two_prod(s, s)
            if p == x and e == 0.0:
                return s, s
            # sqrt is exactly rounded: one ulp out on each side is sound
            return nextafter(s, -inf), nextafter(s, inf)

        lo, _ = point_sqrt(self.lo)
        _, hi = point_sqrt(self.hi)
        return Interval(max(lo, 0.0), hi)

    def cosh(self):
        def up_at(x):
            return _lib_up(math.cosh(x)) if x != 0.0 else 1.0

        def down_at(x):
            return _lib_down(math.cosh(x)) if x != 0.0 else 1.0

        if self.lo <= 0.0 <= self.hi:
            lo = 1.0
        else:
            lo = down_at(self.lo if self.lo > 0.0 else self.hi)
        hi = max(up_at(self.lo), up_at(self.hi))
        return Interval(max(lo, 1.0), hi)

    def acosh(self):
        if self.lo < 1.0:
            raise DomainError(f"acosh needs [1, inf) argument, got {self!r}")

        def at(x, up):
            if x == 1.0:
                return 0.0
            v = math.acosh(x)
            return _lib_up(v) if up else _lib_down(v)

        return Interval(max(at(self.lo, False), 0.0), at(self.hi, True))

    def arccos(self):
        if self.lo < -1.0 or self.hi > 1.0:
            raise DomainError(f"arccos needs argument inside [-1,1], got {self!r}")

        def at(x, up):
            if x == 1.0:
                return 0.0
            if x == -1.0:
                return PI.hi if up else PI.lo
            v = math.acos(x)
            return _lib_up(v) if up else _lib_down(v)

        # arccos is decreasing
        return Interval(max(at(self.hi, False), 0.0), min(at(self.lo, True), PI.hi))

    def _cos_like(self, fn, crit_offset):
        # extrema of cos at k*pi (offset 0), of sin at pi/2 + k*pi
        if not self.is_finite():
            return Interval(-1.0, 1.0)
        if self.width() >= TWO_PI.hi:
            return Interval(-1.0, 1.0)

        def at(x, up):
            if x == 0.0:
                v = fn(0.0)  # exact: cos(0)=1, sin(0)=0
                return v
            v = fn(x)
            return _lib_up(v) if up else _lib_down(v)

        lo = min(at(self.lo, False), at(self.hi, False))
        hi = max(at(self.lo, True), at(self.hi, True))
        # conservatively include +-1 for every critical point that might
        # lie inside the argument interval
        k0 = math.floor(self.lo / math.pi) - 1
        k1 = math.ceil(self.hi / math.pi) + 1
        for k in range(k0, k1 + 1):
            crit = PI * k + crit_offset
            if crit.intersects(self):
                if fn is math.cos:
                    val_hi = k % 2 == 0
                else:
                    val_hi = k % 2 == 0  # sin peak at pi/2 + 2j*pi
                if val_hi:
                    hi = 1.0
                else:
                    lo = -1.0
        return Interval(max(lo, -1.0), min(hi, 1.0))

    def cos(self):
        return self._cos_like(math.cos, 0.0)

    def sin(self):
        return self._cos_like(math.sin, _PI_HALF_IV)


PI = Interval(math.pi, nextafter(math.pi, inf))
TWO_PI = Interval(2.0 * math.pi, nextafter(2.0 * math.pi, inf))
_PI_HALF_IV = Interval(0.5 * math.pi, nextafter(0.5 * math.pi, inf))


def contains_two_pi(x):
    """True only if x provably contains the real number 2*pi."""
    if isinstance(x, MPInterval):
        lo = libmp.mpf_shift(libmp.mpf_pi(x.prec + 8, _RF), 1)
        hi = libmp.mpf_shift(libmp.mpf_pi(x.prec + 8, _RC), 1)
        return not libmp.mpf_gt(x.lo, lo) and not libmp.mpf_gt(hi, x.hi)
    return x.lo <= TWO_PI.lo and TWO_PI.hi <= x.hi


# ---------------------------------------------------------------------------
# arbitrary-precision backend
# ---------------------------------------------------------------------------

_RF = libmp.round_floor
_RC = libmp.round_ceiling


def _mp_step(x, prec, up):
    """Move x outward by at least one ulp at the working precision."""
    sign, man, exp, bc = x
    if man == 0:
        u = libmp.mpf_shift(libmp.fone, -2 * prec)
    else:
        u = libmp.mpf_shift(libmp.fone, exp + bc - prec - 1)
    if up:
        return libmp.mpf_add(x, u, prec, _RC)
    return libmp.mpf_sub(x, u, prec, _RF)


class MPInterval:
    """Interval with mpmath endpoints at a configurable precision."""

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo, hi, prec):
        self.lo = lo
        self.hi = hi
        self.prec = prec
        if libmp.mpf_gt(lo, hi):
            raise IntervalError("reversed endpoints")

    @classmethod
    def from_floats(cls, lo, hi, prec):
        if isnan(lo) or isnan(hi):
            raise IntervalError("NaN endpoint")
        return cls(libmp.from_float(lo), libmp.from_float(hi), prec)

    @classmethod
    def point(cls, x, prec):
        if isinstance(x, tuple):
            return cls(x, x, prec)
        return cls.from_floats(float(x), float(x), prec)

    def _coerce(self, x):
        if isinstance(x, MPInterval):
            return x
        if isinstance(x, (int, float)):
            return MPInterval.point(x, self.prec)
        return NotImplemented

    def lo_float(self):
        return libmp.to_float(self.lo, rnd=_RF)

    def hi_float(self):
        return libmp.to_float(self.hi, rnd=_RC)

    def mid(self):
        m = libmp.mpf_shift(libmp.mpf_add(self.lo, self.hi, self.prec + 8, "n"), -1)
        return libmp.to_float(m, rnd="n")

    def width(self):
        return libmp.to_float(libmp.mpf_sub(self.hi, self.lo, 53, _RC), rnd=_RC)

    def mag(self):
        return max(abs(self.lo_float()), abs(self.hi_float()))

    def is_finite(self):
        return isfinite(self.lo_float()) and isfinite(self.hi_float())

    def contains(self, x):
        x = libmp.from_float(float(x))
        return not libmp.mpf_gt(self.lo, x) and not libmp.mpf_gt(x, self.hi)

    def encloses(self, other):
        return not libmp.mpf_gt(self.lo, other.lo) and not libmp.mpf_gt(
            other.hi, self.hi
        )

    def strictly_inside(self, other):
        return libmp.mpf_lt(other.lo, self.lo) and libmp.mpf_lt(self.hi, other.hi)

    def intersects(self, other):
        return not libmp.mpf_gt(self.lo, other.hi) and not libmp.mpf_gt(
            other.lo, self.hi
        )

    def intersect(self, other):
        lo = self.lo if libmp.mpf_gt(self.lo, other.lo) else other.lo
        hi = self.hi if libmp.mpf_lt(self.hi, other.hi) else other.hi
        return MPInterval(lo, hi, self.prec)

    def hull(self, other):
        lo = other.lo if libmp.mpf_gt(self.lo, other.lo) else self.lo
        hi = other.hi if libmp.mpf_lt(self.hi, other.hi) else self.hi
        return MPInterval(lo, hi, self.prec)

    def __repr__(self):
        return f"[{self.lo_float()!r}, {self.hi_float()!r}]~{self.prec}b"

    def __neg__(self):
        return MPInterval(libmp.mpf_neg(self.hi), libmp.mpf_neg(self.lo), self.prec)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return MPInterval(
            libmp.mpf_add(self.lo, other.lo, self.prec, _RF),
            libmp.mpf_add(self.hi, other.hi, self.prec, _RC),
            self.prec,
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        lo = hi = None
        for x in (self.lo, self.hi):
            for y in (other.lo, other.hi):
                d = libmp.mpf_mul(x, y, self.prec, _RF)
                u = libmp.mpf_mul(x, y, self.prec, _RC)
                if lo is None or libmp.mpf_lt(d, lo):
                    lo = d
                if hi is None or libmp.mpf_gt(u, hi):
                    hi = u
        return MPInterval(lo, hi, self.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        z = libmp.fzero
        if not libmp.mpf_gt(other.lo, z) and not libmp.mpf_gt(z, other.hi):
            raise DomainError("division by interval containing zero")
        lo = hi = None
        for x in (self.lo, self.hi):
            for y in (other.lo, other.hi):
                d = libmp.mpf_div(x, y, self.prec, _RF)
                u = libmp.mpf_div(x, y, self.prec, _RC)
                if lo is None or libmp.mpf_lt(d, lo):
                    lo = d
                if hi is None or libmp.mpf_gt(u, hi):
                    hi = u
        return MPInterval(lo, hi, self.prec)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__truediv__(self)

    def abs(self):
        z = libmp.fzero
        if not libmp.mpf_lt(self.lo, z):
            return self
        if not libmp.mpf_gt(self.hi, z):
            return -self
        neg_lo = libmp.mpf_neg(self.lo)
        hi = neg_lo if libmp.mpf_gt(neg_lo, self.hi) else self.hi
        return MPInterval(z, hi, self.prec)

    def _fn_at(self, fn, x, up):
        v = fn(x, self.prec + 10, _RC if up else _RF)
        return _mp_step(v, self.prec, up)

    def sqrt(self):
        if libmp.mpf_lt(self.lo, libmp.fzero):
            raise DomainError("sqrt of interval with negative part")
        lo = self._fn_at(libmp.mpf_sqrt, self.lo, False)
        hi = self._fn_at(libmp.mpf_sqrt, self.hi, True)
        if libmp.mpf_lt(lo, libmp.fzero):
            lo = libmp.fzero
        return MPInterval(lo, hi, self.prec)

    def cosh(self):
        z = libmp.fzero
        hi_cands = [
            self._fn_at(libmp.mpf_cosh, self.lo, True),
            self._fn_at(libmp.mpf_cosh, self.hi, True),
        ]
        hi = hi_cands[0] if libmp.mpf_gt(hi_cands[0], hi_cands[1]) else hi_cands[1]
        if not libmp.mpf_gt(self.lo, z) and not libmp.mpf_gt(z, self.hi):
            lo = libmp.fone
        else:
            arg = self.lo if libmp.mpf_gt(self.lo, z) else self.hi
            lo = self._fn_at(libmp.mpf_cosh, arg, False)
            if libmp.mpf_lt(lo, libmp.fone):
                lo = libmp.fone
        return MPInterval(lo, hi, self.prec)

    def acosh(self):
        if libmp.mpf_lt(self.lo, libmp.fone):
            raise DomainError("acosh needs [1, inf) argument")
        lo = (
            libmp.fzero
            if self.lo == libmp.fone
            else self._fn_at(libmp.mpf_acosh, self.lo, False)
        )
        hi = (
            libmp.fzero
            if self.hi == libmp.fone
            else self._fn_at(libmp.mpf_acosh, self.hi, True)
        )
        if libmp.mpf_lt(lo, libmp.fzero):
            lo = libmp.fzero
        return MPInterval(lo, hi, self.prec)

    def arccos(self):
        one = libmp.fone
        none_ = libmp.mpf_neg(one)
        if libmp.mpf_lt(self.lo, none_) or libmp.mpf_gt(self.hi, one):
            raise DomainError("arccos needs argument inside [-1,1]")

        def at(x, up):
            if x == one:
                return libmp.fzero
            if x == none_:
                return libmp.mpf_pi(self.prec, _RC if up else _RF)
            return self._fn_at(libmp.mpf_acos, x, up)

        lo = at(self.hi, False)
        hi = at(self.lo, True)
        if libmp.mpf_lt(lo, libmp.fzero):
            lo = libmp.fzero
        return MPInterval(lo, hi, self.prec)

    def _trig(self, fn, crit_is_cos):
        pi_lo = libmp.mpf_pi(self.prec + 10, _RF)
        lo_f, hi_f = self.lo_float(), self.hi_float()
        if not (isfinite(lo_f) and isfinite(hi_f)) or hi_f - lo_f >= 6.29:
            return MPInterval(libmp.mpf_neg(libmp.fone), libmp.fone, self.prec)
        cands_lo = [self._fn_at(fn, self.lo, False), self._fn_at(fn, self.hi, False)]
        cands_hi = [self._fn_at(fn, self.lo, True), self._fn_at(fn, self.hi, True)]
        lo = cands_lo[0] if libmp.mpf_lt(cands_lo[0], cands_lo[1]) else cands_lo[1]
        hi = cands_hi[0] if libmp.mpf_gt(cands_hi[0], cands_hi[1]) else cands_hi[1]
        pi_f = math.pi
        k0 = math.floor(lo_f / pi_f) - 1
        k1 = math.ceil(hi_f / pi_f) + 1
        for k in range(k0, k1 + 1):
            # critical point: k*pi for cos, pi/2 + k*pi for sin
            shift = 2 * k if crit_is_cos else 2 * k + 1
            c_lo = libmp.mpf_shift(libmp.mpf_mul_int(pi_lo, shift, self.prec + 10, _RF), -1)
            c_hi = _mp_step(c_lo, self.prec, True)
            c_lo = _mp_step(c_lo, self.prec, False)
            if not libmp.mpf_gt(c_lo, self.hi) and not libmp.mpf_gt(self.lo, c_hi):
                if k % 2 == 0:
                    hi = libmp.fone
                else:
                    lo = libmp.mpf_neg(libmp.fone)
        one = libmp.fone
        mone = libmp.mpf_neg(one)
        if libmp.mpf_lt(lo, mone):
            lo = mone
        if libmp.mpf_gt(hi, one):
            hi = one
        return MPInterval(lo, hi, self.prec)

    def cos(self):
        return self._trig(libmp.mpf_cos, True)

    def sin(self):
        return self._trig(libmp.mpf_sin, False)


# ---------------------------------------------------------------------------
# kernels: uniform constructors for the two backends
# ---------------------------------------------------------------------------


class FloatKernel:
    """Factory for 53-bit intervals."""

    precision = 53

    @staticmethod
    def point(x):
        return Interval.point(x)

    @staticmethod
    def interval(lo, hi):
        return Interval(lo, hi)

    @staticmethod
    def pi():
        return PI

    @staticmethod
    def two_pi():
        return TWO_PI


class MPKernel:
    """Factory for intervals with prec-bit endpoints."""

    def __init__(self, precision):
        if precision < 53:
            raise ValueError("precision must be >= 53 bits")
        self.precision = precision

    def point(self, x):
        return MPInterval.point(x, self.precision)

    def interval(self, lo, hi):
        return MPInterval.from_floats(float(lo), float(hi), self.precision)

    def pi(self):
        return MPInterval(
            libmp.mpf_pi(self.precision, _RF),
            libmp.mpf_pi(self.precision, _RC),
            self.precision,
        )

    def two_pi(self):
        p = self.pi()
        return MPInterval(
            libmp.mpf_shift(p.lo, 1), libmp.mpf_shift(p.hi, 1), self.precision
        )


def kernel_for_precision(precision):
    if precision == 53:
        return FloatKernel()
    return MPKernel(precision)


def contains_value(x, enclosure):
    """True only if interval x provably contains the value described by
    `enclosure` (itself an interval around the exact real)."""
    if isinstance(x, MPInterval):
        lo_ok = not libmp.mpf_gt(x.lo, libmp.from_float(enclosure.lo))
        hi_ok = not libmp.mpf_gt(libmp.from_float(enclosure.hi), x.hi)
        return lo_ok and hi_ok
    return x.lo <= enclosure.lo and enclosure.hi <= x.hi


# ---------------------------------------------------------------------------
# small dense interval linear algebra
# ---------------------------------------------------------------------------


class IntervalMatrix:
    """Dense matrix of intervals (row-major list of lists)."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows):
        self.rows = [list(r) for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for r in self.rows:
            if len(r) != self.ncols:
                raise IntervalError("ragged interval matrix")

    @classmethod
    def identity(cls, n, kernel):
        one = kernel.point(1.0)
        zero = kernel.point(0.0)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, nrows, ncols, kernel):
        zero = kernel.point(0.0)
        return cls([[zero for _ in range(ncols)] for _ in range(nrows)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def mat_mul(self, other):
        if self.ncols != other.nrows:
            raise IntervalError(
                f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}"
            )
        out = []
        bt = list(zip(*other.rows))
        for row in self.rows:
            out_row = []
            for col in bt:
                acc = row[0] * col[0]
                for k in range(1, len(row)):
                    acc = acc + row[k] * col[k]
                out_row.append(acc)
            out.append(out_row)
        return IntervalMatrix(out)

    __matmul__ = mat_mul

    def mat_sub(self, other):
        if self.nrows != other.nrows or self.ncols != other.ncols:
            raise IntervalError("shape mismatch in subtraction")
        return IntervalMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ]
        )

    def midpoints(self):
        return [[x.mid() for x in row] for row in self.rows]


def mat_mul(a, b):
    return a.mat_mul(b)


def _div_down_float(a, b):
    q = a / b
    p, e = _two_prod(q, b)
    if isnan(e) or not isfinite(p):
        return nextafter(q, -inf)
    if p == a and e == 0.0:
        return q
    qb_gt_a = p > a or (p == a and e > 0.0)
    if qb_gt_a == (b > 0.0):
        return nextafter(q, -inf)
    return q


def interval_matrix_invertible(m):
    """Certify that every member matrix of m is invertible.

    Finds an approximate double-precision inverse n of the midpoint matrix
    and checks that every entry of m@n - Id has absolute value strictly
    below 1/r^2 (r = number of rows).  Returns False on any numerical
    trouble; never raises, and never answers True for an enclosure that
    contains a singular matrix.
    """
    if m.nrows != m.ncols:
        raise IntervalError("invertibility test needs a square matrix")
    r = m.nrows
    if r == 0:
        return True
    for row in m.rows:
        for x in row:
            if not x.is_finite():
                return False
    try:
        approx = np.array(m.midpoints(), dtype=float)
        n = np.linalg.inv(approx)
    except np.linalg.LinAlgError:
        return False
    if not np.all(np.isfinite(n)):
        return False
    sample = m.rows[0][0]
    if isinstance(sample, MPInterval):
        kernel = MPKernel(sample.prec)
    else:
        kernel = FloatKernel()
    n_iv = IntervalMatrix([[kernel.point(float(v)) for v in row] for row in n])
    resid = m.mat_mul(n_iv).mat_sub(IntervalMatrix.identity(r, kernel))
    bound = _div_down_float(1.0, float(r * r))
    for row in resid.rows:
        for x in row:
            if not x.is_finite() or x.mag() >= bound:
                return False
    return True
