"""Exact rational and truncated-series arithmetic in the variables u, v, c.

Everything here is exact: coefficients are arbitrary-precision rationals and
no operation ever rounds.  The module supplies

- BigRational: arbitrary-precision rationals (stdlib Fraction, always in
  lowest terms with positive denominator);
- MultiPoly: polynomials in (u, v, c), used for the reduced coefficients of
  the collapsed bracket series;
- TruncatedSeries2: bivariate power series in (u, v) truncated at a total
  degree, used for the Taylor expansion of the scalar function f(u, v);
- series_exp / divide_after_factoring: the series plumbing needed to expand
  f = [(u-v)e^{u+v} - u e^u + v e^v] / [u v (e^u - e^v)], whose numerator and
  denominator both vanish on u = 0, v = 0 and u = v;
- f_taylor: the exact Taylor expansion of f about the origin;
- log_series_identity_check: the classical series
  x ln x/(x-1) = 1 - sum (1-x)^n / (n(n+1)), used as a test oracle.

Internally coefficients are stored as (num, den) integer pairs and multiplied
by the kernels in _kernels; Fractions appear at the public boundary.
"""

from __future__ import annotations

import math
from fractions import Fraction

from bchkit import _kernels as _k
from bchkit.errors import DomainError

BigRational = Fraction

_MAX_EXPONENT = 255  # per-variable bound imposed by packed kernel keys


def _q2p(q) -> tuple[int, int]:
    """Fraction/int -> normalized (num, den) pair."""
    q = Fraction(q)
    return (q.numerator, q.denominator)


def _p2q(p) -> Fraction:
    return Fraction(p[0], p[1])


def _check_exponent(e: int) -> int:
    if not 0 <= e <= _MAX_EXPONENT:
        raise DomainError(f"exponent {e} outside supported range 0..{_MAX_EXPONENT}")
    return e


class MultiPoly:
    """Exact polynomial in (u, v, c) with BigRational coefficients.

    Immutable by convention: no method mutates self, all ring operations
    return fresh instances.  Zero coefficients are never stored.
    """

    __slots__ = ("_t",)

    def __init__(self, terms=None, _packed=None):
        if _packed is not None:
            self._t = _packed
            return
        t = {}
        if terms:
            for (du, dv, dc), q in terms.items():
                p = _q2p(q)
                if p[0] == 0:
                    continue
                key = (_check_exponent(du) << 16) | (_check_exponent(dv) << 8) | _check_exponent(dc)
                t[key] = p
        self._t = t

    @classmethod
    def zero(cls) -> "MultiPoly":
        return cls(_packed={})

    @classmethod
    def constant(cls, q) -> "MultiPoly":
        p = _q2p(q)
        return cls(_packed={} if p[0] == 0 else {0: p})

    @classmethod
    def variable(cls, name: str) -> "MultiPoly":
        shift = {"u": 16, "v": 8, "c": 0}
        if name not in shift:
            raise DomainError(f"unknown variable {name!r}, expected 'u', 'v' or 'c'")
        return cls(_packed={1 << shift[name]: (1, 1)})

    @classmethod
    def monomial(cls, q, du: int, dv: int, dc: int = 0) -> "MultiPoly":
        return cls({(du, dv, dc): q})

    def coefficient(self, du: int, dv: int, dc: int = 0) -> Fraction:
        p = self._t.get((du << 16) | (dv << 8) | dc)
        return _p2q(p) if p is not None else Fraction(0)

    def terms(self):
        """Sorted iterator of ((deg_u, deg_v, deg_c), BigRational)."""
        for key in sorted(self._t):
            yield (key >> 16, (key >> 8) & 255, key & 255), _p2q(self._t[key])

    @property
    def is_zero(self) -> bool:
        return not self._t

    def total_degree(self) -> int:
        if not self._t:
            return 0
        return max((k >> 16) + ((k >> 8) & 255) + (k & 255) for k in self._t)

    def involves_c(self) -> bool:
        return any(k & 255 for k in self._t)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._t)
        _k.dict_scaled_add(out, other._t, 1, 1)
        return MultiPoly(_packed=out)

    def __sub__(self, other):
        other = self._coerce(other)
        out = dict(self._t)
        _k.dict_scaled_add(out, other._t, -1, 1)
        return MultiPoly(_packed=out)

    def __neg__(self):
        return MultiPoly(_packed={k: (-n, d) for k, (n, d) in self._t.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            p = _q2p(other)
            if p[0] == 0:
                return MultiPoly.zero()
            out = {}
            _k.dict_scaled_add(out, self._t, p[0], p[1])
            return MultiPoly(_packed=out)
        other = self._coerce(other)
        return MultiPoly(_packed=_k.poly3_mul(self._t, other._t))

    __rmul__ = __mul__

    @staticmethod
    def _coerce(x) -> "MultiPoly":
        if isinstance(x, MultiPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return MultiPoly.constant(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to MultiPoly")

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self._t == other._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def evaluate(self, u, v, c):
        """Numeric or exact evaluation; exact when all inputs are int/Fraction."""
        total = None
        for key, (n, d) in self._t.items():
            term = Fraction(n, d) * u ** (key >> 16) * v ** ((key >> 8) & 255) * c ** (key & 255)
            total = term if total is None else total + term
        if total is None:
            return Fraction(0) if all(isinstance(x, (int, Fraction)) for x in (u, v, c)) else 0.0
        return total

    def __repr__(self):
        if not self._t:
            return "MultiPoly(0)"
        bits = []
        for (du, dv, dc), q in self.terms():
            mono = "".join(s for s, e in (("u", du), ("v", dv), ("c", dc)) for s in [s + (f"^{e}" if e > 1 else "")] if e)
            bits.append(f"{q}{'·' + mono if mono else ''}")
        return "MultiPoly(" + " + ".join(bits) + ")"


class TruncatedSeries2:
    """Bivariate power series in (u, v), exact coefficients, truncated at a
    total degree.  Ring operations truncate consistently: the degree-N product
    of degree-N inputs is the true product with every term of total degree
    > N discarded.
    """

    __slots__ = ("max_total_degree", "_t")

    def __init__(self, max_total_degree: int, terms=None, _packed=None):
        if max_total_degree < 0:
            raise DomainError("max_total_degree must be non-negative")
        self.max_total_degree = max_total_degree
        if _packed is not None:
            self._t = _packed
            return
        t = {}
        if terms:
            for (du, dv), q in terms.items():
                if _check_exponent(du) + _check_exponent(dv) > max_total_degree:
                    continue
                p = _q2p(q)
                if p[0] != 0:
                    t[(du << 8) | dv] = p
        self._t = t

    @classmethod
    def zero(cls, max_deg: int) -> "TruncatedSeries2":
        return cls(max_deg, _packed={})

    @classmethod
    def constant(cls, q, max_deg: int) -> "TruncatedSeries2":
        p = _q2p(q)
        return cls(max_deg, _packed={} if p[0] == 0 else {0: p})

    @classmethod
    def linear(cls, cu, cv, max_deg: int) -> "TruncatedSeries2":
        """The series cu*u + cv*v."""
        return cls(max_deg, terms={(1, 0): Fraction(cu), (0, 1): Fraction(cv)})

    def coefficient(self, du: int, dv: int) -> Fraction:
        p = self._t.get((du << 8) | dv)
        return _p2q(p) if p is not None else Fraction(0)

    def terms(self):
        """Sorted iterator of ((deg_u, deg_v), BigRational)."""
        for key in sorted(self._t):
            yield (key >> 8, key & 255), _p2q(self._t[key])

    @property
    def is_zero(self) -> bool:
        return not self._t

    def truncate(self, new_max: int) -> "TruncatedSeries2":
        if new_max >= self.max_total_degree:
            return TruncatedSeries2(new_max, _packed=dict(self._t))
        t = {k: c for k, c in self._t.items() if (k >> 8) + (k & 255) <= new_max}
        return TruncatedSeries2(new_max, _packed=t)

    def _binop(self, other, sign):
        other = self._coerce(other)
        deg = min(self.max_total_degree, other.max_total_degree)
        out = {k: c for k, c in self._t.items() if (k >> 8) + (k & 255) <= deg}
        src = {k: c for k, c in other._t.items() if (k >> 8) + (k & 255) <= deg}
        _k.dict_scaled_add(out, src, sign, 1)
        return TruncatedSeries2(deg, _packed=out)

    def __add__(self, other):
        return self._binop(other, 1)

    def __sub__(self, other):
        return self._binop(other, -1)

    def __neg__(self):
        return TruncatedSeries2(self.max_total_degree, _packed={k: (-n, d) for k, (n, d) in self._t.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            p = _q2p(other)
            if p[0] == 0:
                return TruncatedSeries2.zero(self.max_total_degree)
            out = {}
            _k.dict_scaled_add(out, self._t, p[0], p[1])
            return TruncatedSeries2(self.max_total_degree, _packed=out)
        other = self._coerce(other)
        deg = min(self.max_total_degree, other.max_total_degree)
        return TruncatedSeries2(deg, _packed=_k.series2_mul(self._t, other._t, deg))

    __rmul__ = __mul__

    def _coerce(self, x) -> "TruncatedSeries2":
        if isinstance(x, TruncatedSeries2):
            return x
        if isinstance(x, (int, Fraction)):
            return TruncatedSeries2.constant(x, self.max_total_degree)
        raise TypeError(f"cannot coerce {type(x).__name__} to TruncatedSeries2")

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries2):
            return NotImplemented
        return self.max_total_degree == other.max_total_degree and self._t == other._t

    def __hash__(self):
        return hash((self.max_total_degree, frozenset(self._t.items())))

    def evaluate(self, u, v):
        """Evaluate the polynomial part.  Exact for int/Fraction inputs
        (floats are converted to the exact binary rationals they denote);
        the exact result is returned as a Fraction, or as a float when either
        input was a float."""
        was_float = isinstance(u, float) or isinstance(v, float)
        uq, vq = Fraction(u), Fraction(v)
        # exact Horner in u with precomputed v powers
        by_du: dict[int, Fraction] = {}
        for key, (n, d) in self._t.items():
            du, dv = key >> 8, key & 255
            by_du[du] = by_du.get(du, Fraction(0)) + Fraction(n, d) * vq**dv
        total = Fraction(0)
        for du in range(max(by_du, default=0), -1, -1):
            total = total * uq + by_du.get(du, Fraction(0))
        return float(total) if was_float else total

    def is_symmetric(self) -> bool:
        return all(self._t.get(((k & 255) << 8) | (k >> 8)) == c for k, c in self._t.items())

    def __repr__(self):
        head = ", ".join(f"u^{i}v^{j}: {q}" for (i, j), q in list(self.terms())[:6])
        more = "" if len(self._t) <= 6 else f", … ({len(self._t)} terms)"
        return f"TruncatedSeries2(deg<={self.max_total_degree}; {head}{more})"


def series_exp(s: TruncatedSeries2) -> TruncatedSeries2:
    """exp of a truncated series with zero constant term: sum s^k / k!, exact.

    The zero-constant precondition makes the sum finite (s^k has no terms of
    total degree < k, so k stops at the truncation degree).
    """
    if s.coefficient(0, 0) != 0:
        raise DomainError("series_exp requires a zero constant term")
    n = s.max_total_degree
    out = {0: (1, 1)}
    term = {0: (1, 1)}
    for k in range(1, n + 1):
        term = _k.series2_mul(term, s._t, n)
        if not term:
            break
        term = _k.dict_scaled_add({}, term, 1, k)
        _k.dict_scaled_add(out, term, 1, 1)
    return TruncatedSeries2(n, _packed=out)


def _normalize_factor(factor):
    """Accept 'u' / 'v' / 'u-v' or a (cu, cv) pair; return (cu, cv, name)."""
    named = {"u": (Fraction(1), Fraction(0)), "v": (Fraction(0), Fraction(1)),
             "u-v": (Fraction(1), Fraction(-1))}
    if isinstance(factor, str):
        key = factor.replace(" ", "")
        if key not in named:
            raise DomainError(f"unknown linear form {factor!r}; use 'u', 'v', 'u-v' or a (cu, cv) pair")
        cu, cv = named[key]
    else:
        cu, cv = Fraction(factor[0]), Fraction(factor[1])
    if cu == 0 and cv == 0:
        raise DomainError("zero linear form")
    if cu == 1 and cv == 0:
        name = "u"
    elif cu == 0 and cv == 1:
        name = "v"
    elif cu == 1 and cv == -1:
        name = "u-v"
    else:
        name = f"{cu}*u+{cv}*v"
    return cu, cv, name


def _divide_linear(terms: dict, cu: Fraction, cv: Fraction, top_degree: int, name: str) -> dict:
    """Exact division of a (deg_u, deg_v)->Fraction table by cu*u + cv*v,
    homogeneous degree by homogeneous degree.  Raises DomainError when the
    form does not divide exactly."""
    if terms.get((0, 0)):
        raise DomainError(f"factor {name} does not divide: nonzero constant term")
    out: dict[tuple[int, int], Fraction] = {}
    for deg in range(1, top_degree + 1):
        b = [Fraction(0)] * deg
        if cu != 0:
            # solve cu*b_{i-1} + cv*b_i = a_i downward from i = deg
            bi = Fraction(0)
            for i in range(deg, 0, -1):
                ai = terms.get((i, deg - i), Fraction(0))
                b[i - 1] = bi = (ai - cv * bi) / cu
            if cv * b[0] != terms.get((0, deg), Fraction(0)):
                raise DomainError(f"factor {name} does not divide series exactly at total degree {deg}")
        else:
            for i in range(deg):
                b[i] = terms.get((i, deg - i), Fraction(0)) / cv
            if terms.get((deg, 0), Fraction(0)) != 0:
                raise DomainError(f"factor {name} does not divide series exactly at total degree {deg}")
        for i, q in enumerate(b):
            if q:
                out[(i, deg - 1 - i)] = q
    return out


def divide_after_factoring(num: TruncatedSeries2, den: TruncatedSeries2, factors) -> TruncatedSeries2:
    """(num / prod(factors)) / (den / prod(factors)) as a truncated series.

    Each listed linear form must divide both num and den exactly (this is the
    removable-singularity situation: both vanish on the same lines).  After
    deflation the denominator must have a nonzero constant term; the quotient
    is then computed by exact long division.  The result carries total degree
    min(num, den degrees) - len(factors).
    """
    forms = [_normalize_factor(f) for f in factors]
    deg = min(num.max_total_degree, den.max_total_degree)
    nt = {(k >> 8, k & 255): _p2q(c) for k, c in num._t.items() if (k >> 8) + (k & 255) <= deg}
    dt = {(k >> 8, k & 255): _p2q(c) for k, c in den._t.items() if (k >> 8) + (k & 255) <= deg}
    for cu, cv, name in forms:
        nt = _divide_linear(nt, cu, cv, deg, f"{name} (numerator)")
        dt = _divide_linear(dt, cu, cv, deg, f"{name} (denominator)")
        deg -= 1
    d0 = dt.get((0, 0), Fraction(0))
    if d0 == 0:
        raise DomainError("deflated denominator has zero constant term")
    quot: dict[tuple[int, int], Fraction] = {}
    for d in range(deg + 1):
        for i in range(d + 1):
            k = (i, d - i)
            acc = nt.get(k, Fraction(0))
            for (qi, qj), qc in quot.items():
                di, dj = i - qi, d - i - qj
                if di >= 0 and dj >= 0 and (di, dj) != (0, 0):
                    dc = dt.get((di, dj))
                    if dc:
                        acc -= qc * dc
            if acc:
                quot[k] = acc / d0
    return TruncatedSeries2(deg, terms=quot)


def _f_taylor_impl(degree: int) -> TruncatedSeries2:
    n = degree + 3
    u = TruncatedSeries2.linear(1, 0, n)
    v = TruncatedSeries2.linear(0, 1, n)
    e_uv = series_exp(TruncatedSeries2.linear(1, 1, n))
    e_u = series_exp(u)
    e_v = series_exp(v)
    num = (u - v) * e_uv - u * e_u + v * e_v
    den = u * v * (e_u - e_v)
    return divide_after_factoring(num, den, ["u", "v", "u-v"])


_F_TAYLOR_CACHE: dict[int, TruncatedSeries2] = {}


def f_taylor(degree: int) -> TruncatedSeries2:
    """Exact rational Taylor series of f(u, v) about (0, 0), total degree <= degree.

    f is the coefficient of the collapsed bracket in Z = X + Y + f(u,v)[X,Y];
    its closed form [(u-v)e^{u+v} - u e^u + v e^v] / [u v (e^u - e^v)] has
    numerator and denominator both divisible by u, v and (u - v), so the
    expansion is obtained by exact deflation followed by series division.
    The result is symmetric in u <-> v and has constant term 1/2.
    """
    if degree < 0:
        raise DomainError("degree must be non-negative")
    if degree not in _F_TAYLOR_CACHE:
        _F_TAYLOR_CACHE[degree] = _f_taylor_impl(degree)
    cached = _F_TAYLOR_CACHE[degree]
    return TruncatedSeries2(cached.max_total_degree, _packed=dict(cached._t))


def log_series_identity_check(x, terms: int) -> tuple[float, float]:
    """(partial sum of 1 - sum_{n=1}^{terms} (1-x)^n/(n(n+1)),  x ln x/(x-1)).

    The two agree as terms grows, for 0 < x < 2; at x = 1 both sides are
    exactly 1.  Used as a numeric oracle for the series identity behind the
    integral form of f.
    """
    x = float(x)
    if not 0.0 < x < 2.0:
        raise DomainError("x outside the series convergence region (0, 2)")
    if terms < 1:
        raise DomainError("terms must be >= 1")
    if x == 1.0:
        return 1.0, 1.0
    q = 1.0 - x
    partial = 1.0
    power = 1.0
    for n in range(1, terms + 1):
        power *= q
        partial -= power / (n * (n + 1))
    return partial, math.log(x) * x / (x - 1.0)


def series2_to_json_dict(s: TruncatedSeries2) -> dict:
    """JSON form {"max_degree": N, "terms": [{"du", "dv", "num", "den"}]},
    integers as decimal strings, terms sorted by (du, dv)."""
    return {
        "max_degree": s.max_total_degree,
        "terms": [
            {"du": i, "dv": j, "num": str(q.numerator), "den": str(q.denominator)}
            for (i, j), q in s.terms()
        ],
    }


def poly3_to_json_dict(p: MultiPoly) -> dict:
    """JSON form {"terms": [{"du", "dv", "dc", "num", "den"}]}, sorted."""
    return {
        "terms": [
            {"du": i, "dv": j, "dc": k, "num": str(q.numerator), "den": str(q.denominator)}
            for (i, j, k), q in p.terms()
        ],
    }
