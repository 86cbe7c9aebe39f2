# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of _kernels_py.

Same five functions, same dict/tuple data model, same results bit for bit.
Word and packed keys fit in C integers at the supported expansion orders
(order <= 57 keeps word keys below 2^58 and packed operator keys below 2^63);
coefficients stay arbitrary-precision Python ints.
"""

from math import gcd

IMPL = "cython"


def rat_add(a, b):
    """Sum of two rationals; None when the sum is zero."""
    n = a[0] * b[1] + b[0] * a[1]
    if n == 0:
        return None
    d = a[1] * b[1]
    g = gcd(n, d)
    return (n // g, d // g)


def rat_mul(a, b):
    n = a[0] * b[0]
    d = a[1] * b[1]
    g = gcd(n, d)
    return (n // g, d // g)


cdef inline void _acc(dict out, object key, object c):
    prev = out.get(key)
    if prev is None:
        out[key] = c
        return
    n = prev[0] * c[1] + c[0] * prev[1]
    if n == 0:
        del out[key]
        return
    d = prev[1] * c[1]
    g = gcd(n, d)
    out[key] = (n // g, d // g)


def dict_scaled_add(dict acc, dict src, num, den):
    """In place acc += (num/den) * src.  Key-type agnostic."""
    if num == 0:
        return acc
    if den < 0:
        num, den = -num, -den
    g = gcd(num, den)
    scale = (num // g, den // g)
    for key, c in src.items():
        _acc(acc, key, rat_mul(c, scale))
    return acc


def word_mul(dict a, dict b, long long max_len):
    """Concatenation product of two word tables, dropping words longer than max_len."""
    cdef dict out = {}
    cdef long long ea, eb, la, lb, key
    for ka, ca in a.items():
        ea = ka
        la = ea.bit_length() - 1
        for kb, cb in b.items():
            eb = kb
            lb = eb.bit_length() - 1
            if la + lb > max_len:
                continue
            key = (ea << lb) | (eb - (1LL << lb))
            _acc(out, key, rat_mul(ca, cb))
    return out


def op_mul(dict a, dict b, long long max_len):
    """Product of operator tables: words concatenate, t-degrees add."""
    cdef dict out = {}
    cdef long long ka, kb, ea, eb, la, lb, key
    for pka, ca in a.items():
        ka = pka
        ea = ka >> 6
        la = ea.bit_length() - 1
        for pkb, cb in b.items():
            kb = pkb
            eb = kb >> 6
            lb = eb.bit_length() - 1
            if la + lb > max_len:
                continue
            key = ((((ea << lb) | (eb - (1LL << lb)))) << 6) | ((ka & 63) + (kb & 63))
            _acc(out, key, rat_mul(ca, cb))
    return out


def series2_mul(dict a, dict b, long long max_deg):
    """Truncated product of bivariate series tables (total degree <= max_deg)."""
    cdef dict out = {}
    cdef long long ka, kb, da
    for pka, ca in a.items():
        ka = pka
        da = (ka >> 8) + (ka & 255)
        for pkb, cb in b.items():
            kb = pkb
            if da + (kb >> 8) + (kb & 255) > max_deg:
                continue
            _acc(out, ka + kb, rat_mul(ca, cb))
    return out


def poly3_mul(dict a, dict b):
    """Exact product of trivariate polynomial tables (no truncation)."""
    cdef dict out = {}
    cdef long long ka, kb
    for pka, ca in a.items():
        ka = pka
        for pkb, cb in b.items():
            kb = pkb
            _acc(out, ka + kb, rat_mul(ca, cb))
    return out
