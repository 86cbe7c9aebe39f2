"""Pure-Python exact-rational dict kernels.

These are the hot inner loops of the symbolic expansions: products of word-,
operator- and series-indexed tables whose values are (numerator, denominator)
integer pairs.  The compiled twin in _kernels_cy.pyx implements the same five
functions with identical semantics; _kernels.py selects one at import time.

Conventions shared by both twins:

- A rational is a tuple (num, den) with den > 0, gcd(num, den) = 1, num != 0.
  Missing keys mean coefficient zero; zero results are deleted, never stored.
- A word key is a marker-bit integer: 1 is the empty word, each letter is
  appended at the least-significant end (X = 0, Y = 1), so "XY" = 0b101 and
  length = key.bit_length() - 1.
- An operator key packs a word key with a t-degree: (word_key << 6) | t_deg,
  valid while t_deg < 64.
- A bivariate series key packs exponents as (deg_u << 8) | deg_v; a trivariate
  polynomial key packs (deg_u << 16) | (deg_v << 8) | deg_c.  Per-variable
  exponents must stay below 256 so packed keys add like exponent vectors.
"""

from math import gcd

IMPL = "python"


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


def _acc(out, key, c):
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


def dict_scaled_add(acc, src, num, den):
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


def word_mul(a, b, max_len):
    """Concatenation product of two word tables, dropping words longer than max_len."""
    out = {}
    for ea, ca in a.items():
        la = ea.bit_length() - 1
        for eb, cb in b.items():
            lb = eb.bit_length() - 1
            if la + lb > max_len:
                continue
            key = (ea << lb) | (eb - (1 << lb))
            _acc(out, key, rat_mul(ca, cb))
    return out


def op_mul(a, b, max_len):
    """Product of operator tables: words concatenate, t-degrees add."""
    out = {}
    for ka, ca in a.items():
        ea = ka >> 6
        la = ea.bit_length() - 1
        for kb, cb in b.items():
            eb = kb >> 6
            lb = eb.bit_length() - 1
            if la + lb > max_len:
                continue
            key = ((((ea << lb) | (eb - (1 << lb)))) << 6) | ((ka & 63) + (kb & 63))
            _acc(out, key, rat_mul(ca, cb))
    return out


def series2_mul(a, b, max_deg):
    """Truncated product of bivariate series tables (total degree <= max_deg)."""
    out = {}
    for ka, ca in a.items():
        da = (ka >> 8) + (ka & 255)
        for kb, cb in b.items():
            if da + (kb >> 8) + (kb & 255) > max_deg:
                continue
            _acc(out, ka + kb, rat_mul(ca, cb))
    return out


def poly3_mul(a, b):
    """Exact product of trivariate polynomial tables (no truncation)."""
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            _acc(out, ka + kb, rat_mul(ca, cb))
    return out
