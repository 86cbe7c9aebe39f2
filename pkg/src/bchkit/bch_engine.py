"""Free-Lie BCH expansion of Z(X, Y) = ln(e^X e^Y), by two independent routes.

Words are strings over {X, Y} and denote right-nested brackets:
"XXY" means [X, [X, Y]], a single letter means itself, and any word whose last
two letters are equal denotes zero.  Words are linearly dependent (this is the
bracket image, not a Hall basis), so the two expansion routes may produce
different word tables for the same Lie element; equality between them is
checked through evaluation homomorphisms — matrix substitution here, affine
reduction in special_commutator.

Both routes keep exact rational coefficients throughout:

- dynkin_expand organizes Dynkin's word sum as log(e^X e^Y) in the free
  associative algebra followed by the degree-weighted bracketing projection
  (divide each degree-n word by n and read it as a right-nested bracket);
- integral_form_expand expands the adjoint-operator integral
  Z = X + Y - ∫₀¹ Σ_{n≥1} (I - e^{L_X} e^{t L_Y})^n / (n(n+1)) dt · Y
  as truncated operator polynomials in L_X, L_Y with exact t-integration.

The innermost letter pair of every produced word is canonicalized to "XY"
([... [Y, X]] = -[... [X, Y]]; equal-pair endings vanish), which keeps the two
routes' tables comparable term by term at low orders and halves storage.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType

import numpy as np

from bchkit import _kernels as _k
from bchkit.errors import DomainError

DEFAULT_MAX_ORDER = 12


def max_expansion_order() -> int:
    """Configured order cap: BCHKIT_MAX_ORDER env var, default 12."""
    raw = os.environ.get("BCHKIT_MAX_ORDER", "")
    try:
        return int(raw) if raw else DEFAULT_MAX_ORDER
    except ValueError:
        raise DomainError(f"BCHKIT_MAX_ORDER is not an integer: {raw!r}")


def word_to_enc(word: str) -> int:
    enc = 1
    for ch in word:
        if ch == "X":
            enc <<= 1
        elif ch == "Y":
            enc = (enc << 1) | 1
        else:
            raise DomainError(f"invalid letter {ch!r} in word {word!r}")
    return enc


def enc_to_word(enc: int) -> str:
    ln = enc.bit_length() - 1
    return "".join("Y" if (enc >> (ln - 1 - i)) & 1 else "X" for i in range(ln))


@dataclass(frozen=True)
class LieSeries:
    """Rational-weighted words interpreted as right-nested brackets."""

    max_order: int
    terms: MappingProxyType  # word string -> Fraction

    @classmethod
    def from_dict(cls, max_order: int, terms: dict) -> "LieSeries":
        return cls(max_order, MappingProxyType(dict(terms)))

    def order_part(self, n: int) -> dict:
        return {w: c for w, c in self.terms.items() if len(w) == n}

    def to_json_dict(self) -> dict:
        return {
            "max_order": self.max_order,
            "terms": [
                {"word": w, "num": str(c.numerator), "den": str(c.denominator)}
                for w, c in sorted(self.terms.items(), key=lambda wc: (len(wc[0]), wc[0]))
            ],
        }


def _check_order(order: int) -> int:
    cap = max_expansion_order()
    if not 1 <= order <= cap:
        raise DomainError(f"order {order} outside supported range 1..{cap}")
    return order


def _canonical_accumulate(lie: dict, enc: int, num: int, den: int) -> None:
    """Add (num/den)·word into a bracket-word table, canonicalizing the
    innermost pair: drop XX/YY endings, flip a YX ending to XY with a sign."""
    ln = enc.bit_length() - 1
    if ln >= 2:
        last2 = enc & 3
        if last2 == 0 or last2 == 3:
            return
        if last2 == 2:
            enc = (enc & ~2) | 1
            num = -num
    _k.dict_scaled_add(lie, {enc: (num, den)}, 1, 1)


@lru_cache(maxsize=None)
def _dynkin_enc(order: int) -> MappingProxyType:
    fact = [math.factorial(k) for k in range(order + 1)]
    # S = e^X e^Y - 1 truncated at total degree `order`: word X^i Y^j, coeff 1/(i! j!)
    s = {}
    for i in range(order + 1):
        for j in range(order + 1 - i):
            if i + j == 0:
                continue
            s[(1 << (i + j)) | ((1 << j) - 1)] = (1, fact[i] * fact[j])
    # log(1 + S) = sum (-1)^{n-1} S^n / n; S^n has no words shorter than n
    acc: dict = {}
    power = dict(s)
    for n in range(1, order + 1):
        _k.dict_scaled_add(acc, power, 1 if n % 2 else -1, n)
        if n < order:
            power = _k.word_mul(power, s, order)
    # degree-weighted bracketing projection: coeff/|w| on the right-nested bracket
    lie: dict = {}
    for enc, (num, den) in acc.items():
        ln = enc.bit_length() - 1
        _canonical_accumulate(lie, enc, num, den * (ln if ln > 1 else 1))
    return MappingProxyType(lie)


def dynkin_expand(order: int) -> LieSeries:
    """BCH series of ln(e^X e^Y) through the given order, as Dynkin's word sum.

    Exact rationals; order 2 gives {"XY": 1/2}, i.e. (1/2)[X, Y].
    """
    _check_order(order)
    return LieSeries.from_dict(order, {enc_to_word(e): Fraction(*c) for e, c in _dynkin_enc(order).items()})


@lru_cache(maxsize=None)
def _integral_enc(order: int) -> MappingProxyType:
    # Operator words over letters L_X (0), L_Y (1), packed with the t-degree.
    # Applying a length-m operator word to Y gives a length-(m+1) bracket word,
    # so operator words are capped at order - 1.
    maxlen = order - 1
    fact = [math.factorial(k) for k in range(order + 1)]
    e_op = {}
    for a in range(maxlen + 1):
        for b in range(maxlen + 1 - a):
            enc = (1 << (a + b)) | ((1 << b) - 1)
            e_op[(enc << 6) | b] = (1, fact[a] * fact[b])
    # P = I - e^{L_X} e^{t L_Y}: constant term cancels, all words carry >= 1 letter
    p_op = {k: (-n, d) for k, (n, d) in e_op.items() if k != (1 << 6)}
    # sum_{n>=1} P^n / (n(n+1)); P^n has no operator words shorter than n
    acc: dict = {}
    power = dict(p_op)
    for n in range(1, maxlen + 1):
        _k.dict_scaled_add(acc, power, 1, n * (n + 1))
        if n < maxlen:
            power = _k.op_mul(power, p_op, maxlen)
    # integrate t over [0,1] (t^k -> 1/(k+1)), apply to Y, negate;  Z = X + Y - (...)
    lie: dict = {word_to_enc("X"): (1, 1), word_to_enc("Y"): (1, 1)}
    for key, (num, den) in acc.items():
        enc, tdeg = key >> 6, key & 63
        if enc & 1:
            continue  # operator word ends in L_Y: innermost pair becomes [Y, Y] = 0
        _canonical_accumulate(lie, (enc << 1) | 1, -num, den * (tdeg + 1))
    return MappingProxyType(lie)


def integral_form_expand(order: int) -> LieSeries:
    """BCH series via symbolic expansion of the adjoint-operator integral.

    Independent of dynkin_expand (different algebra, different truncation
    argument); the two agree after any evaluation homomorphism.
    """
    _check_order(order)
    return LieSeries.from_dict(order, {enc_to_word(e): Fraction(*c) for e, c in _integral_enc(order).items()})


def evaluate_in_matrices(series: LieSeries, mx, my):
    """Substitute square matrices for X and Y; each word is evaluated as its
    right-nested commutator and the weighted sum is returned.

    Shared suffixes are memoized, so the cost is one commutator per distinct
    suffix rather than per letter of every word.
    """
    mx = np.asarray(mx)
    my = np.asarray(my)
    if mx.shape != my.shape or mx.ndim != 2 or mx.shape[0] != mx.shape[1]:
        raise DomainError(f"matrix shapes {mx.shape} and {my.shape} are not equal square")
    letters = (mx, my)
    memo: dict[int, np.ndarray] = {2: mx, 3: my}

    def bracket(enc: int) -> np.ndarray:
        got = memo.get(enc)
        if got is not None:
            return got
        ln = enc.bit_length() - 1
        head = letters[(enc >> (ln - 1)) & 1]
        rest = bracket((1 << (ln - 1)) | (enc & ((1 << (ln - 1)) - 1)))
        out = head @ rest - rest @ head
        memo[enc] = out
        return out

    total = np.zeros_like(mx, dtype=np.result_type(mx, my, float))
    for word, coeff in series.terms.items():
        total = total + float(coeff) * bracket(word_to_enc(word))
    return total
