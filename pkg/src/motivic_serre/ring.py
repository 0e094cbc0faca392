"""Exact arithmetic in Q[L], its truncations Q[L]/(L-1)^n and the formal class ring.

Elements of K_0(Var_k)_Q that are not polynomials in L are carried as opaque
symbols.  A :class:`FormalClass` is a finite sum ``sum_m m * p_m(L)`` where each
``m`` is a monomial in the symbols (a sorted tuple of names, the empty tuple
being the unit class) and ``p_m`` is an :class:`LPoly`.

Truncated values live in the (L-1)-power basis: a :class:`TruncatedClass` of
modulus power ``n`` stores the coefficients of ``(L-1)^0, ..., (L-1)^(n-1)``.

All values are immutable and kept in canonical form, so ``==`` is structural.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Union

Rational = Union[int, Fraction]
Monomial = tuple  # sorted tuple of symbol names

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class ParseError(ValueError):
    """Malformed serialized input."""


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or an integer string (or a JSON integer) exactly."""
    if isinstance(text, bool):
        raise ParseError(f"malformed rational {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"malformed rational {text!r}")
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ParseError(f"malformed rational {text!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ParseError(f"malformed rational {text!r}: zero denominator")
    return Fraction(int(num), int(den) if den is not None else 1)


def format_rational(x: Rational) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _strip(coeffs: Iterable[Rational]) -> tuple:
    out = [c if type(c) is Fraction else Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


class LPoly:
    """Polynomial in L with rational coefficients, stored densely by degree."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[Rational] = ()):
        object.__setattr__(self, "_c", _strip(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("LPoly is immutable")

    @classmethod
    def from_dict(cls, coefficients: Mapping[int, Rational]) -> "LPoly":
        if not coefficients:
            return cls()
        if min(coefficients) < 0:
            raise ValueError("negative degree")
        dense = [Fraction(0)] * (max(coefficients) + 1)
        for k, v in coefficients.items():
            dense[k] += Fraction(v)
        return cls(dense)

    @classmethod
    def monomial(cls, degree: int, coeff: Rational = 1) -> "LPoly":
        if degree < 0:
            raise ValueError("negative degree")
        return cls([0] * degree + [coeff])

    @classmethod
    def const(cls, c: Rational) -> "LPoly":
        return cls([c])

    @property
    def coeffs(self) -> tuple:
        """Dense coefficient tuple, index = degree, no trailing zeros."""
        return self._c

    @property
    def coefficients(self) -> dict:
        """Sparse view: degree -> nonzero coefficient."""
        return {k: c for k, c in enumerate(self._c) if c != 0}

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    def __eq__(self, other):
        if isinstance(other, LPoly):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == _strip([other])
        return NotImplemented

    def __hash__(self):
        return hash(("LPoly", self._c))

    def __repr__(self):
        return f"LPoly({self})"

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for k, c in enumerate(self._c):
            if c == 0:
                continue
            mono = "" if k == 0 else ("L" if k == 1 else f"L^{k}")
            if mono and c == 1:
                parts.append(mono)
            elif mono and c == -1:
                parts.append("-" + mono)
            else:
                parts.append(format_rational(c) + ("*" + mono if mono else ""))
        return " + ".join(parts).replace("+ -", "- ")

    @staticmethod
    def _coerce(x) -> "LPoly":
        if isinstance(x, LPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return LPoly([x])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._c, other._c
        if len(a) < len(b):
            a, b = b, a
        return LPoly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self):
        return LPoly([-c for c in self._c])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return LPoly([c * other for c in self._c])
        if not isinstance(other, LPoly):
            return NotImplemented
        a, b = self._c, other._c
        if not a or not b:
            return LPoly()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
        return LPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, q: Rational) -> Fraction:
        return eval_lpoly(self, q)


ZERO = LPoly()
ONE = LPoly([1])
L = LPoly([0, 1])
L_MINUS_1 = LPoly([-1, 1])
ONE_MINUS_L = LPoly([1, -1])


def projective_space(dim: int) -> LPoly:
    """Class of P^dim = 1 + L + ... + L^dim; zero for dim < 0."""
    if dim < 0:
        return ZERO
    return LPoly([1] * (dim + 1))


def eval_lpoly(p: LPoly, q: Rational) -> Fraction:
    q = Fraction(q)
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * q + c
    return acc


def lpoly_in_Lminus1_basis(p: LPoly) -> list:
    """Coefficients v with p(L) = sum_k v[k] (L-1)^k."""
    a = p.coeffs
    return [sum((a[k] * comb(k, j) for k in range(j, len(a))), Fraction(0))
            for j in range(len(a))]


def lpoly_from_Lminus1_basis(v: Iterable[Rational]) -> LPoly:
    v = [Fraction(x) for x in v]
    out = [Fraction(0)] * len(v)
    for j, vj in enumerate(v):
        if vj == 0:
            continue
        for i in range(j + 1):
            out[i] += vj * comb(j, i) * (-1) ** (j - i)
    return LPoly(out)


class TruncatedClass:
    """Element of Q[L]/(L-1)^n in the (L-1)-power basis."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Iterable[Rational] = ()):
        if n < 1:
            raise ValueError("modulus power must be >= 1")
        cs = [Fraction(c) for c in coeffs]
        if len(cs) > n:
            raise ValueError(f"{len(cs)} coefficients for modulus power {n}")
        cs += [Fraction(0)] * (n - len(cs))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedClass is immutable")

    @property
    def modulus_power(self) -> int:
        return self.n

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, TruncatedClass):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("TruncatedClass", self.n, self.coeffs))

    def _check(self, other):
        if not isinstance(other, TruncatedClass):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"modulus power mismatch: {self.n} vs {other.n}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return TruncatedClass(self.n, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return TruncatedClass(self.n, [-a for a in self.coeffs])

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TruncatedClass(self.n, [a * other for a in self.coeffs])
        if self._check(other) is NotImplemented:
            return NotImplemented
        n = self.n
        out = [Fraction(0)] * n
        for i, x in enumerate(self.coeffs):
            if x == 0:
                continue
            for j in range(n - i):
                out[i + j] += x * other.coeffs[j]
        return TruncatedClass(n, out)

    __rmul__ = __mul__

    def to_lpoly(self) -> LPoly:
        """Canonical lift of degree < n."""
        return lpoly_from_Lminus1_basis(self.coeffs)

    def evaluate(self, q: Rational) -> Fraction:
        """Exact value of the canonical lift at L = q."""
        t = Fraction(q) - 1
        return sum((c * t ** k for k, c in enumerate(self.coeffs)), Fraction(0))

    def __repr__(self):
        return f"TruncatedClass({self.n}, [{', '.join(map(format_rational, self.coeffs))}])"

    def __str__(self):
        parts = [format_rational(self.coeffs[0])]
        for k in range(1, self.n):
            power = "(L-1)" if k == 1 else f"(L-1)^{k}"
            c = self.coeffs[k]
            parts.append(f"{'-' if c < 0 else '+'} {format_rational(abs(c))}*{power}")
        return " ".join(parts)


def truncate(p: LPoly, n: int) -> TruncatedClass:
    """Image of p in Q[L]/(L-1)^n."""
    if n < 1:
        raise ValueError("modulus power must be >= 1")
    a = p.coeffs
    return TruncatedClass(n, [sum((a[k] * comb(k, j) for k in range(j, len(a))), Fraction(0))
                              for j in range(min(n, len(a)))])


def _monomial(syms: Iterable[str]) -> Monomial:
    syms = tuple(sorted(syms))
    for s in syms:
        if not isinstance(s, str) or not s:
            raise ValueError(f"invalid symbol name {s!r}")
    return syms


class FormalClass:
    """Q[L]-linear combination of symbol monomials (free commutative ring)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Iterable[str], LPoly] | None = None):
        acc: dict = {}
        for syms, p in (terms or {}).items():
            mono = _monomial(syms)
            if not isinstance(p, LPoly):
                p = LPoly._coerce(p)
                if p is NotImplemented:
                    raise TypeError("FormalClass coefficients must be LPoly or rational")
            acc[mono] = acc.get(mono, ZERO) + p
        object.__setattr__(self, "_terms", tuple(sorted((m, p) for m, p in acc.items() if p)))

    def __setattr__(self, name, value):
        raise AttributeError("FormalClass is immutable")

    @classmethod
    def symbol(cls, name: str, coeff: LPoly | Rational = 1) -> "FormalClass":
        return cls({(name,): coeff})

    @classmethod
    def scalar(cls, coeff: LPoly | Rational) -> "FormalClass":
        return cls({(): coeff})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def symbols(self) -> set:
        return {s for m, _ in self._terms for s in m}

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, FormalClass):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction, LPoly)):
            return self == FormalClass.scalar(other)
        return NotImplemented

    def __hash__(self):
        return hash(("FormalClass", self._terms))

    @staticmethod
    def _coerce(x) -> "FormalClass":
        if isinstance(x, FormalClass):
            return x
        if isinstance(x, (int, Fraction, LPoly)):
            return FormalClass.scalar(x)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = dict(self._terms)
        for m, p in other._terms:
            acc[m] = acc.get(m, ZERO) + p
        return FormalClass(acc)

    __radd__ = __add__

    def __neg__(self):
        return FormalClass({m: -p for m, p in self._terms})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, LPoly)):
            return FormalClass({m: p * other for m, p in self._terms})
        if not isinstance(other, FormalClass):
            return NotImplemented
        acc: dict = {}
        for m1, p1 in self._terms:
            for m2, p2 in other._terms:
                m = tuple(sorted(m1 + m2))
                acc[m] = acc.get(m, ZERO) + p1 * p2
        return FormalClass(acc)

    __rmul__ = __mul__

    def __repr__(self):
        return f"FormalClass({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for m, p in self._terms:
            label = "*".join(f"[{s}]" for s in m) or "1"
            out.append(f"{label}*({p})")
        return " + ".join(out)


def formal_add(a: FormalClass, b: FormalClass) -> FormalClass:
    return a + b


def formal_sub(a: FormalClass, b: FormalClass) -> FormalClass:
    return a - b


def formal_mul(a: FormalClass, b: FormalClass) -> FormalClass:
    return a * b


def formal_scale(a: FormalClass, r: Rational | LPoly) -> FormalClass:
    return a * r


class TruncatedFormalClass:
    """Formal class with coefficients in Q[L]/(L-1)^n."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[Iterable[str], TruncatedClass] | None = None):
        if n < 1:
            raise ValueError("modulus power must be >= 1")
        acc: dict = {}
        for syms, t in (terms or {}).items():
            if t.n != n:
                raise ValueError(f"modulus power mismatch: {t.n} vs {n}")
            mono = _monomial(syms)
            acc[mono] = acc[mono] + t if mono in acc else t
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_terms", tuple(sorted((m, t.coeffs) for m, t in acc.items() if t)))

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedFormalClass is immutable")

    @property
    def modulus_power(self) -> int:
        return self.n

    @property
    def terms(self) -> dict:
        return {m: TruncatedClass(self.n, c) for m, c in self._terms}

    def items(self):
        for m, c in self._terms:
            yield m, TruncatedClass(self.n, c)

    def symbols(self) -> set:
        return {s for m, _ in self._terms for s in m}

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, TruncatedFormalClass):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash(("TruncatedFormalClass", self.n, self._terms))

    def __add__(self, other):
        if not isinstance(other, TruncatedFormalClass):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"modulus power mismatch: {self.n} vs {other.n}")
        acc = self.terms
        for m, t in other.items():
            acc[m] = acc[m] + t if m in acc else t
        return TruncatedFormalClass(self.n, acc)

    def __neg__(self):
        return TruncatedFormalClass(self.n, {m: -t for m, t in self.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, r):
        if not isinstance(r, (int, Fraction)):
            return NotImplemented
        return TruncatedFormalClass(self.n, {m: t * r for m, t in self.items()})

    __rmul__ = __mul__

    def reduce(self, n: int) -> "TruncatedFormalClass":
        """Image under Q[L]/(L-1)^self.n -> Q[L]/(L-1)^n for n <= self.n."""
        if not 1 <= n <= self.n:
            raise ValueError(f"cannot reduce modulus power {self.n} to {n}")
        return TruncatedFormalClass(n, {m: TruncatedClass(n, t.coeffs[:n]) for m, t in self.items()})

    def __repr__(self):
        return f"TruncatedFormalClass({self.n}, {self})"

    def __str__(self):
        if not self._terms:
            return " + ".join(["0"] + [f"0*{'(L-1)' if k == 1 else f'(L-1)^{k}'}"
                                       for k in range(1, self.n)])
        return "; ".join(f"{'*'.join(f'[{s}]' for s in m) or '1'}: {t}" for m, t in self.items())


def formal_truncate(a: FormalClass, n: int) -> TruncatedFormalClass:
    return TruncatedFormalClass(n, {m: truncate(p, n) for m, p in a.items()})


# -- serialization -------------------------------------------------------------

def lpoly_to_json(p: LPoly) -> dict:
    return {str(k): format_rational(c) for k, c in p.coefficients.items()}


def lpoly_from_json(obj) -> LPoly:
    if not isinstance(obj, dict):
        raise ParseError(f"lpoly must be an object, got {type(obj).__name__}")
    coeffs = {}
    for key, val in obj.items():
        if not isinstance(key, str) or not re.fullmatch(r"\d+", key.strip()):
            raise ParseError(f"invalid degree {key!r}")
        coeffs[int(key)] = coeffs.get(int(key), Fraction(0)) + parse_rational(val)
    return LPoly.from_dict(coeffs)


def class_to_json(a: FormalClass) -> list:
    return [{"syms": list(m), "lpoly": lpoly_to_json(p)} for m, p in a.items()]


def class_from_json(obj) -> FormalClass:
    if not isinstance(obj, list):
        raise ParseError("class expression must be a list of terms")
    terms: dict = {}
    for i, term in enumerate(obj):
        if not isinstance(term, dict) or "syms" not in term or "lpoly" not in term:
            raise ParseError(f"term {i}: expected keys 'syms' and 'lpoly'")
        syms = term["syms"]
        if not isinstance(syms, list) or not all(isinstance(s, str) and s for s in syms):
            raise ParseError(f"term {i}: 'syms' must be a list of non-empty strings")
        try:
            p = lpoly_from_json(term["lpoly"])
        except ParseError as exc:
            raise ParseError(f"term {i}: {exc}") from None
        mono = tuple(sorted(syms))
        terms[mono] = terms.get(mono, ZERO) + p
    return FormalClass(terms)


def truncated_to_json(value: TruncatedFormalClass) -> dict:
    return {
        "modulus_power": value.n,
        "terms": [{"syms": list(m), "coeffs": [format_rational(c) for c in t.coeffs]}
                  for m, t in value.items()],
    }


def truncated_from_json(obj) -> TruncatedFormalClass:
    if not isinstance(obj, dict) or "modulus_power" not in obj or "terms" not in obj:
        raise ParseError("report must have 'modulus_power' and 'terms'")
    n = obj["modulus_power"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"invalid modulus_power {n!r}")
    terms: dict = {}
    for term in obj["terms"]:
        coeffs = [parse_rational(c) for c in term["coeffs"]]
        if len(coeffs) != n:
            raise ParseError(f"expected {n} coefficients, got {len(coeffs)}")
        mono = tuple(sorted(term["syms"]))
        t = TruncatedClass(n, coeffs)
        terms[mono] = terms[mono] + t if mono in terms else t
    return TruncatedFormalClass(n, terms)
