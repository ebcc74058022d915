"""Exact rationals, polynomials in lambda, bivariate polynomials in (z, lambda)
and reduced rational functions built from them.

Scalars are :class:`fractions.Fraction`. A :class:`LambdaPoly` is a polynomial
in the Laplacian eigenvalue ``lam`` with rational coefficients; a
:class:`BivarPoly` is a polynomial in the shift variable ``z`` whose
coefficients are ``LambdaPoly`` values. Everything is immutable.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Fraction
RationalLike = Union[int, Fraction, str]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class ZeroDenominator(ZeroDivisionError):
    pass


class PoleAtEvaluationPoint(ArithmeticError):
    pass


def parse_rational(text: RationalLike) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``. Decimal strings are rejected on purpose."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise TypeError(f"cannot parse {type(text).__name__} as a rational")
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational literal (expected p/q or p): {text!r}")
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDenominator(f"zero denominator in {text!r}")
    return Fraction(int(m.group(1)), den)


def format_rational(q: RationalLike) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, str)):
        return parse_rational(c)
    raise TypeError(f"exact coefficient required, got {type(c).__name__}")


class LambdaPoly:
    """Univariate polynomial in lambda, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[RationalLike] = ()):
        cs = [_as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("LambdaPoly is immutable")

    @classmethod
    def const(cls, c: RationalLike) -> "LambdaPoly":
        return cls((c,))

    @classmethod
    def lam(cls) -> "LambdaPoly":
        return cls((0, 1))

    @classmethod
    def affine(cls, c0: RationalLike, c1: RationalLike) -> "LambdaPoly":
        """``c0 + c1*lam``, the shape of every block entry ``X0 + lam*X1``."""
        return cls((c0, c1))

    @property
    def degree(self) -> int:
        # zero polynomial has degree -1
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LambdaPoly.const(other)
        if not isinstance(other, LambdaPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("LambdaPoly", self.coeffs))

    def __repr__(self):
        return f"LambdaPoly({[format_rational(c) for c in self.coeffs]})"

    def __str__(self):
        return _format_poly(self.coeffs, "lam")

    def __neg__(self):
        return LambdaPoly(-c for c in self.coeffs)

    def __add__(self, other):
        other = _lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return LambdaPoly(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        if self.is_zero() or other.is_zero():
            return LambdaPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return LambdaPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = LambdaPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def divmod(self, other: "LambdaPoly") -> tuple["LambdaPoly", "LambdaPoly"]:
        if other.is_zero():
            raise ZeroDenominator("division by the zero polynomial")
        rem = list(self.coeffs)
        dq = other.degree
        q = [Fraction(0)] * max(len(rem) - dq, 0)
        inv_lc = 1 / other.lc()
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * inv_lc
            if c == 0:
                continue
            q[k - dq] = c
            for j, b in enumerate(other.coeffs):
                rem[k - dq + j] -= c * b
        return LambdaPoly(q), LambdaPoly(rem[:dq] if dq > 0 else ())

    def exact_div(self, other: "LambdaPoly") -> "LambdaPoly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def monic(self) -> "LambdaPoly":
        if self.is_zero():
            return self
        return self * (1 / self.lc())

    def __call__(self, lam0):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * lam0 + (c if isinstance(lam0, Fraction) else float(c))
        return acc

    def to_list(self) -> list[str]:
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_list(cls, items: Sequence[RationalLike]) -> "LambdaPoly":
        return cls(parse_rational(x) for x in items)


def _lift(x) -> LambdaPoly:
    if isinstance(x, LambdaPoly):
        return x
    return LambdaPoly.const(x)


def lambda_gcd(a: LambdaPoly, b: LambdaPoly) -> LambdaPoly:
    """Monic gcd over Q (Euclid); gcd(0, 0) = 0."""
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


def _format_poly(coeffs: Sequence, var: str) -> str:
    terms = []
    for k, c in enumerate(coeffs):
        if isinstance(c, LambdaPoly):
            if c.is_zero():
                continue
            body = str(c)
            if len([x for x in c.coeffs if x != 0]) > 1 and k > 0:
                body = f"({body})"
        else:
            if c == 0:
                continue
            body = format_rational(c)
        if k == 0:
            terms.append(body)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            if body == "1":
                terms.append(mono)
            elif body == "-1":
                terms.append(f"-{mono}")
            else:
                terms.append(f"{body}*{mono}")
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


class BivarPoly:
    """Polynomial in z with LambdaPoly coefficients, lowest z-power first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_lift(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("BivarPoly is immutable")

    @classmethod
    def const(cls, c) -> "BivarPoly":
        return cls((_lift(c),))

    @classmethod
    def z(cls) -> "BivarPoly":
        return cls((LambdaPoly(), LambdaPoly.const(1)))

    @classmethod
    def from_nested(cls, rows: Sequence[Sequence[RationalLike]]) -> "BivarPoly":
        """``rows[k][j]`` is the coefficient of ``z^k lam^j``."""
        return cls(LambdaPoly.from_list(r) for r in rows)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lambda_degree(self) -> int:
        return max((c.degree for c in self.coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> LambdaPoly:
        return self.coeffs[-1] if self.coeffs else LambdaPoly()

    def coeff(self, k: int) -> LambdaPoly:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else LambdaPoly()

    def __eq__(self, other):
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("BivarPoly", self.coeffs))

    def __repr__(self):
        return f"BivarPoly({[c.to_list() for c in self.coeffs]})"

    def __str__(self):
        return _format_poly(self.coeffs, "z")

    def __neg__(self):
        return BivarPoly(-c for c in self.coeffs)

    def __add__(self, other):
        other = _lift_bivar(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return BivarPoly(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_lift_bivar(other))

    def __rsub__(self, other):
        return _lift_bivar(other) - self

    def __mul__(self, other):
        if isinstance(other, (LambdaPoly, int, Fraction)):
            other = _lift(other)
            return BivarPoly(c * other for c in self.coeffs)
        if not isinstance(other, BivarPoly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return BivarPoly()
        out = [LambdaPoly()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return BivarPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = BivarPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, k: int) -> "BivarPoly":
        """Multiply by ``z^k``."""
        if self.is_zero():
            return self
        return BivarPoly((LambdaPoly(),) * k + self.coeffs)

    def content(self) -> LambdaPoly:
        g = LambdaPoly()
        for c in self.coeffs:
            g = lambda_gcd(g, c)
            if g.degree == 0:
                break
        return g

    def divide_lambda(self, c: LambdaPoly) -> "BivarPoly":
        return BivarPoly(x.exact_div(c) for x in self.coeffs)

    def primitive_part(self) -> "BivarPoly":
        if self.is_zero():
            return self
        return self.divide_lambda(self.content())

    def prem(self, other: "BivarPoly") -> "BivarPoly":
        """Pseudo-remainder: ``lc(other)^k * self mod other`` without fractions in lam."""
        if other.is_zero():
            raise ZeroDenominator("pseudo-division by zero")
        r = self
        b_lc = other.lc()
        db = other.degree
        while not r.is_zero() and r.degree >= db:
            r = r * b_lc - other.shift(r.degree - db) * r.lc()
        return r

    def exact_div(self, other: "BivarPoly") -> "BivarPoly":
        """Quotient in Q[lam][z]; raises when ``other`` does not divide exactly."""
        if other.is_zero():
            raise ZeroDenominator("division by the zero polynomial")
        r = self
        db = other.degree
        q = [LambdaPoly()] * max(self.degree - db + 1, 0)
        while not r.is_zero() and r.degree >= db:
            k = r.degree - db
            c = r.lc().exact_div(other.lc())
            q[k] = c
            r = r - other.shift(k) * c
        if not r.is_zero():
            raise ArithmeticError("inexact bivariate division")
        return BivarPoly(q)

    def at_lambda(self, lam0) -> list:
        """Coefficients in z after substituting ``lam = lam0``."""
        return [c(lam0) for c in self.coeffs]

    def __call__(self, z0, lam0):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z0 + c(lam0)
        return acc

    def to_list(self) -> list[list[str]]:
        return [c.to_list() for c in self.coeffs]


def _lift_bivar(x) -> BivarPoly:
    if isinstance(x, BivarPoly):
        return x
    return BivarPoly.const(x)


def _normalize_gcd(g: BivarPoly) -> BivarPoly:
    if g.degree <= 0:
        return BivarPoly.const(1)
    g = g.primitive_part()
    return g * (1 / g.lc().lc())


def poly_gcd_z(p: BivarPoly, q: BivarPoly) -> BivarPoly:
    """GCD in Q(lam)[z] via the primitive pseudo-remainder sequence.

    Polynomials in lam alone are units in that ring, so a constant-in-z gcd
    is returned as 1. The result is primitive with a monic leading lambda
    coefficient.
    """
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    if p.is_zero():
        return _normalize_gcd(q)
    if q.is_zero():
        return _normalize_gcd(p)
    a, b = p.primitive_part(), q.primitive_part()
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero():
        r = a.prem(b)
        a, b = b, r.primitive_part()
    return _normalize_gcd(a)


class BivarRatFun:
    """Reduced ``num/den``; build instances with :func:`ratfun_reduce`.

    Two equal rational functions always have identical ``(num, den)``, so
    ``==`` is exact equality of functions.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: BivarPoly, den: BivarPoly):
        if den.is_zero():
            raise ZeroDenominator("denominator is the zero polynomial")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("BivarRatFun is immutable")

    def __eq__(self, other):
        if not isinstance(other, BivarRatFun):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"BivarRatFun(num={self.num!r}, den={self.den!r})"

    def __str__(self):
        return f"({self.num}) / ({self.den})"

    def is_reduced(self) -> bool:
        return ratfun_reduce(self.num, self.den) == self

    def to_dict(self) -> dict:
        return {"num": self.num.to_list(), "den": self.den.to_list()}


def ratfun_reduce(num: BivarPoly, den: BivarPoly) -> BivarRatFun:
    """Cancel the z-gcd and common lam-content; normalize the leading
    rational coefficient of ``den`` to 1.

    When the leading z-coefficient of the result is a constant in lam this
    makes ``den`` monic in z.
    """
    if den.is_zero():
        raise ZeroDenominator("denominator is the zero polynomial")
    if num.is_zero():
        return BivarRatFun(BivarPoly(), BivarPoly.const(1))
    g = poly_gcd_z(num, den)
    if g.degree > 0:
        num, den = num.exact_div(g), den.exact_div(g)
    c = lambda_gcd(num.content(), den.content())
    if c.degree > 0:
        num, den = num.divide_lambda(c), den.divide_lambda(c)
    scale = 1 / den.lc().lc()
    return BivarRatFun(num * scale, den * scale)


def ratfun_eval(f: BivarRatFun, z0: complex, lam0: float, tol: float = 1e-12) -> complex:
    d = complex(f.den(complex(z0), float(lam0)))
    if abs(d) <= tol:
        raise PoleAtEvaluationPoint(f"denominator vanishes at z={z0}, lam={lam0}")
    return complex(f.num(complex(z0), float(lam0))) / d
