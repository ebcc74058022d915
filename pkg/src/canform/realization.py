"""Structured state-space realizations ``(A0 + lam*A1, B0 + lam*B1, C0 + lam*C1, D0 + lam*D1)``
and their exact doubly-indexed transfer functions."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .ratpoly import (
    BivarPoly,
    BivarRatFun,
    LambdaPoly,
    RationalLike,
    format_rational,
    parse_rational,
    ratfun_reduce,
)

Matrix = tuple[tuple[Fraction, ...], ...]
Vector = tuple[Fraction, ...]


class SingularTransform(ValueError):
    pass


class RealizationFormatError(ValueError):
    pass


def _vec(v: Sequence[RationalLike]) -> Vector:
    return tuple(parse_rational(x) for x in v)


def _mat(m: Sequence[Sequence[RationalLike]]) -> Matrix:
    return tuple(_vec(row) for row in m)


@dataclass(frozen=True)
class StructuredRealization:
    """Blocks of one agent's update, shared by all agents.

    ``B0``/``B1`` are stored as length-``s`` columns and ``C0``/``C1`` as
    length-``s`` rows. Entries are converted to :class:`Fraction` on
    construction, so ints and ``"p/q"`` strings are accepted.
    """

    A0: Matrix
    A1: Matrix
    B0: Vector
    B1: Vector
    C0: Vector
    C1: Vector
    D0: Fraction = Fraction(0)
    D1: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("A0", "A1"):
            object.__setattr__(self, name, _mat(getattr(self, name)))
        for name in ("B0", "B1", "C0", "C1"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        for name in ("D0", "D1"):
            object.__setattr__(self, name, parse_rational(getattr(self, name)))
        s = len(self.A0)
        if s < 1:
            raise ValueError("state dimension must be positive")
        for name in ("A0", "A1"):
            m = getattr(self, name)
            if len(m) != s or any(len(row) != s for row in m):
                raise ValueError(f"{name} must be {s}x{s}")
        for name in ("B0", "B1", "C0", "C1"):
            if len(getattr(self, name)) != s:
                raise ValueError(f"{name} must have length {s}")

    @property
    def s(self) -> int:
        return len(self.A0)

    def a_of_lambda(self) -> list[list[LambdaPoly]]:
        return [[LambdaPoly.affine(a0, a1) for a0, a1 in zip(r0, r1)]
                for r0, r1 in zip(self.A0, self.A1)]

    def b_of_lambda(self) -> list[LambdaPoly]:
        return [LambdaPoly.affine(b0, b1) for b0, b1 in zip(self.B0, self.B1)]

    def c_of_lambda(self) -> list[LambdaPoly]:
        return [LambdaPoly.affine(c0, c1) for c0, c1 in zip(self.C0, self.C1)]

    def d_of_lambda(self) -> LambdaPoly:
        return LambdaPoly.affine(self.D0, self.D1)


@dataclass(frozen=True)
class ClassDiagnostics:
    state_dim_ok: bool
    passthrough_ok: bool
    single_comm_ok: bool
    messages: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.state_dim_ok and self.passthrough_ok and self.single_comm_ok


# -- exact dense linear algebra over Fractions / LambdaPolys -----------------

def _identity(s: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(s)) for i in range(s))


def _matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return tuple(tuple(sum((a[i][t] * b[t][j] for t in range(k)), Fraction(0))
                       for j in range(m)) for i in range(n))


def _matvec(a, v):
    return tuple(sum((a[i][t] * v[t] for t in range(len(v))), Fraction(0))
                 for i in range(len(a)))


def _vecmat(v, a):
    return tuple(sum((v[t] * a[t][j] for t in range(len(v))), Fraction(0))
                 for j in range(len(a[0])))


def exact_inverse(m: Sequence[Sequence[Fraction]]) -> Matrix:
    """Gauss-Jordan inverse over the rationals."""
    s = len(m)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(s)]
           for i, row in enumerate(m)]
    for col in range(s):
        piv = next((r for r in range(col, s) if aug[r][col] != 0), None)
        if piv is None:
            raise SingularTransform("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(s):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[s:]) for row in aug)


def exact_det(m: Sequence[Sequence[Fraction]]) -> Fraction:
    a = [list(map(Fraction, row)) for row in m]
    s = len(a)
    det = Fraction(1)
    for col in range(s):
        piv = next((r for r in range(col, s) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, s):
            if a[r][col] != 0:
                f = a[r][col] / p
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def _poly_matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = LambdaPoly()
            for t in range(k):
                if not a[i][t].is_zero() and not b[t][j].is_zero():
                    acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def faddeev_leverrier(a: list[list[LambdaPoly]]) -> tuple[list[LambdaPoly], list[list[list[LambdaPoly]]]]:
    """Characteristic polynomial and adjugate of ``zI - A(lam)``.

    Returns ``(c, Ms)`` where ``det(zI - A) = sum_j c[j] z^j`` and
    ``adj(zI - A) = sum_{k=1..s} Ms[k-1] z^(s-k)``. The division by ``k``
    is by an integer and therefore exact on rational coefficients.
    """
    s = len(a)
    c = [LambdaPoly()] * (s + 1)
    c[s] = LambdaPoly.const(1)
    m = [[LambdaPoly() for _ in range(s)] for _ in range(s)]
    ms = []
    for k in range(1, s + 1):
        am = _poly_matmul(a, m)
        m = [[am[i][j] + (c[s - k + 1] if i == j else 0) for j in range(s)] for i in range(s)]
        ms.append(m)
        am = _poly_matmul(a, m)
        tr = LambdaPoly()
        for i in range(s):
            tr = tr + am[i][i]
        c[s - k] = tr * Fraction(-1, k)
    return c, ms


def unreduced_transfer_function(r: StructuredRealization) -> tuple[BivarPoly, BivarPoly]:
    """``(C adj(zI-A) B + D det(zI-A), det(zI-A))`` before any cancellation."""
    c, ms = faddeev_leverrier(r.a_of_lambda())
    bl, cl = r.b_of_lambda(), r.c_of_lambda()
    s = r.s
    den = BivarPoly(c)
    num_coeffs = [LambdaPoly()] * s
    for k, m in enumerate(ms, start=1):
        acc = LambdaPoly()
        for i in range(s):
            for j in range(s):
                if not m[i][j].is_zero():
                    acc = acc + cl[i] * m[i][j] * bl[j]
        num_coeffs[s - k] = acc
    num = BivarPoly(num_coeffs) + den * r.d_of_lambda()
    return num, den


def transfer_function(r: StructuredRealization) -> BivarRatFun:
    return ratfun_reduce(*unreduced_transfer_function(r))


def similarity_transform(r: StructuredRealization, t: Sequence[Sequence[RationalLike]]) -> StructuredRealization:
    """State change ``xi -> T xi``."""
    t = _mat(t)
    if len(t) != r.s or any(len(row) != r.s for row in t):
        raise ValueError(f"transform must be {r.s}x{r.s}")
    if exact_det(t) == 0:
        raise SingularTransform("transform has zero determinant")
    ti = exact_inverse(t)
    return StructuredRealization(
        A0=_matmul(_matmul(t, r.A0), ti),
        A1=_matmul(_matmul(t, r.A1), ti),
        B0=_matvec(t, r.B0),
        B1=_matvec(t, r.B1),
        C0=_vecmat(r.C0, ti),
        C1=_vecmat(r.C1, ti),
        D0=r.D0,
        D1=r.D1,
    )


def validate_class(r: StructuredRealization) -> ClassDiagnostics:
    msgs = []
    state_ok = r.s <= 2
    if not state_ok:
        msgs.append(f"state dimension {r.s} exceeds 2 per coordinate")
    pass_ok = r.D0 == 0 and r.D1 == 0
    if not pass_ok:
        msgs.append("nonzero pass-through D0/D1")
    b1_zero = all(x == 0 for x in r.B1)
    c1_zero = all(x == 0 for x in r.C1)
    comm_ok = b1_zero or c1_zero
    if not comm_ok:
        msgs.append("B1 and C1 both nonzero: two sequential rounds of communication per iteration")
    return ClassDiagnostics(state_ok, pass_ok, comm_ok, tuple(msgs))


# -- realization files -------------------------------------------------------
#
#   [realization]
#   s = 2
#   A0 = 1 1/2; 0 1
#   B0 = -1/10 0
#   D0 = 0

def _fmt_vec(v) -> str:
    return " ".join(format_rational(x) for x in v)


def _fmt_mat(m) -> str:
    return "; ".join(_fmt_vec(row) for row in m)


def _parse_vec(text: str) -> Vector:
    return tuple(parse_rational(tok) for tok in text.replace(",", " ").split())


def _parse_mat(text: str) -> Matrix:
    return tuple(_parse_vec(row) for row in text.split(";") if row.strip())


def realization_to_text(r: StructuredRealization) -> str:
    lines = ["[realization]", f"s = {r.s}"]
    lines += [f"A0 = {_fmt_mat(r.A0)}", f"A1 = {_fmt_mat(r.A1)}"]
    for name in ("B0", "B1", "C0", "C1"):
        lines.append(f"{name} = {_fmt_vec(getattr(r, name))}")
    lines += [f"D0 = {format_rational(r.D0)}", f"D1 = {format_rational(r.D1)}"]
    return "\n".join(lines) + "\n"


def realization_from_text(text: str) -> StructuredRealization:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string(text)
        sec = cp["realization"]
        s = int(sec["s"])
        kw = {}
        for name in ("A0", "A1"):
            kw[name] = _parse_mat(sec.get(name, ""))
        for name in ("B0", "B1", "C0", "C1"):
            kw[name] = _parse_vec(sec.get(name, ""))
        for name in ("D0", "D1"):
            kw[name] = parse_rational(sec.get(name, "0"))
    except (KeyError, ValueError, configparser.Error) as exc:
        raise RealizationFormatError(f"bad realization file: {exc}") from exc
    # omitted lam-blocks default to zero
    for name in ("A1",):
        if not kw[name]:
            kw[name] = tuple((Fraction(0),) * s for _ in range(s))
    for name in ("B1", "C1"):
        if not kw[name]:
            kw[name] = (Fraction(0),) * s
    try:
        r = StructuredRealization(**kw)
    except ValueError as exc:
        raise RealizationFormatError(str(exc)) from exc
    if r.s != s:
        raise RealizationFormatError(f"declared s={s} but blocks are {r.s}-dimensional")
    return r


def load_realization(path) -> StructuredRealization:
    return realization_from_text(Path(path).read_text())


def save_realization(r: StructuredRealization, path) -> None:
    Path(path).write_text(realization_to_text(r))
