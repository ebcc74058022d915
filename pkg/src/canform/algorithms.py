"""Named first-order distributed algorithms as structured realizations.

All realizations use the gossip matrix ``W = I - mu*L``. Passing ``mu``
here is the same as scaling the Laplacian by ``mu`` before simulating.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .canonical import CanonicalizationError, CanonicalParams, canonical_realization, canonicalize
from .ratpoly import RationalLike, format_rational, parse_rational
from .realization import StructuredRealization


class UnknownAlgorithm(KeyError):
    pass


class ZeroStepsize(ValueError):
    pass


class MissingParameter(ValueError):
    pass


class Source(enum.Enum):
    PaperUpdateEquations = "update equations"
    LiteratureForm = "literature form"
    CanonicalParamsRow = "canonical parameter row"


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    label: str
    source: Source
    builder: Callable[..., StructuredRealization]
    needs_beta: bool = False


def _nids(alpha, mu, beta=None):
    # state (x^{k+1}, x^k, grad f(y^{k-1})), output y^k = x^{k+1};
    # Wtilde = (I + W)/2 = I - (mu/2) L
    a, m = alpha, mu
    return StructuredRealization(
        A0=[[2, -1, a], [1, 0, 0], [0, 0, 0]],
        A1=[[-m, m / 2, -a * m / 2], [0, 0, 0], [0, 0, 0]],
        B0=[-a, 0, 1],
        B1=[a * m / 2, 0, 0],
        C0=[1, 0, 0],
        C1=[0, 0, 0],
    )


def _exact_diffusion(alpha, mu, beta=None):
    # x1+ = x2 - a*grad(x2);  x2+ = Wbar (x1+ - x1 + x2) = Wbar(-x1 + 2 x2 - a*grad(x2))
    # with the averaged gossip Wbar = (I + W)/2 = I - (mu/2) L, as for NIDS
    a, h = alpha, mu / 2
    return StructuredRealization(
        A0=[[0, 1], [-1, 2]],
        A1=[[0, 0], [h, -2 * h]],
        B0=[-a, -a],
        B1=[0, a * h],
        C0=[0, 1],
        C1=[0, 0],
    )


def _extra(alpha, mu, beta=None):
    # x^{k+2} = (I+W) x^{k+1} - Wtilde x^k - a (grad f(x^{k+1}) - grad f(x^k)),
    # Wtilde = (I+W)/2; same state layout as NIDS
    a, m = alpha, mu
    return StructuredRealization(
        A0=[[2, -1, a], [1, 0, 0], [0, 0, 0]],
        A1=[[-m, m / 2, 0], [0, 0, 0], [0, 0, 0]],
        B0=[-a, 0, 1],
        B1=[0, 0, 0],
        C0=[1, 0, 0],
        C1=[0, 0, 0],
    )


def _diging(alpha, mu, beta=None):
    # x+ = W x - a t;  t+ = W t + grad(x+) - grad(x).  With s = t - grad(x):
    # x+ = W x - a s - a grad(x);  s+ = W (s + grad(x)) - grad(x)
    a, m = alpha, mu
    return StructuredRealization(
        A0=[[1, -a], [0, 1]],
        A1=[[-m, 0], [0, -m]],
        B0=[-a, 0],
        B1=[0, -m],
        C0=[1, 0],
        C1=[0, 0],
    )


def _row(zetas: Callable):
    def build(alpha, mu, beta=None):
        r = canonical_realization(CanonicalParams(alpha, *zetas(alpha, beta)))
        return _scale_lambda(r, mu)
    return build


def _scale_lambda(r: StructuredRealization, mu: Fraction) -> StructuredRealization:
    if mu == 1:
        return r
    return StructuredRealization(
        A0=r.A0, A1=[[x * mu for x in row] for row in r.A1],
        B0=r.B0, B1=[x * mu for x in r.B1],
        C0=r.C0, C1=[x * mu for x in r.C1],
        D0=r.D0, D1=r.D1 * mu,
    )


REGISTRY: dict[str, AlgorithmSpec] = {
    "extra": AlgorithmSpec("extra", "EXTRA", Source.LiteratureForm, _extra),
    "nids": AlgorithmSpec("nids", "NIDS", Source.PaperUpdateEquations, _nids),
    "exact_diffusion": AlgorithmSpec("exact_diffusion", "Exact Diffusion",
                                     Source.PaperUpdateEquations, _exact_diffusion),
    "diging": AlgorithmSpec("diging", "DIGing", Source.LiteratureForm, _diging),
    "asyn_dgm": AlgorithmSpec("asyn_dgm", "AsynDGM", Source.CanonicalParamsRow,
                              _row(lambda a, b: (0, 2, 1, 1))),
    "jakovetic_bI": AlgorithmSpec("jakovetic_bI", "Jakovetic (B = beta I)", Source.CanonicalParamsRow,
                                  _row(lambda a, b: (a * b, 2, 1, 0)), needs_beta=True),
    "jakovetic_bW": AlgorithmSpec("jakovetic_bW", "Jakovetic (B = beta W)", Source.CanonicalParamsRow,
                                  _row(lambda a, b: (a * b, 2, 1 - a * b, 0)), needs_beta=True),
}

ALGORITHM_NAMES = tuple(REGISTRY)


def expected_row(name: str, alpha: RationalLike, beta: Optional[RationalLike] = None) -> tuple[Fraction, ...]:
    """Published (zeta0, zeta1, zeta2, zeta3) for a registry entry."""
    a = parse_rational(alpha)
    b = parse_rational(beta) if beta is not None else None
    half = Fraction(1, 2)
    rows = {
        "extra": (half, 1, 0, 0),
        "nids": (half, 1, 0, half),
        "exact_diffusion": (half, 1, 0, half),
        "diging": (0, 2, 1, 0),
        "asyn_dgm": (0, 2, 1, 1),
    }
    if name in rows:
        return tuple(Fraction(x) for x in rows[name])
    if name in ("jakovetic_bI", "jakovetic_bW"):
        if b is None:
            raise MissingParameter(f"{name} needs beta")
        z2 = 1 if name == "jakovetic_bI" else 1 - a * b
        return (a * b, Fraction(2), Fraction(z2), Fraction(0))
    raise UnknownAlgorithm(name)


def get_algorithm(name: str, alpha: RationalLike, beta: Optional[RationalLike] = None,
                  mu: RationalLike = 1) -> StructuredRealization:
    if name not in REGISTRY:
        raise UnknownAlgorithm(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHM_NAMES)}")
    spec = REGISTRY[name]
    a = parse_rational(alpha)
    if a == 0:
        raise ZeroStepsize("stepsize alpha must be nonzero")
    m = parse_rational(mu)
    b = None
    if spec.needs_beta:
        if beta is None:
            raise MissingParameter(f"{name} needs beta")
        b = parse_rational(beta)
    return spec.builder(a, m, b)


@dataclass(frozen=True)
class TableRow:
    name: str
    label: str
    params: CanonicalParams
    expected: tuple[Fraction, ...]

    @property
    def matches(self) -> bool:
        return self.params.zetas == self.expected


def reproduce_table1(alpha: RationalLike, beta: Optional[RationalLike] = None,
                     registry: Optional[dict] = None) -> list[TableRow]:
    """Canonicalize every registry entry. Rows needing beta are skipped when
    ``beta`` is None. A :class:`CanonicalizationError` is re-raised with the
    algorithm name prepended."""
    reg = REGISTRY if registry is None else registry
    rows = []
    for name, spec in reg.items():
        if spec.needs_beta and beta is None:
            continue
        a = parse_rational(alpha)
        b = parse_rational(beta) if beta is not None else None
        try:
            p = canonicalize(spec.builder(a, Fraction(1), b))
        except CanonicalizationError as exc:
            raise CanonicalizationError(exc.kind, f"{name}: {exc.detail}") from exc
        rows.append(TableRow(name, spec.label, p, expected_row(name, a, b)))
    return rows


def format_table(rows: list[TableRow]) -> str:
    head = f"{'algorithm':<26}{'zeta0':>8}{'zeta1':>8}{'zeta2':>8}{'zeta3':>8}  match"
    out = [head, "-" * len(head)]
    for r in rows:
        z = [format_rational(x) for x in r.params.zetas]
        out.append(f"{r.label:<26}{z[0]:>8}{z[1]:>8}{z[2]:>8}{z[3]:>8}  {'yes' if r.matches else 'NO'}")
    return "\n".join(out)
