"""Five-parameter canonical form: realization, transfer function,
canonicalization by coefficient matching, technical conditions, optimal
fixed points and the single-state impossibility certificate."""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .graph import LaplacianGraph, as_laplacian_graph
from .ratpoly import (
    BivarPoly,
    BivarRatFun,
    LambdaPoly,
    format_rational,
    parse_rational,
    ratfun_reduce,
)
from .realization import StructuredRealization, exact_det, transfer_function


class WrongStateDimension(ValueError):
    pass


class NonzeroPassthrough(ValueError):
    pass


class GradientsNotBalanced(ValueError):
    pass


class T1Violated(ValueError):
    pass


class T2Violated(ValueError):
    pass


@dataclass(frozen=True)
class CanonicalParams:
    alpha: Fraction
    zeta0: Fraction
    zeta1: Fraction
    zeta2: Fraction
    zeta3: Fraction

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, parse_rational(getattr(self, f.name)))

    @classmethod
    def from_tuple(cls, alpha, zetas) -> "CanonicalParams":
        return cls(alpha, *zetas)

    @property
    def zetas(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.zeta0, self.zeta1, self.zeta2, self.zeta3)

    def as_tuple(self) -> tuple[Fraction, ...]:
        return (self.alpha,) + self.zetas

    def t1_valid(self) -> bool:
        return self.alpha != 0

    def zeta_str(self) -> str:
        return "(" + ", ".join(format_rational(z) for z in self.zetas) + ")"

    def __str__(self):
        return f"alpha = {format_rational(self.alpha)}\nzeta = {self.zeta_str()}"


@dataclass(frozen=True)
class EtaCoefficients:
    eta1: Fraction
    eta2: Fraction
    eta3: Fraction
    eta4: Fraction
    eta5: Fraction
    eta6: Fraction
    eta7: Fraction
    eta8: Fraction
    eta9: Fraction
    eta10: Fraction
    eta11: Fraction
    eta12: Fraction

    def as_tuple(self) -> tuple[Fraction, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))


class ErrorKind(enum.Enum):
    NotStrictlyProper = "NotStrictlyProper"
    DegreeTooHighInZ = "DegreeTooHighInZ"
    DegreeTooHighInLambda = "DegreeTooHighInLambda"
    DoubleCommunication = "DoubleCommunication"
    NoPoleAtOne = "NoPoleAtOne"
    NoZeroAtOne = "NoZeroAtOne"
    ZeroGain = "ZeroGain"


class CanonicalizationError(ValueError):
    def __init__(self, kind: ErrorKind, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind.value}: {detail}" if detail else kind.value)


def canonical_realization(p: CanonicalParams) -> StructuredRealization:
    a, z0, z1, z2, z3 = p.as_tuple()
    return StructuredRealization(
        A0=[[1, z0], [0, 1]],
        A1=[[-z1, z2], [-1, 0]],
        B0=[-a, 0],
        B1=[0, 0],
        C0=[1, 0],
        C1=[-z3, 0],
    )


def alternate_realization(p: CanonicalParams) -> StructuredRealization:
    """Same transfer function as :func:`canonical_realization`, with the
    ``zeta3`` term moved from the output map into the input map."""
    a, z0, z1, z2, z3 = p.as_tuple()
    return StructuredRealization(
        A0=[[1, z0], [0, 1]],
        A1=[[-z1, z2], [-1, 0]],
        B0=[-a, 0],
        B1=[a * z3, 0],
        C0=[1, 0],
        C1=[0, 0],
    )


def canonical_transfer_function(p: CanonicalParams) -> BivarRatFun:
    """``-a(1 - z3*lam)(z-1) / ((z-1)(z-1+z1*lam) + lam(z0 + z2*lam))``."""
    a, z0, z1, z2, z3 = p.as_tuple()
    gain = LambdaPoly((-a, a * z3))
    num = BivarPoly((-gain, gain))
    den = BivarPoly((
        LambdaPoly((1, z0 - z1, z2)),
        LambdaPoly((-2, z1)),
        LambdaPoly((1,)),
    ))
    return ratfun_reduce(num, den)


def _require_two_state(r: StructuredRealization):
    if r.s != 2:
        raise WrongStateDimension(f"expected s=2, got s={r.s}")
    if r.D0 != 0 or r.D1 != 0:
        raise NonzeroPassthrough("D0 and D1 must be zero")


def eta_coefficients(r: StructuredRealization) -> EtaCoefficients:
    """Closed-form numerator/denominator coefficients of a 2-state realization."""
    _require_two_state(r)
    (a1, a2), (a3, a4) = r.A0
    (a5, a6), (a7, a8) = r.A1
    b1, b2 = r.B0
    b3, b4 = r.B1
    c1, c2 = r.C0
    c3, c4 = r.C1
    return EtaCoefficients(
        eta1=b1 * c1 + b2 * c2,
        eta2=b1 * c3 + b3 * c1 + b2 * c4 + b4 * c2,
        eta3=b3 * c3 + b4 * c4,
        eta4=-a1 * b2 * c2 + a2 * b2 * c1 + a3 * b1 * c2 - a4 * b1 * c1,
        eta5=(a2 * b2 * c3 - a1 * b4 * c2 - a1 * b2 * c4 + a2 * b4 * c1
              + a3 * b1 * c4 + a3 * b3 * c2 - a4 * b1 * c3 - a4 * b3 * c1
              - a5 * b2 * c2 + a6 * b2 * c1 + a7 * b1 * c2 - a8 * b1 * c1),
        eta6=(a2 * b4 * c3 - a1 * b4 * c4 + a3 * b3 * c4 - a4 * b3 * c3
              - a5 * b2 * c4 - a5 * b4 * c2 + a6 * b2 * c3 + a6 * b4 * c1
              + a7 * b1 * c4 + a7 * b3 * c2 - a8 * b1 * c3 - a8 * b3 * c1),
        eta7=a6 * b4 * c3 - a5 * b4 * c4 + a7 * b3 * c4 - a8 * b3 * c3,
        eta8=-(a1 + a4),
        eta9=-(a5 + a8),
        eta10=a1 * a4 - a2 * a3,
        eta11=a1 * a8 - a2 * a7 - a3 * a6 + a4 * a5,
        eta12=a5 * a8 - a6 * a7,
    )


def template_coefficients(f: BivarRatFun) -> EtaCoefficients:
    """Read the twelve template coefficients off a reduced transfer function.

    A denominator of z-degree below 2 is lifted by ``(z-1)`` factors first:
    the template numerator only carries ``(z-1)`` as its z-factor, so that is
    the only factor that can have been cancelled.
    """
    num, den = f.num, f.den
    if not num.is_zero() and num.degree >= den.degree:
        raise CanonicalizationError(
            ErrorKind.NotStrictlyProper,
            f"numerator z-degree {num.degree} >= denominator z-degree {den.degree}")
    if den.degree > 2:
        raise CanonicalizationError(
            ErrorKind.DegreeTooHighInZ, f"denominator z-degree {den.degree} > 2")
    if den.degree < 2:
        lift = BivarPoly((-1, 1)) ** (2 - den.degree)
        num, den = num * lift, den * lift
    if den.lc().degree > 0:
        raise CanonicalizationError(
            ErrorKind.DegreeTooHighInLambda, "denominator is not monic in z")
    for poly, k, cap, what in ((den, 1, 1, "denominator"), (den, 0, 2, "denominator"),
                               (num, 1, 2, "numerator"), (num, 0, 3, "numerator")):
        if poly.coeff(k).degree > cap:
            raise CanonicalizationError(
                ErrorKind.DegreeTooHighInLambda,
                f"{what} z^{k} coefficient has lambda-degree {poly.coeff(k).degree} > {cap}")
    n1, n0, d1, d0 = num.coeff(1), num.coeff(0), den.coeff(1), den.coeff(0)
    return EtaCoefficients(
        n1.coeff(0), n1.coeff(1), n1.coeff(2),
        n0.coeff(0), n0.coeff(1), n0.coeff(2), n0.coeff(3),
        d1.coeff(0), d1.coeff(1),
        d0.coeff(0), d0.coeff(1), d0.coeff(2),
    )


def params_from_transfer_function(f: BivarRatFun) -> CanonicalParams:
    e = template_coefficients(f)
    if e.eta3 != 0 or e.eta7 != 0:
        raise CanonicalizationError(
            ErrorKind.DoubleCommunication,
            f"eta3={format_rational(e.eta3)}, eta7={format_rational(e.eta7)}")
    if e.eta8 != -2 or e.eta10 != 1:
        raise CanonicalizationError(
            ErrorKind.NoPoleAtOne,
            f"eta8={format_rational(e.eta8)} (need -2), eta10={format_rational(e.eta10)} (need 1)")
    if e.eta1 + e.eta4 != 0 or e.eta2 + e.eta5 != 0 or e.eta6 != 0:
        raise CanonicalizationError(ErrorKind.NoZeroAtOne, "numerator lacks the factor (z-1)")
    if e.eta1 == 0:
        raise CanonicalizationError(ErrorKind.ZeroGain, "eta1 = 0")
    return CanonicalParams(-e.eta1, e.eta9 + e.eta11, e.eta9, e.eta12, -e.eta2 / e.eta1)


def canonicalize(r: StructuredRealization) -> CanonicalParams:
    """Canonical parameters of ``r``; raises :class:`CanonicalizationError`.

    Works only through the reduced transfer function, so any realization of
    the same transfer function (any state dimension) gives the same answer.
    """
    return params_from_transfer_function(transfer_function(r))


def equivalent(r1: StructuredRealization, r2: StructuredRealization) -> bool:
    try:
        return canonicalize(r1) == canonicalize(r2)
    except CanonicalizationError:
        return transfer_function(r1) == transfer_function(r2)


# -- technical conditions ----------------------------------------------------

@dataclass(frozen=True)
class TechnicalReport:
    t1: bool
    t2: bool
    t3: bool
    details: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.t1 and self.t2 and self.t3


def _t2_holds(p: CanonicalParams, g: LaplacianGraph, tol: float = 1e-9) -> tuple[bool, str]:
    z0, z2 = p.zeta0, p.zeta2
    if z0 == 0 and z2 == 0:
        return False, "zeta0 = zeta2 = 0: operator vanishes on the disagreement subspace"
    if z2 == 0 or z0 == 0:
        return True, "zeta0 + zeta2*lam has no positive root"
    root = -z0 / z2
    if root <= 0:
        return True, "zeta0 + zeta2*lam has no positive root"
    if g.L_exact is not None:
        shifted = [[x - (root if i == j else 0) for j, x in enumerate(row)]
                   for i, row in enumerate(g.L_exact)]
        if exact_det(shifted) == 0:
            return False, f"lam = {format_rational(root)} is a Laplacian eigenvalue (exact)"
        return True, f"lam = {format_rational(root)} is not a Laplacian eigenvalue (exact)"
    vals = float(z0) + float(z2) * g.nonzero_eigenvalues()
    bad = np.flatnonzero(np.abs(vals) <= tol * max(1.0, abs(float(z0))))
    if bad.size:
        return False, f"zeta0 + zeta2*lam = 0 at lam = {g.eigenvalues[1 + bad[0]]:.12g}"
    return True, "zeta0 + zeta2*lam nonzero on all nonzero eigenvalues"


def check_technical_conditions(p: CanonicalParams, L, w0_sum=None) -> TechnicalReport:
    g = as_laplacian_graph(L)
    details = []
    t1 = p.alpha != 0
    details.append("T1 alpha != 0" if t1 else "T1 violated: alpha = 0")
    t2, why = _t2_holds(p, g)
    details.append(("T2 " if t2 else "T2 violated: ") + why)
    if p.zeta0 == 0:
        t3 = True
        details.append("T3 zeta0 = 0")
    else:
        if w0_sum is None:
            w0_sum = [0]
        vals = list(np.ravel(np.asarray(w0_sum, dtype=object)))
        if all(isinstance(v, (int, Fraction)) for v in vals):
            t3 = all(v == 0 for v in vals)
        else:
            t3 = float(np.linalg.norm(np.asarray(vals, dtype=float))) <= 1e-12
        details.append("T3 sum of w0 is zero" if t3 else "T3 violated: zeta0 != 0 and sum of w0 != 0")
    return TechnicalReport(t1, t2, t3, tuple(details))


# -- fixed points ------------------------------------------------------------

@dataclass(frozen=True)
class FixedPoint:
    """Per-agent arrays of shape ``(n, d)``."""

    x: np.ndarray
    w: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    y: np.ndarray
    u: np.ndarray
    residual: float


def construct_fixed_point(p: CanonicalParams, L, x_star, grads_at_xstar) -> FixedPoint:
    g = as_laplacian_graph(L)
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    u = np.asarray(grads_at_xstar, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    n, d = u.shape
    if n != g.n or d != x_star.shape[0]:
        raise ValueError(f"gradients have shape {u.shape}, expected ({g.n}, {x_star.shape[0]})")
    if np.linalg.norm(u.sum(axis=0)) > 1e-9:
        raise GradientsNotBalanced(f"sum of gradients is {u.sum(axis=0)}")
    if p.alpha == 0:
        raise T1Violated("alpha = 0")
    t2, why = _t2_holds(p, g)
    if not t2:
        raise T2Violated(why)

    a, z0, z2 = float(p.alpha), float(p.zeta0), float(p.zeta2)
    V = g.eigenvectors[:, 1:]
    lam = g.eigenvalues[1:]
    # minimum-norm solution orthogonal to the consensus direction
    coef = (V.T @ (a * u)) / (z0 + z2 * lam)[:, None]
    w = V @ coef
    Lw = g.L @ w
    resid = float(np.linalg.norm(z0 * w + z2 * Lw - a * u))
    if resid > 1e-10 * (1 + float(np.linalg.norm(a * u))):
        raise T2Violated(f"linear system residual {resid:.3e}")
    x = np.tile(x_star, (n, 1))
    return FixedPoint(x=x, w=w, v1=np.zeros((n, d)), v2=Lw, y=x.copy(), u=u.copy(), residual=resid)


# -- single-state impossibility ---------------------------------------------

@dataclass(frozen=True)
class SingleStateCertificate:
    pole_at_one: bool
    zero_at_one: bool
    failed: tuple[str, ...]
    detail: str


def single_state_infeasible(r: StructuredRealization) -> SingleStateCertificate:
    """Check the pole-at-1 (lam = 0) and zero-at-1 (lam != 0) requirements for
    a scalar-state realization; at least one always fails."""
    if r.s != 1:
        raise WrongStateDimension(f"expected s=1, got s={r.s}")
    if r.D0 != 0 or r.D1 != 0:
        raise NonzeroPassthrough("D0 and D1 must be zero")
    a0 = r.A0[0][0]
    b0, b1 = r.B0[0], r.B1[0]
    c0, c1 = r.C0[0], r.C1[0]
    pole = a0 == 1 and b0 * c0 != 0
    gain = LambdaPoly((c0, c1)) * LambdaPoly((b0, b1))
    zero = gain.is_zero()
    failed = []
    notes = []
    if not pole:
        failed.append("pole_at_one")
        notes.append(f"needs A0 = 1 and B0*C0 != 0 (A0={format_rational(a0)}, B0*C0={format_rational(b0 * c0)})")
    if not zero:
        failed.append("zero_at_one")
        notes.append(f"numerator (C0+lam*C1)(B0+lam*B1) = {gain} is not identically zero")
    if pole and zero:  # unreachable: zero forces B0*C0 = 0
        notes.append("both conditions hold")
    return SingleStateCertificate(pole, zero, tuple(failed), "; ".join(notes))
