"""Per-eigenvalue pole/zero analysis of ``G_lam(z)``."""

from __future__ import annotations

import cmath
import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .canonical import CanonicalParams, canonical_transfer_function
from .graph import as_laplacian_graph
from .ratpoly import BivarPoly, BivarRatFun


class Classification(enum.Enum):
    MarginalWithPoleAtOne = "MarginalWithPoleAtOne"
    StrictlyStableWithZeroAtOne = "StrictlyStableWithZeroAtOne"
    Violation = "Violation"


@dataclass(frozen=True)
class PoleZeroReport:
    lam: float
    poles: tuple[complex, ...]
    zeros: tuple[complex, ...]
    classification: Classification
    detail: str = ""

    def row(self) -> tuple[str, str, str, str]:
        c = self.classification.value
        if self.classification is Classification.Violation:
            c = f"Violation({self.detail})"
        return (f"{self.lam:.6g}", _fmt_roots(self.poles), _fmt_roots(self.zeros), c)


def _fmt_roots(rs: Sequence[complex]) -> str:
    if not rs:
        return "-"
    out = []
    for r in rs:
        if abs(r.imag) < 1e-12:
            out.append(f"{r.real:.6g}")
        else:
            out.append(f"{r.real:.6g}{r.imag:+.6g}j")
    return " ".join(out)


def polynomial_roots(coeffs: Sequence[float]) -> list[complex]:
    """Roots of ``sum coeffs[k] z^k``; closed form up to degree 2, companion
    matrix eigenvalues beyond that."""
    cs = [float(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    deg = len(cs) - 1
    if deg <= 0:
        return []
    if deg == 1:
        return [complex(-cs[0] / cs[1])]
    if deg == 2:
        c, b, a = cs
        disc = cmath.sqrt(b * b - 4 * a * c)
        # avoid cancellation: q = -(b + sign(b) sqrt(disc)) / 2
        sgn = 1.0 if b >= 0 else -1.0
        q = -(b + sgn * disc) / 2
        if q == 0:
            return [0j, 0j]
        r1, r2 = q / a, c / q
        return sorted([complex(r1), complex(r2)], key=lambda r: (r.real, r.imag))
    comp = np.zeros((deg, deg))
    comp[0, :] = -np.asarray(cs[-2::-1]) / cs[-1]
    comp[1:, :-1] = np.eye(deg - 1)
    return sorted((complex(r) for r in np.linalg.eigvals(comp)), key=lambda r: (r.real, r.imag))


def _cancel(zeros: list[complex], poles: list[complex], tol: float):
    zeros, poles = list(zeros), list(poles)
    i = 0
    while i < len(zeros):
        j = next((j for j, p in enumerate(poles) if abs(p - zeros[i]) <= tol), None)
        if j is None:
            i += 1
        else:
            zeros.pop(i)
            poles.pop(j)
    return zeros, poles


def _pair_conjugates(roots: list[complex], tol: float) -> list[complex]:
    # a real polynomial has no unpaired complex root; an orphan left behind by
    # cancelling one member of a near-real pair is really a real root
    out = []
    for i, r in enumerate(roots):
        if r.imag != 0 and not any(j != i and abs(s - r.conjugate()) <= tol for j, s in enumerate(roots)):
            r = complex(r.real, 0.0)
        out.append(r)
    return out


def _multiplicities(roots: list[complex], tol: float) -> list[int]:
    return [sum(1 for s in roots if abs(s - r) <= tol) for r in roots]


def pole_zero_report(f: BivarRatFun, lam: float, tol: float = 1e-9) -> PoleZeroReport:
    """Substitute ``lam``, cancel common roots numerically and classify.

    At ``lam = 0``: exactly one pole within ``tol`` of 1, every other pole in
    the closed disk, unit-circle poles simple. At ``lam > 0``: a zero within
    ``tol`` of 1 and every pole with ``|z| < 1 - tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = float(lam)
    num = [float(c) for c in f.num.at_lambda(lam)]
    den = [float(c) for c in f.den.at_lambda(lam)]
    zeros = polynomial_roots(num)
    poles = polynomial_roots(den)
    # repeated roots are only located to ~sqrt(eps); match them more loosely
    match_tol = max(tol, math.sqrt(tol))
    zeros, poles = _cancel(zeros, poles, match_tol)
    zeros, poles = _pair_conjugates(zeros, match_tol), _pair_conjugates(poles, match_tol)
    if not any(abs(c) > 0 for c in num):
        zeros, poles = [], []

    if abs(lam) <= tol:
        at_one = [p for p in poles if abs(p - 1) <= tol]
        if len(at_one) != 1:
            cls, why = Classification.Violation, f"{len(at_one)} poles at z=1 for lam=0"
        elif any(abs(p) > 1 + tol for p in poles):
            cls, why = Classification.Violation, "pole outside the unit disk"
        elif any(abs(abs(p) - 1) <= tol and m > 1
                 for p, m in zip(poles, _multiplicities(poles, match_tol))):
            cls, why = Classification.Violation, "repeated pole on the unit circle"
        else:
            cls, why = Classification.MarginalWithPoleAtOne, ""
    else:
        if not any(abs(z - 1) <= tol for z in zeros):
            cls, why = Classification.Violation, "no zero at z=1"
        elif any(abs(p) >= 1 - tol for p in poles):
            worst = max(abs(p) for p in poles)
            cls, why = Classification.Violation, f"pole modulus {worst:.6g} not < 1"
        else:
            cls, why = Classification.StrictlyStableWithZeroAtOne, ""
    return PoleZeroReport(lam, tuple(poles), tuple(zeros), cls, why)


@dataclass(frozen=True)
class Lemma1Result:
    reports: tuple[PoleZeroReport, ...]
    passed: bool

    def offending(self) -> list[PoleZeroReport]:
        out = []
        for r in self.reports:
            want = (Classification.MarginalWithPoleAtOne if r.lam == 0
                    else Classification.StrictlyStableWithZeroAtOne)
            if r.classification is not want:
                out.append(r)
        return out


def has_zero_at_one_factor(f: BivarRatFun) -> bool:
    """True when ``(z-1)`` divides the numerator exactly in Q[lam][z]."""
    if f.num.is_zero():
        return True
    try:
        f.num.exact_div(BivarPoly((-1, 1)))
    except ArithmeticError:
        return False
    return True


def lemma1_check(p: CanonicalParams, L, tol: float = 1e-9) -> Lemma1Result:
    g = as_laplacian_graph(L)
    f = canonical_transfer_function(p)
    reports = [pole_zero_report(f, lam, tol) for lam in g.distinct_eigenvalues()]
    ok = reports[0].classification is Classification.MarginalWithPoleAtOne and all(
        r.classification is Classification.StrictlyStableWithZeroAtOne for r in reports[1:])
    return Lemma1Result(tuple(reports), ok)


def format_reports(reports: Sequence[PoleZeroReport], fmt: str = "text") -> str:
    header = ("lambda", "poles", "zeros", "classification")
    rows = [r.row() for r in reports]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue().rstrip("\n")
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)
