"""Graph Laplacians satisfying the connectivity/PSD assumption, with a
deterministic sorted eigendecomposition."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .ratpoly import parse_rational


class InvalidSpec(ValueError):
    pass


class InvalidLaplacian(ValueError):
    pass


class DisconnectedGraph(InvalidLaplacian):
    pass


TOPOLOGIES = ("ring", "path", "complete", "star", "erdos_renyi", "edges")

# tolerances for the Laplacian assumption
SYM_TOL = 1e-12
ROWSUM_TOL = 1e-12
PSD_TOL = 1e-12
CONNECTIVITY_TOL = 1e-9


@dataclass(frozen=True)
class LaplacianGraph:
    """``L = mu * (D - Adj)`` plus its sorted eigendecomposition.

    ``eigenvalues[0]`` is exactly 0 and ``eigenvectors[:, 0]`` is exactly
    ``1/sqrt(n)``. ``L_exact`` holds the rational matrix when both the edge
    weights and ``mu`` are rational, otherwise it is None.
    """

    n: int
    L: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mu: Union[Fraction, float] = Fraction(1)
    L_exact: Optional[tuple] = field(default=None, compare=False)

    def nonzero_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[1:]

    def distinct_eigenvalues(self, tol: float = 1e-9) -> list[float]:
        out: list[float] = []
        for lam in self.eigenvalues:
            if not out or abs(lam - out[-1]) > tol:
                out.append(float(lam))
        return out

    def scaled(self, mu) -> "LaplacianGraph":
        """Same graph with the Laplacian multiplied by ``mu``."""
        mu = _coerce_mu(mu)
        exact = None
        if self.L_exact is not None and isinstance(mu, Fraction):
            exact = tuple(tuple(x * mu for x in row) for row in self.L_exact)
        total = self.mu * mu
        return _from_matrix(self.L * float(mu), exact, total)


@dataclass(frozen=True)
class LaplacianReport:
    symmetric: bool
    symmetry_residual: float
    zero_row_sums: bool
    row_sum_residual: float
    psd: bool
    min_eigenvalue: float
    connected: bool
    second_eigenvalue: float

    @property
    def ok(self) -> bool:
        return self.symmetric and self.zero_row_sums and self.psd and self.connected

    def lines(self) -> list[str]:
        def mark(flag):
            return "pass" if flag else "FAIL"
        return [
            f"symmetric          {mark(self.symmetric)}  residual={self.symmetry_residual:.3e}",
            f"L*1 = 0            {mark(self.zero_row_sums)}  residual={self.row_sum_residual:.3e}",
            f"positive semidef.  {mark(self.psd)}  min eigenvalue={self.min_eigenvalue:.3e}",
            f"simple zero eig.   {mark(self.connected)}  lambda_2={self.second_eigenvalue:.3e}",
        ]


def validate_laplacian(L) -> LaplacianReport:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise InvalidLaplacian(f"Laplacian must be square, got shape {L.shape}")
    sym = float(np.max(np.abs(L - L.T))) if L.size else 0.0
    rows = float(np.max(np.abs(L.sum(axis=1)))) if L.size else 0.0
    ev = np.linalg.eigvalsh((L + L.T) / 2)
    lam_min = float(ev[0])
    lam2 = float(ev[1]) if len(ev) > 1 else float("inf")
    return LaplacianReport(
        symmetric=sym <= SYM_TOL,
        symmetry_residual=sym,
        zero_row_sums=rows <= ROWSUM_TOL,
        row_sum_residual=rows,
        psd=lam_min >= -PSD_TOL,
        min_eigenvalue=lam_min,
        connected=lam2 > CONNECTIVITY_TOL,
        second_eigenvalue=lam2,
    )


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        # first index among the (near-)largest magnitudes
        k = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        if col[k] < 0:
            out[:, j] = -col
    return out


def _from_matrix(L: np.ndarray, exact, mu) -> LaplacianGraph:
    rep = validate_laplacian(L)
    if not (rep.symmetric and rep.zero_row_sums and rep.psd):
        raise InvalidLaplacian("matrix violates the Laplacian assumption:\n" + "\n".join(rep.lines()))
    if not rep.connected:
        raise DisconnectedGraph(f"zero eigenvalue is not simple (lambda_2={rep.second_eigenvalue:.3e})")
    n = L.shape[0]
    vals, vecs = np.linalg.eigh(L)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    vals = vals.copy()
    vals[0] = 0.0
    vecs = _fix_signs(vecs)
    vecs[:, 0] = 1.0 / np.sqrt(n)
    # re-orthogonalize the rest against the exact consensus vector
    if n > 1:
        rest = vecs[:, 1:] - np.outer(vecs[:, 0], vecs[:, 0] @ vecs[:, 1:])
        q, _ = np.linalg.qr(rest)
        signs = np.sign(np.sum(q * rest, axis=0))
        signs[signs == 0] = 1.0
        vecs[:, 1:] = _fix_signs(q * signs)
    L.setflags(write=False)
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return LaplacianGraph(n=n, L=L, eigenvalues=vals, eigenvectors=vecs, mu=mu, L_exact=exact)


def from_matrix(L, mu=1) -> LaplacianGraph:
    """Wrap an explicit Laplacian (already scaled), validating it.

    Accepts a nested sequence of ints/Fractions/``"p/q"`` strings (kept
    exactly) or any float array.
    """
    mu = _coerce_mu(mu)
    exact = None
    if not isinstance(L, np.ndarray):
        try:
            exact = tuple(tuple(parse_rational(x) for x in row) for row in L)
        except (TypeError, ValueError):
            exact = None
    if exact is not None:
        arr = np.array([[float(x) for x in row] for row in exact])
    else:
        arr = np.array(L, dtype=float)
    return _from_matrix(arr, exact, mu)


def as_laplacian_graph(obj) -> LaplacianGraph:
    if isinstance(obj, LaplacianGraph):
        return obj
    return from_matrix(obj)


def _coerce_mu(mu) -> Union[Fraction, float]:
    if isinstance(mu, (int, Fraction, str)):
        mu = parse_rational(mu) if not isinstance(mu, Fraction) else mu
    else:
        mu = float(mu)
    if mu <= 0:
        raise InvalidSpec("mu must be positive")
    return mu


def _edges_for(topology: str, n: int, prob=None, seed=None) -> list[tuple[int, int, Fraction]]:
    one = Fraction(1)
    if topology == "ring":
        if n < 3:
            raise InvalidSpec("ring needs n >= 3")
        return [(i, (i + 1) % n, one) for i in range(n)]
    if topology == "path":
        return [(i, i + 1, one) for i in range(n - 1)]
    if topology == "complete":
        return [(i, j, one) for i in range(n) for j in range(i + 1, n)]
    if topology == "star":
        return [(0, j, one) for j in range(1, n)]
    if topology == "erdos_renyi":
        if prob is None or not 0 <= float(prob) <= 1:
            raise InvalidSpec("erdos_renyi needs 0 <= prob <= 1")
        # PCG64 stream; one uniform draw per pair (i<j) in lexicographic order
        rng = np.random.Generator(np.random.PCG64(0 if seed is None else int(seed)))
        draws = rng.random(n * (n - 1) // 2)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        return [(i, j, one) for (i, j), r in zip(pairs, draws) if r < float(prob)]
    raise InvalidSpec(f"unknown topology {topology!r}")


def build_laplacian(topology: str, n: int, mu=1, *, prob=None, seed=None,
                    edges: Optional[Sequence[tuple]] = None) -> LaplacianGraph:
    """Build ``mu * (D - Adj)`` for a named topology or an explicit edge list.

    ``edges`` entries are ``(i, j, weight)`` with 0-based agent indices and
    positive weights; parallel entries accumulate.
    """
    if n is None or int(n) < 1:
        raise InvalidSpec("n must be a positive integer")
    n = int(n)
    mu = _coerce_mu(mu)
    if topology == "edges":
        if edges is None:
            raise InvalidSpec("explicit topology needs an edge list")
        es = []
        for e in edges:
            i, j, w = int(e[0]), int(e[1]), e[2] if len(e) > 2 else 1
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise InvalidSpec(f"bad edge {e!r}")
            try:
                w = parse_rational(w)
            except (TypeError, ValueError):
                w = float(w)
            if w <= 0:
                raise InvalidSpec(f"edge weight must be positive: {e!r}")
            es.append((i, j, w))
    else:
        es = _edges_for(topology, n, prob=prob, seed=seed)

    all_exact = isinstance(mu, Fraction) and all(isinstance(w, Fraction) for _, _, w in es)
    zero = Fraction(0) if all_exact else 0.0
    lap = [[zero] * n for _ in range(n)]
    for i, j, w in es:
        lap[i][j] -= w
        lap[j][i] -= w
        lap[i][i] += w
        lap[j][j] += w
    if all_exact:
        exact = tuple(tuple(x * mu for x in row) for row in lap)
        arr = np.array([[float(x) for x in row] for row in exact])
    else:
        exact = None
        arr = np.array(lap, dtype=float) * float(mu)
    if n == 1:
        raise InvalidSpec("need at least two agents")
    return _from_matrix(arr, exact, mu)
