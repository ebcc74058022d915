"""Multi-agent simulation of the canonical iteration and of generic
structured realizations, plus exact open-loop responses."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .canonical import CanonicalParams
from .graph import LaplacianGraph
from .realization import StructuredRealization


class DimensionMismatch(ValueError):
    pass


class PassthroughInClosedLoop(ValueError):
    pass


class NonpositiveCurvature(ValueError):
    pass


@dataclass(frozen=True)
class Objective:
    """Local objectives through their gradients.

    ``grad_all`` maps an ``(n, d)`` array of query points (row ``i`` for agent
    ``i``) to the ``(n, d)`` array of local gradients.
    """

    n: int
    d: int
    grad_all: Callable[[np.ndarray], np.ndarray]
    known_minimizer: Optional[np.ndarray] = None
    name: str = "objective"

    def gradient(self, i: int, x) -> np.ndarray:
        pts = np.zeros((self.n, self.d))
        pts[i] = x
        return self.grad_all(pts)[i]


def quadratic_objective(b, curvatures=1.0) -> Objective:
    """``f_i(x) = (c_i / 2) ||x - b_i||^2``."""
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    n, d = b.shape
    c = np.broadcast_to(np.asarray(curvatures, dtype=float), (n,)).copy()
    if np.any(c <= 0):
        raise NonpositiveCurvature("curvatures must be positive")
    x_star = (c[:, None] * b).sum(axis=0) / c.sum()

    def grad_all(y):
        return c[:, None] * (y - b)

    return Objective(n, d, grad_all, x_star, "quadratic")


def logcosh_objective(b) -> Objective:
    """``f_i(x) = sum_coord log cosh(x - b_i)``; no closed-form minimizer."""
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    n, d = b.shape

    def grad_all(y):
        return np.tanh(y - b)

    return Objective(n, d, grad_all, None, "logcosh")


@dataclass
class Trajectory:
    """Per-iteration, per-agent records with arrays of shape ``(K, n, d)``.

    Canonical runs fill ``x, w, v1, v2``; generic runs fill ``xi`` with shape
    ``(K, n, s, d)`` instead. ``y`` and ``u`` are always present.
    """

    y: np.ndarray
    u: np.ndarray
    x: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    v1: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None
    xi: Optional[np.ndarray] = None
    w_sum: Optional[np.ndarray] = None
    comm_rounds: int = 0
    final_state: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return self.y.shape[0]

    def write_csv(self, path) -> None:
        K, n, d = self.y.shape
        cols = ("x", "w", "v1", "v2", "y", "u")
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(("k", "i", "coord") + cols)
            for k in range(K):
                for i in range(n):
                    for c in range(d):
                        row = [k, i, c]
                        for name in cols:
                            arr = getattr(self, name)
                            row.append("" if arr is None else format(float(arr[k, i, c]), ".17g"))
                        wr.writerow(row)


def _as_agents(v, n: int, d: int, what: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        a = np.full((n, d), float(a))
    elif a.ndim == 1:
        if d == 1 and a.shape[0] == n:
            a = a[:, None]
        elif a.shape[0] == d:
            a = np.tile(a, (n, 1))
    if a.shape != (n, d):
        raise DimensionMismatch(f"{what} has shape {np.shape(v)}, expected ({n}, {d})")
    return a.copy()


def _lap(Lm: np.ndarray, X: np.ndarray) -> np.ndarray:
    # one matrix-vector product per column, so every coordinate sees the same
    # floating-point summation order whatever the number of columns
    if X.dtype == object:
        return Lm @ X
    out = np.empty_like(X)
    for c in range(X.shape[1]):
        out[:, c] = Lm @ X[:, c]
    return out


def run_canonical(p: CanonicalParams, L: LaplacianGraph, obj: Objective, x0=0.0, w0=0.0,
                  K: int = 1) -> Trajectory:
    """Run the canonical iteration for ``K`` iterations (k = 0..K-1)."""
    if K < 1:
        raise ValueError("K must be at least 1")
    n, d = obj.n, obj.d
    if L.n != n:
        raise DimensionMismatch(f"graph has {L.n} agents, objective has {n}")
    a, z0, z1, z2, z3 = (float(v) for v in p.as_tuple())
    use_v2 = p.zeta2 != 0
    Lm = np.asarray(L.L)
    x = _as_agents(x0, n, d, "x0")
    w = _as_agents(w0, n, d, "w0")

    rec = {k: np.empty((K, n, d)) for k in ("x", "w", "v1", "v2", "y", "u")}
    w_sum = np.empty((K + 1, d))
    comm = 0
    for k in range(K):
        v1 = _lap(Lm, x)
        comm += 1
        if use_v2:
            v2 = _lap(Lm, w)
            comm += 1
        else:
            v2 = np.zeros_like(w)
        y = x - z3 * v1
        u = obj.grad_all(y)
        rec["x"][k], rec["w"][k], rec["v1"][k] = x, w, v1
        rec["v2"][k], rec["y"][k], rec["u"][k] = v2, y, u
        w_sum[k] = w.sum(axis=0)
        x = x + z0 * w - a * u - z1 * v1 + z2 * v2
        w = w - v1
    w_sum[K] = w.sum(axis=0)
    return Trajectory(y=rec["y"], u=rec["u"], x=rec["x"], w=rec["w"], v1=rec["v1"], v2=rec["v2"],
                      w_sum=w_sum, comm_rounds=comm, final_state={"x": x, "w": w})


def _blocks(r: StructuredRealization, dtype=float):
    conv = float if dtype is float else (lambda q: q)
    A0 = np.array([[conv(v) for v in row] for row in r.A0], dtype=dtype)
    A1 = np.array([[conv(v) for v in row] for row in r.A1], dtype=dtype)
    B0 = np.array([conv(v) for v in r.B0], dtype=dtype)
    B1 = np.array([conv(v) for v in r.B1], dtype=dtype)
    C0 = np.array([conv(v) for v in r.C0], dtype=dtype)
    C1 = np.array([conv(v) for v in r.C1], dtype=dtype)
    return A0, A1, B0, B1, C0, C1


def _step(blocks, Lm, xi, u=None):
    # xi: (n, s, d); Kronecker products applied factor-wise
    A0, A1, B0, B1, C0, C1 = blocks
    n, s, d = xi.shape
    Lxi = _lap(Lm, xi.reshape(n, s * d)).reshape(n, s, d)
    y = np.einsum("s,nsd->nd", C0, xi) if xi.dtype != object else _contract(C0, xi)
    y = y + (np.einsum("s,nsd->nd", C1, Lxi) if xi.dtype != object else _contract(C1, Lxi))
    return Lxi, y


def _contract(c, xi):
    n, s, d = xi.shape
    out = np.empty((n, d), dtype=object)
    for i in range(n):
        for j in range(d):
            out[i, j] = sum((c[t] * xi[i, t, j] for t in range(s)), Fraction(0))
    return out


def _advance(blocks, Lm, xi, Lxi, u):
    A0, A1, B0, B1, C0, C1 = blocks
    n, s, d = xi.shape
    Lu = _lap(Lm, u)
    nxt = np.matmul(A0, xi) + np.matmul(A1, Lxi)
    nxt = nxt + B0[None, :, None] * u[:, None, :] + B1[None, :, None] * Lu[:, None, :]
    return nxt


def run_realization(r: StructuredRealization, L: LaplacianGraph, obj: Objective, xi0=0.0,
                    K: int = 1) -> Trajectory:
    """Closed loop ``xi+ = A(L) xi + B(L) u``, ``y = C(L) xi``, ``u = grad f(y)``."""
    if r.D0 != 0 or r.D1 != 0:
        raise PassthroughInClosedLoop("closed loop needs D0 = D1 = 0")
    if K < 1:
        raise ValueError("K must be at least 1")
    n, d, s = obj.n, obj.d, r.s
    if L.n != n:
        raise DimensionMismatch(f"graph has {L.n} agents, objective has {n}")
    xi = np.asarray(xi0, dtype=float)
    if xi.ndim == 0:
        xi = np.full((n, s, d), float(xi))
    elif xi.ndim == 2 and d == 1:
        xi = xi[:, :, None]
    if xi.shape != (n, s, d):
        raise DimensionMismatch(f"xi0 has shape {np.shape(xi0)}, expected ({n}, {s}, {d})")
    xi = xi.copy()
    blocks = _blocks(r)
    Lm = np.asarray(L.L)
    ys = np.empty((K, n, d))
    us = np.empty((K, n, d))
    xis = np.empty((K, n, s, d))
    for k in range(K):
        Lxi, y = _step(blocks, Lm, xi)
        u = obj.grad_all(y)
        xis[k], ys[k], us[k] = xi, y, u
        xi = _advance(blocks, Lm, xi, Lxi, u)
    return Trajectory(y=ys, u=us, xi=xis, final_state={"xi": xi})


def nids_initial_state(obj: Objective, x0, alpha) -> np.ndarray:
    """State ``(x^1, x^0, grad f(x^0))`` with ``x^1 = x^0 - alpha grad f(x^0)``
    for the 3-state NIDS realization."""
    n, d = obj.n, obj.d
    x0 = _as_agents(x0, n, d, "x0")
    g0 = obj.grad_all(x0)
    x1 = x0 - float(alpha) * g0
    return np.stack([x1, x0, g0], axis=1)


def open_loop_response(r: StructuredRealization, L: LaplacianGraph, inputs: Sequence, K: Optional[int] = None):
    """Zero-state output sequence ``y^0..y^{K-1}`` for the given inputs.

    Exact (Fraction entries) when the Laplacian and the inputs are rational,
    floating point otherwise. Returns an array of shape ``(K, n, d)``.
    """
    if r.D0 != 0 or r.D1 != 0:
        passthrough = True
    else:
        passthrough = False
    inputs = list(inputs)
    if K is None:
        K = len(inputs)
    if K != len(inputs):
        raise DimensionMismatch(f"K={K} but {len(inputs)} inputs given")
    exact = L.L_exact is not None and all(
        isinstance(v, (int, Fraction)) for u in inputs for v in np.ravel(np.asarray(u, dtype=object)))
    n, s = L.n, r.s
    us = []
    for u in inputs:
        a = np.asarray(u, dtype=object if exact else float)
        if a.ndim == 1:
            a = a[:, None]
        if a.shape[0] != n:
            raise DimensionMismatch(f"input has {a.shape[0]} agents, graph has {n}")
        if exact:
            a = np.vectorize(Fraction, otypes=[object])(a)
        us.append(a)
    d = us[0].shape[1] if us else 1
    if exact:
        Lm = np.array([[Fraction(v) for v in row] for row in L.L_exact], dtype=object)
        blocks = _blocks(r, dtype=object)
        D0, D1 = r.D0, r.D1
        xi = np.full((n, s, d), Fraction(0), dtype=object)
    else:
        Lm = np.asarray(L.L)
        blocks = _blocks(r)
        D0, D1 = float(r.D0), float(r.D1)
        xi = np.zeros((n, s, d))
    out = []
    for u in us:
        if u.shape[1] != d:
            raise DimensionMismatch("inputs must share the coordinate dimension")
        Lxi, y = _step(blocks, Lm, xi)
        if passthrough:
            y = y + D0 * u + D1 * (Lm @ u)
        out.append(y)
        xi = _advance(blocks, Lm, xi, Lxi, u)
    if not out:
        return np.empty((0, n, d), dtype=object if exact else float)
    return np.stack(out)


@dataclass(frozen=True)
class ConvergenceMetrics:
    error: np.ndarray
    consensus: np.ndarray


def convergence_metrics(traj: Trajectory, x_star) -> ConvergenceMetrics:
    y = traj.y
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    if x_star.shape[0] != y.shape[2]:
        raise DimensionMismatch(f"x_star has dimension {x_star.shape[0]}, trajectory has {y.shape[2]}")
    err = np.linalg.norm(y - x_star[None, None, :], axis=2).max(axis=1)
    diff = y[:, :, None, :] - y[:, None, :, :]
    cons = np.linalg.norm(diff, axis=3).max(axis=(1, 2))
    return ConvergenceMetrics(err, cons)
