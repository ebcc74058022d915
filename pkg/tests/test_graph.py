from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from canform.graph import (
    DisconnectedGraph,
    InvalidLaplacian,
    InvalidSpec,
    build_laplacian,
    from_matrix,
    validate_laplacian,
)


def test_complete4_against_charpoly():
    g = build_laplacian("complete", 4)
    lam = sp.symbols("lam")
    cp = sp.Matrix([[int(x) for x in row] for row in g.L_exact]).charpoly(lam).as_expr()
    assert sp.factor(cp) == lam * (lam - 4) ** 3
    assert np.allclose(g.eigenvalues, [0, 4, 4, 4], atol=1e-12)


def test_ring5_closed_form():
    g = build_laplacian("ring", 5)
    expected = np.sort([2 - 2 * np.cos(2 * np.pi * k / 5) for k in range(5)])
    assert np.allclose(g.eigenvalues, expected, atol=1e-12)
    assert g.eigenvalues[0] == 0.0


def test_mu_scales_spectrum():
    g = build_laplacian("ring", 5)
    h = build_laplacian("ring", 5, mu=Fraction(1, 2))
    assert np.allclose(h.eigenvalues, g.eigenvalues / 2, atol=1e-12)
    assert h.L_exact[0][0] == 1
    assert np.allclose(g.scaled("1/2").L, h.L)


@pytest.mark.parametrize("topo,n", [("ring", 5), ("ring", 8), ("path", 6), ("complete", 4), ("star", 7)])
def test_eigendecomposition(topo, n):
    g = build_laplacian(topo, n)
    V = g.eigenvectors
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-10)
    assert np.allclose(V @ np.diag(g.eigenvalues) @ V.T, g.L, atol=1e-10)
    assert np.all(V[:, 0] == 1 / np.sqrt(n))
    assert np.all(np.diff(g.eigenvalues) >= -1e-12)


def test_eigendecomposition_deterministic():
    a, b = build_laplacian("ring", 6), build_laplacian("ring", 6)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_distinct_eigenvalues():
    assert len(build_laplacian("ring", 5).distinct_eigenvalues()) == 3
    assert build_laplacian("complete", 4).distinct_eigenvalues() == pytest.approx([0, 4])


def test_validate_block_diagonal():
    blk = np.array([[1.0, -1.0], [-1.0, 1.0]])
    L = np.block([[blk, np.zeros((2, 2))], [np.zeros((2, 2)), blk]])
    rep = validate_laplacian(L)
    assert rep.symmetric and rep.zero_row_sums and rep.psd
    assert not rep.connected and not rep.ok
    with pytest.raises(DisconnectedGraph):
        from_matrix(L)


def test_validate_asymmetric_perturbation():
    L = build_laplacian("ring", 5).L.copy()
    L[0, 1] += 1e-3
    rep = validate_laplacian(L)
    assert not rep.symmetric
    assert rep.symmetry_residual == pytest.approx(1e-3, rel=1e-9)
    with pytest.raises(InvalidLaplacian):
        from_matrix(L)


def test_from_matrix_exact():
    g = from_matrix([["1/2", "-1/2"], ["-1/2", "1/2"]])
    assert g.L_exact[0][0] == Fraction(1, 2)
    assert g.eigenvalues[1] == pytest.approx(1.0)


def test_erdos_renyi_seeded():
    a = build_laplacian("erdos_renyi", 10, prob=0.5, seed=3)
    b = build_laplacian("erdos_renyi", 10, prob=0.5, seed=3)
    assert np.array_equal(a.L, b.L)
    pairs = [(i, j) for i in range(10) for j in range(i + 1, 10)]
    draws = np.random.Generator(np.random.PCG64(3)).random(len(pairs))
    for (i, j), r in zip(pairs, draws):
        assert (a.L[i, j] == -1.0) == (r < 0.5)


def test_erdos_renyi_sparse_is_disconnected():
    with pytest.raises(DisconnectedGraph):
        build_laplacian("erdos_renyi", 8, prob=0.1, seed=7)


def test_edges_topology():
    g = build_laplacian("edges", 3, edges=[(0, 1, "2"), (1, 2, 1)])
    assert g.L_exact == ((2, -2, 0), (-2, 3, -1), (0, -1, 1))
    with pytest.raises(InvalidSpec):
        build_laplacian("edges", 3, edges=[(0, 0, 1)])
    with pytest.raises(InvalidSpec):
        build_laplacian("edges", 3, edges=[(0, 1, -1)])


@pytest.mark.parametrize("kw", [dict(topology="ring", n=2), dict(topology="torus", n=4),
                                dict(topology="ring", n=5, mu=0), dict(topology="erdos_renyi", n=5)])
def test_invalid_specs(kw):
    with pytest.raises(InvalidSpec):
        build_laplacian(**kw)


def test_path_disconnected_edges():
    with pytest.raises(DisconnectedGraph):
        build_laplacian("edges", 4, edges=[(0, 1, 1), (2, 3, 1)])
