import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multihilbert import discretize as dz
from multihilbert import spectral as sp
from multihilbert.errors import (
    CoincidentPoints,
    ContourTouchesSets,
    EvaluationInsideJ,
    UnboundedWithoutCompactification,
)
from multihilbert.geometry import validate_configuration


def test_nodes_strictly_inside(disjoint):
    g = dz.build_grid(disjoint, panels=8, grading=0.5)
    x = g.nodes
    assert np.all(((x > 0) & (x < 1)) | ((x > 2) & (x < 3)))
    assert g.size == 2 * 2 * 8 * 8
    assert np.all(g.weights > 0)


def test_weights_integrate_constants_and_cubics(disjoint):
    g = dz.build_grid(disjoint, panels=8)
    wJ, xJ = g.weights[g.is_J], g.J_nodes
    assert abs(wJ.sum() - 1.0) < 1e-12
    assert abs(g.weights[g.is_E].sum() - 1.0) < 1e-12
    assert abs(np.sum(wJ * xJ ** 3) - 0.25) < 1e-12


def test_geometric_panel_schedule(disjoint):
    g = dz.build_grid(disjoint, panels=8, grading=0.5)
    edges = g.breakpoints(0)
    lengths = np.diff(edges)
    # half-length 0.5; edges sit at 0.5 * 0.5**k, so the two panels nearest 0 match
    assert lengths.min() == pytest.approx(0.5 ** 7 * 0.5)
    assert lengths[0] == lengths[1]
    assert lengths[7] == pytest.approx(0.25)
    np.testing.assert_allclose(lengths[2:8] / lengths[1:7], 2.0)
    np.testing.assert_allclose(lengths, lengths[::-1])


def test_grid_rejects_unbounded():
    cfg = validate_configuration([[0, 1]], [[2, "inf"]])
    with pytest.raises(UnboundedWithoutCompactification):
        dz.build_grid(cfg)


def test_kernel_same_type_vanishes(disjoint):
    assert dz.kernel_K(0.2, 0.7, disjoint) == 0.0


def test_kernel_cross_value(disjoint):
    assert dz.kernel_K(2.5, 0.5, disjoint) == pytest.approx(1 / (2 * np.pi), abs=1e-15)
    x, y = 2.3, 0.4
    assert dz.kernel_K(x, y, disjoint) == pytest.approx(1 / (np.pi * (x - y)), rel=1e-15)


def test_kernel_coincident_points(disjoint):
    with pytest.raises(CoincidentPoints):
        dz.kernel_K(0.5, 0.5, disjoint)


def test_kernel_vectors_orthogonal(touching):
    g = dz.build_grid(touching, panels=8)
    f, gv = dz.kernel_vectors(g.nodes, touching)
    assert np.all(np.sum(f * gv, axis=1) == 0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(2.01, 2.99), st.booleans())
def test_kernel_symmetry(a, b, swap):
    cfg = validate_configuration([[0, 1]], [[2, 3]])
    x, y = (a, b) if swap else (b, a)
    assert dz.kernel_K(x, y, cfg) == dz.kernel_K(y, x, cfg)


def test_assembled_matrix_symmetric(disjoint_system):
    cfg, g, K = disjoint_system
    M = K.entries
    assert np.max(np.abs(M - M.T)) <= 1e-14
    J = g.is_J
    assert np.all(M[np.ix_(J, J)] == 0.0)
    assert np.all(np.diag(M) == 0.0)


def test_block_a_orientation(disjoint_system):
    cfg, g, K = disjoint_system
    A = dz.block_A(K)
    assert A.entries.shape == (g.is_E.sum(), g.is_J.sum())
    np.testing.assert_array_equal(A.entries, dz.assemble_A(cfg, g).entries)


def test_norm_bound_disjoint(disjoint_system):
    _, _, K = disjoint_system
    assert sp.singular_values(dz.block_A(K))[0] <= 1 + 1e-3


def test_apply_A_constant():
    cfg = validate_configuration([[0, 1]], [[2, 3]])
    g = dz.build_grid(cfg, panels=16)
    assert dz.apply_A(cfg, g, np.ones(g.is_J.sum()), 2.0) == pytest.approx(
        math.log(2) / math.pi, abs=1e-12)
    assert dz.apply_A(cfg, g, np.zeros(g.is_J.sum()), 2.5) == 0.0


def test_apply_A_closed_form_on_many_points(disjoint):
    g = dz.build_grid(disjoint, panels=16)
    x = np.linspace(2.0, 3.0, 102)[1:-1]
    ref = np.log(x / (x - 1)) / np.pi
    assert np.max(np.abs(dz.apply_A(disjoint, g, lambda y: np.ones_like(y), x) - ref)) <= 1e-10


def test_apply_A_linear(disjoint, rng):
    g = dz.build_grid(disjoint, panels=8)
    n = g.is_J.sum()
    f, h = rng.normal(size=n), rng.normal(size=n)
    x = np.array([2.2, 2.9])
    lhs = dz.apply_A(disjoint, g, 2 * f - 3 * h, x)
    rhs = 2 * dz.apply_A(disjoint, g, f, x) - 3 * dz.apply_A(disjoint, g, h, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-14 * max(1, np.abs(lhs).max())


def test_apply_A_rejects_points_in_J(disjoint):
    g = dz.build_grid(disjoint, panels=4)
    with pytest.raises(EvaluationInsideJ):
        dz.apply_A(disjoint, g, lambda y: y, 0.5)


def test_apply_A_adjoint_is_transpose(disjoint, rng):
    # <A f, g>_E == <f, A^T g>_J by quadrature on both sides
    g = dz.build_grid(disjoint, panels=12)
    f = lambda y: np.sin(3 * y) + 1
    h = lambda x: np.cos(x)
    lhs = np.sum(g.weights[g.is_E] * dz.apply_A(disjoint, g, f, g.E_nodes) * h(g.E_nodes))
    rhs = np.sum(g.weights[g.is_J] * f(g.J_nodes) * dz.apply_A_adjoint(disjoint, g, h, g.J_nodes))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_contour_factorization(disjoint):
    g = dz.build_grid(disjoint, panels=16)
    _, _, r256 = dz.contour_factorize(disjoint, g, n_points=256)
    _, _, r32 = dz.contour_factorize(disjoint, g, n_points=32)
    _, _, r64 = dz.contour_factorize(disjoint, g, n_points=64)
    assert r256 <= 1e-6
    assert r64 < r32 * 1e-2


def test_contour_must_separate(disjoint):
    g = dz.build_grid(disjoint, panels=4)
    with pytest.raises(ContourTouchesSets):
        dz.contour_factorize(disjoint, g, ellipses=((0.5, 2.0, 0.3),))


def test_contour_needs_gap(touching):
    g = dz.build_grid(touching, panels=4)
    with pytest.raises(ContourTouchesSets):
        dz.contour_factorize(touching, g)


def test_refinement_stability(disjoint):
    s16 = sp.singular_values(dz.assemble_A(disjoint, dz.build_grid(disjoint, 16)))
    s24 = sp.singular_values(dz.assemble_A(disjoint, dz.build_grid(disjoint, 24)))
    assert np.max(np.abs(s16[:10] - s24[:10])) <= 1e-6


def test_hilbert_transform_line_closed_form():
    f = lambda x: 1 / (1 + np.asarray(x) ** 2)
    x = np.array([-3.0, 0.0, 0.5, 2.0])
    np.testing.assert_allclose(dz.hilbert_transform_line(f, x), -x / (1 + x ** 2), atol=1e-12)


def test_binary_round_trip(disjoint_system, tmp_path):
    _, g, K = disjoint_system
    header = dz.matrix_to_binary(K, tmp_path / "K")
    M, h2 = dz.matrix_from_binary(tmp_path / "K")
    assert header == h2
    np.testing.assert_array_equal(M, K.entries)
    dz.grid_to_csv(g, tmp_path / "grid.csv")
    lines = (tmp_path / "grid.csv").read_text().splitlines()
    assert len(lines) == g.size + 1
