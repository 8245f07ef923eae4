import io
import itertools

import numpy as np
import pytest

from conftest import SIGMA, ref_coordinates, ref_flip, ref_momentum_1d, ref_orbital
from pauli_susy.fielddsl import ExprDomainError, parse
from pauli_susy.lattice import (
    FULL_INVERSION,
    DimensionMismatch,
    Grid,
    LatticeOperator,
    SymmetryKind,
    add,
    adjoint,
    anticommutator,
    commutator,
    compose,
    dump_triplets,
    embed_spin,
    frobenius_norm,
    identity,
    load_triplets,
    max_abs_entry,
    momentum_1d,
    momentum_op,
    multiplication_op,
    pauli,
    reflection,
    rotation_pi,
    scale,
    symmetry_op,
)

ALL_KINDS = [reflection(k) for k in range(3)] + [rotation_pi(k) for k in range(3)] + [FULL_INVERSION]
BCS = ["dirichlet", "periodic"]


class TestGrid:
    def test_coordinates_symmetric(self):
        g = Grid((3, 5, 7), (1.0, 0.5, 0.25))
        for k in range(3):
            c = g.axis_coords(k)
            assert np.array_equal(c, -c[::-1])
            assert c[len(c) // 2] == 0
        np.testing.assert_array_equal(g.coordinates(), ref_coordinates(g))
        assert g.dim == 2 * 3 * 5 * 7

    @pytest.mark.parametrize("points", [(4, 3, 3), (1, 3, 3), (3, 3)])
    def test_rejects_bad_points(self, points):
        with pytest.raises(ValueError):
            Grid(points)

    def test_rejects_bad_spacing_and_bc(self):
        with pytest.raises(ValueError):
            Grid((3, 3, 3), (0.0, 1, 1))
        with pytest.raises(ValueError):
            Grid(bc="open")


class TestMomentum:
    def test_three_point_stencil(self):
        p = momentum_1d(3, 1.0).toarray()
        expected = np.array([[0, -0.5j, 0], [0.5j, 0, -0.5j], [0, 0.5j, 0]])
        np.testing.assert_array_equal(p, expected)

    def test_three_point_eigenvalues(self):
        # characteristic polynomial lambda (lambda^2 - 1/2)
        ev = np.linalg.eigvalsh(momentum_1d(3, 1.0).toarray())
        np.testing.assert_allclose(ev, [-1 / np.sqrt(2), 0, 1 / np.sqrt(2)], atol=1e-15)

    @pytest.mark.parametrize("bc", BCS)
    def test_hermitian_exact(self, bc):
        g = Grid((5, 3, 7), (0.3, 0.5, 0.7), bc)
        for k in range(3):
            p = momentum_op(g, k)
            assert max_abs_entry(p - adjoint(p)) == 0

    @pytest.mark.parametrize("bc", BCS)
    def test_matches_reference(self, bc):
        g = Grid((3, 5, 3), (1.0, 0.5, 0.25), bc)
        for k in range(3):
            ref = np.kron(SIGMA[0], ref_orbital(g, ref_momentum_1d(g.points[k], g.spacing[k], bc == "periodic"), k))
            np.testing.assert_array_equal(momentum_op(g, k).toarray(), ref)


class TestMultiplication:
    def test_zero(self, grid3):
        assert frobenius_norm(multiplication_op(grid3, parse("0"))) == 0

    def test_coordinate(self, grid3):
        op = multiplication_op(grid3, parse("x"))
        diag = op.toarray().diagonal().real
        coords = ref_coordinates(grid3)
        np.testing.assert_array_equal(diag, np.tile(coords[:, 0], 2))
        assert set(diag) == {-1.0, 0.0, 1.0}
        assert max_abs_entry(op - adjoint(op)) == 0

    def test_domain_error_at_origin(self, grid3):
        with pytest.raises(ExprDomainError) as info:
            multiplication_op(grid3, parse("1/x"))
        assert info.value.point[0] == 0.0


class TestSymmetry:
    def test_reflection_index_map(self):
        g = Grid((3, 3, 3), (1, 1, 1))
        s = symmetry_op(g, reflection(0)).toarray()
        ref = np.kron(SIGMA[0], ref_orbital(g, ref_flip(3), 0))
        np.testing.assert_array_equal(s, ref)

    @pytest.mark.parametrize("axis", range(3))
    def test_full_inversion_decomposes(self, axis):
        g = Grid((3, 5, 7))
        lhs = symmetry_op(g, FULL_INVERSION)
        rhs = compose(symmetry_op(g, reflection(axis)), symmetry_op(g, rotation_pi(axis)))
        assert max_abs_entry(lhs - rhs) == 0

    @pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.name)
    def test_involution_and_orthogonal(self, kind):
        g = Grid((3, 5, 3))
        s = symmetry_op(g, kind)
        assert max_abs_entry(s @ s - identity(g)) == 0
        assert max_abs_entry(s.adjoint() @ s - identity(g)) == 0
        assert np.isrealobj(s.toarray().real) and np.all(s.toarray().imag == 0)

    @pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.name)
    def test_maps_points(self, kind):
        g = Grid((3, 5, 7), (1.0, 0.5, 0.25))
        coords = g.coordinates()
        perm = symmetry_op(g, kind).toarray()[: g.orbital_dim, : g.orbital_dim].real
        mapped = perm @ coords
        sign = np.array([-1 if k in kind.flipped_axes else 1 for k in range(3)])
        np.testing.assert_array_equal(mapped, coords * sign)

    def test_names_round_trip(self):
        for kind in ALL_KINDS:
            assert SymmetryKind.parse(kind.name) == kind
        with pytest.raises(ValueError):
            SymmetryKind.parse("I_w")


class TestPauli:
    def test_algebra_exact(self):
        eps = {(1, 2, 3): 1, (2, 3, 1): 1, (3, 1, 2): 1, (2, 1, 3): -1, (3, 2, 1): -1, (1, 3, 2): -1}
        for i, j in itertools.product((1, 2, 3), repeat=2):
            expected = (i == j) * np.eye(2, dtype=complex)
            for k in (1, 2, 3):
                expected = expected + 1j * eps.get((i, j, k), 0) * pauli(k)
            np.testing.assert_array_equal(pauli(i) @ pauli(j), expected)

    def test_product_and_anticommutator(self):
        np.testing.assert_array_equal(pauli(1) @ pauli(2), 1j * pauli(3))
        np.testing.assert_array_equal(pauli(1) @ pauli(2) + pauli(2) @ pauli(1), np.zeros((2, 2)))

    def test_hermitian_traceless(self):
        for i in (1, 2, 3):
            s = pauli(i)
            np.testing.assert_array_equal(s, s.conj().T)
            assert np.trace(s) == 0

    def test_bad_index(self):
        with pytest.raises(ValueError):
            pauli(4)

    def test_embed_sigma_z(self, grid3):
        ev = np.linalg.eigvalsh(embed_spin(pauli(3), grid3).toarray())
        assert np.sum(ev == 1) == grid3.orbital_dim and np.sum(ev == -1) == grid3.orbital_dim

    @pytest.mark.parametrize("i", (1, 2, 3))
    def test_spin_commutes_with_orbital(self, grid3, i):
        s = embed_spin(pauli(i), grid3)
        for op in [momentum_op(grid3, 0), symmetry_op(grid3, rotation_pi(1)), multiplication_op(grid3, parse("x*y+z"))]:
            assert max_abs_entry(commutator(s, op)) == 0


class TestAlgebra:
    @pytest.mark.parametrize("bc", BCS)
    def test_reflection_momentum_relations(self, bc):
        g = Grid((3, 5, 7), (0.3, 0.5, 0.7), bc)
        for k in range(3):
            ik = symmetry_op(g, reflection(k))
            for j in range(3):
                pj = momentum_op(g, j)
                rel = anticommutator(ik, pj) if j == k else commutator(ik, pj)
                assert max_abs_entry(rel) == 0

    def test_log_commutes_with_z_reflection(self, grid3):
        a = multiplication_op(grid3, parse("ln(x^2+y^2+1)"))
        r = symmetry_op(grid3, reflection(2))
        dense_a, dense_r = a.toarray(), r.toarray()
        np.testing.assert_array_equal(anticommutator(a, r).toarray(), 2 * dense_a @ dense_r)
        np.testing.assert_array_equal(dense_a @ dense_r, dense_r @ dense_a)

    def test_parity_of_multiplier_on_grid(self, grid5):
        r = symmetry_op(grid5, reflection(0))
        odd = multiplication_op(grid5, parse("x*exp(-y^2)"))
        even = multiplication_op(grid5, parse("cos(x)*y"))
        bound = 2 * np.max(np.abs(odd.toarray())) * 1e-15
        assert max_abs_entry(anticommutator(odd, r)) <= bound
        assert max_abs_entry(commutator(even, r)) <= 2 * np.max(np.abs(even.toarray())) * 1e-15
        assert max_abs_entry(commutator(odd, r)) > 0.1

    def test_linear_ops(self, grid3):
        p = momentum_op(grid3, 0)
        q = momentum_op(grid3, 1)
        np.testing.assert_array_equal(add(p, q).toarray(), p.toarray() + q.toarray())
        np.testing.assert_array_equal(scale(p, 2j).toarray(), 2j * p.toarray())
        np.testing.assert_allclose(compose(p, q).toarray(), p.toarray() @ q.toarray(), atol=0)
        assert frobenius_norm(p) == pytest.approx(np.linalg.norm(p.toarray()))
        assert frobenius_norm(p - p) == 0 and max_abs_entry(p - p) == 0
        assert frobenius_norm(p) > 0

    def test_dimension_mismatch(self, grid3, grid5):
        with pytest.raises(DimensionMismatch):
            momentum_op(grid3, 0) + momentum_op(grid5, 0)


def test_triplet_round_trip(grid3):
    op = momentum_op(grid3, 1) + multiplication_op(grid3, parse("x^2 + 0.1"))
    buf = io.StringIO()
    dump_triplets(op, buf)
    text = buf.getvalue()
    header = text.splitlines()[0].split()
    assert header[0] == "dim" and int(header[1]) == grid3.dim and int(header[3]) == op.nnz
    back = load_triplets(text.splitlines())
    assert max_abs_entry(back - op) == 0


def test_triplet_header_checked():
    with pytest.raises(ValueError):
        load_triplets(["dim 2 nnz 1", "0 0 1.0 0.0", "1 1 1.0 0.0"])
    with pytest.raises(ValueError):
        load_triplets(["size 2"])
