import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from qglab.exceptions import NotUnitaryError, UnsupportedPatternError
from qglab.graphs import Graph
from qglab.matrix_core import eig_hermitian, hermitian_basis_f, hermitian_frame, traceless_diagonal_basis
from qglab.operator_system import (
    degree_matrix,
    explicit_rigid_tuple,
    from_generators,
    from_graph,
    orthogonal_complement_system,
    projection_superoperator,
    vec,
)
from qglab.random_models import sample_qg_nd
from qglab.rng import seeded_rng
from qglab.symmetry import (
    _diagonalize_integer,
    degree_commutant_check,
    diagonal_phase_solver,
    discrete_aut_search,
    distance_from_scalars,
    is_abelian,
    stabilizer_lie_algebra,
    verify_automorphism,
)


def full_system(n):
    return from_graph(Graph.complete(n))


def brute_stabilizer_dim(V):
    """Rank of H -> ((I - P_V)[H, B_j])_j over the real span of i * frame,
    built column by column from the projection superoperator."""
    n = V.n
    Q = np.eye(n * n) - projection_superoperator(V)
    cols = []
    for F in hermitian_frame(n)[1:]:
        H = 1j * F
        parts = [Q @ vec(H @ B - B @ H) for B in V.basis[1:]]
        v = np.concatenate(parts) if parts else np.zeros(0)
        cols.append(np.concatenate([v.real, v.imag]))
    M = np.array(cols).T
    if M.size == 0:
        return n * n - 1
    return n * n - 1 - np.linalg.matrix_rank(M, tol=1e-8 * max(1.0, np.abs(M).max()))


def commutant_dim_in_eigenbasis(X, tol=1e-9):
    """Traceless skew-Hermitian commutant of X: in an eigenbasis, H_ij may be
    nonzero only where the eigenvalues agree."""
    w, _ = eig_hermitian(X)
    return int(np.sum(np.abs(w[:, None] - w[None, :]) < tol)) - 1


class TestStabilizer:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_scalars(self, n):
        S = stabilizer_lie_algebra(from_generators(n, []))
        assert S.dim == n * n - 1 and S.gap_ratio is None

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_full_matrix_algebra(self, n):
        # every unitary preserves M_n, so the whole of psu(n) stabilizes it
        assert stabilizer_lie_algebra(full_system(n)).dim == n * n - 1

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_d1_torus(self, n):
        V = sample_qg_nd(n, 1, seeded_rng(n))
        S = stabilizer_lie_algebra(V)
        assert S.dim == n - 1 == commutant_dim_in_eigenbasis(V.basis[1])
        assert is_abelian(S)

    def test_degenerate_generator(self):
        V = from_generators(3, [np.diag([2.0, -1.0, -1.0])])
        # U(1) x U(2) modulo scalars
        assert stabilizer_lie_algebra(V).dim == 4

    def test_diagonal_algebra(self):
        V = from_generators(4, traceless_diagonal_basis(4))
        assert stabilizer_lie_algebra(V).dim == 3

    @given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n * n - 1))),
           st.integers(0, 2**32))
    def test_matches_brute_force(self, nd, seed):
        n, d = nd
        V = sample_qg_nd(n, d, seeded_rng(seed))
        assert stabilizer_lie_algebra(V).dim == brute_stabilizer_dim(V)

    @given(st.integers(2, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n * n - 1))),
           st.integers(0, 2**32))
    def test_duality(self, nd, seed):
        n, d = nd
        V = sample_qg_nd(n, d, seeded_rng(seed))
        W = orthogonal_complement_system(V)
        assert stabilizer_lie_algebra(V).dim == stabilizer_lie_algebra(W).dim

    @given(st.sampled_from([(3, 1), (3, 7), (4, 1), (2, 0), (3, 8)]), st.integers(0, 2**32))
    def test_basis_invariants(self, nd, seed):
        n, d = nd
        V = sample_qg_nd(n, d, seeded_rng(seed))
        S = stabilizer_lie_algebra(V)
        H = S.basis
        assert np.allclose(H, -H.conj().transpose(0, 2, 1))
        assert np.allclose(np.trace(H, axis1=1, axis2=2), 0)
        gram = np.einsum("axy,bxy->ab", H.conj(), H)
        assert np.allclose(gram, np.eye(S.dim))
        Q = np.eye(n * n) - projection_superoperator(V)
        for h in H:
            for B in V.basis[1:]:
                assert np.linalg.norm(Q @ vec(h @ B - B @ h)) < 1e-9

    def test_singular_values_descending_and_gap(self):
        S = stabilizer_lie_algebra(sample_qg_nd(4, 3, seeded_rng(0)))
        assert np.all(np.diff(S.singular_values) <= 0)
        assert S.dim == 0 and S.gap_ratio > 1e4

    def test_gap_with_kernel(self):
        S = stabilizer_lie_algebra(sample_qg_nd(4, 1, seeded_rng(0)))
        assert S.dim == 3 and S.gap_ratio > 1e4

    def test_to_dict_json(self):
        S = stabilizer_lie_algebra(sample_qg_nd(3, 1, seeded_rng(0)))
        data = json.loads(json.dumps(S.to_dict()))
        assert data["dim"] == 2 and len(data["basis"]) == 2


class TestAbelian:
    def test_small(self):
        assert is_abelian(stabilizer_lie_algebra(sample_qg_nd(3, 4, seeded_rng(0))))

    def test_psu2(self):
        assert not is_abelian(stabilizer_lie_algebra(from_generators(2, [])))


class TestDegreeCommutant:
    def test_identity(self):
        V = sample_qg_nd(3, 2, seeded_rng(0))
        assert degree_commutant_check(V, np.eye(3)) == 0

    def test_diagonal_in_eigenbasis(self):
        V = sample_qg_nd(4, 3, seeded_rng(1))
        _, Q = eig_hermitian(degree_matrix(V))
        U = Q @ np.diag(np.exp(1j * np.array([0.3, 1.1, -2.0, 0.7]))) @ Q.conj().T
        assert degree_commutant_check(V, U) < 1e-9

    def test_generic_positive(self):
        V = sample_qg_nd(4, 3, seeded_rng(1))
        U = unitary_group.rvs(4, random_state=np.random.default_rng(0))
        assert degree_commutant_check(V, U) > 1e-3

    def test_not_unitary(self):
        with pytest.raises(NotUnitaryError):
            degree_commutant_check(sample_qg_nd(2, 1, seeded_rng(0)), 2 * np.eye(2))


class TestVerifyAutomorphism:
    def test_scalar(self):
        V = sample_qg_nd(3, 3, seeded_rng(0))
        r = verify_automorphism(V, np.exp(0.4j) * np.eye(3))
        assert r.span < 1e-20 and r.adjacency < 1e-20

    def test_graph_permutation(self):
        G = Graph.cycle(5)
        V = from_graph(G)
        perm = [1, 2, 3, 4, 0]
        U = np.eye(5)[:, perm]  # U e_v = e_perm[v]
        assert G.permuted(perm) == G
        r = verify_automorphism(V, U)
        assert r.span < 1e-20 and r.adjacency < 1e-20

    def test_non_automorphism_permutation(self):
        V = from_graph(Graph.path(3))
        U = np.eye(3)[:, [1, 0, 2]]
        assert verify_automorphism(V, U).span > 0.1

    @given(st.integers(2, 5), st.integers(0, 2**32))
    def test_forms_agree(self, n, seed):
        gen = np.random.default_rng(seed)
        d = int(gen.integers(0, n * n))
        V = sample_qg_nd(n, d, seeded_rng(seed))
        U = unitary_group.rvs(n, random_state=gen)
        r = verify_automorphism(V, U)
        assert abs(r.span - r.adjacency) < 1e-8 * max(1.0, r.span)

    def test_random_order_one(self):
        V = sample_qg_nd(4, 5, seeded_rng(0))
        U = unitary_group.rvs(4, random_state=np.random.default_rng(1))
        assert verify_automorphism(V, U).span > 0.1

    def test_not_unitary(self):
        with pytest.raises(NotUnitaryError):
            verify_automorphism(sample_qg_nd(2, 1, seeded_rng(0)), np.ones((2, 2)))


class TestDistanceFromScalars:
    def test_values(self):
        assert distance_from_scalars(np.exp(1j) * np.eye(3)) == pytest.approx(0, abs=1e-7)
        assert distance_from_scalars(np.diag([1, -1])) == pytest.approx(2.0)

    @given(st.integers(1, 5), st.integers(0, 2**32))
    def test_brute_minimum(self, n, seed):
        U = unitary_group.rvs(n, random_state=np.random.default_rng(seed)) if n > 1 else np.eye(1)
        phases = np.exp(1j * np.linspace(0, 2 * np.pi, 4001))
        brute = min(np.linalg.norm(U - lam * np.eye(n)) for lam in phases)
        assert distance_from_scalars(U) <= brute + 1e-9
        assert distance_from_scalars(U) >= brute - 1e-2


class TestIntegerDiagonalization:
    def test_simple(self):
        diag, R = _diagonalize_integer([[2, 4], [6, 8]])
        assert sorted(diag) == [2, 2] or np.prod(diag) == 8

    @given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=4))
    def test_determinant_and_unimodular(self, rows):
        diag, R = _diagonalize_integer(rows)
        R = np.array(R, dtype=np.int64)
        assert abs(round(np.linalg.det(R))) == 1
        M = np.array(rows, dtype=np.int64) @ R
        # column k of M R is a multiple-free witness: its gcd is diag[k]
        for k, s in enumerate(diag):
            assert np.gcd.reduce(np.abs(M[:, k])) % max(s, 1) == 0 or s == 0
        assert len([s for s in diag if s]) == np.linalg.matrix_rank(np.array(rows, dtype=float))


class TestDiagonalPhaseSolver:
    def test_z2(self):
        V = from_generators(2, [hermitian_basis_f(0, 1, 2)])
        sol = diagonal_phase_solver(V)
        assert sol.torus_rank == 0 and sol.discrete_orders == [2]
        (g,) = sol.generators
        assert distance_from_scalars(g) > 1
        assert np.allclose(g @ g, g[0, 0] ** 2 * np.eye(2))

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_diagonal_algebra(self, n):
        sol = diagonal_phase_solver(from_generators(n, traceless_diagonal_basis(n)))
        assert sol.torus_rank == n - 1 and not sol.discrete_orders

    @pytest.mark.parametrize("n", [6, 7])
    def test_explicit_tuples_trivial(self, n):
        for d in (4, 8, 15, n * n - 5):
            V = explicit_rigid_tuple(n, d, seeded_rng(d))
            sol = diagonal_phase_solver(V)
            assert sol.is_trivial and sol.complete

    def test_full_matrix_algebra(self):
        # every diagonal unitary preserves M_n
        sol = diagonal_phase_solver(full_system(3))
        assert sol.torus_rank == 2 and not sol.discrete_orders

    def test_eigenbasis_mode(self):
        V = sample_qg_nd(3, 1, seeded_rng(4))
        sol = diagonal_phase_solver(V, in_degree_eigenbasis=True)
        assert sol.torus_rank == 2 and sol.complete

    def test_eigenbasis_needs_simple_spectrum(self):
        with pytest.raises(UnsupportedPatternError):
            diagonal_phase_solver(from_generators(3, []), in_degree_eigenbasis=True)

    def test_ambiguous_pattern(self):
        eps = 1e-9
        X = np.diag([1.0, -1.0, 0.0]) + eps * hermitian_basis_f(0, 2, 3)
        with pytest.raises(UnsupportedPatternError):
            diagonal_phase_solver(from_generators(3, [X]))

    @pytest.mark.parametrize("gens", [
        [hermitian_basis_f(0, 1, 3) + hermitian_basis_f(1, 2, 3)],
        [hermitian_basis_f(0, 1, 4), hermitian_basis_f(2, 3, 4) + hermitian_basis_f(1, 0, 4)],
        [hermitian_basis_f(0, 1, 2)],
        [np.diag([1.0, -1.0, 0.0]), hermitian_basis_f(0, 2, 3)],
    ])
    def test_generators_are_automorphisms(self, gens):
        V = from_generators(gens[0].shape[0], gens)
        sol = diagonal_phase_solver(V)
        for g in sol.generators:
            assert verify_automorphism(V, g).span < 1e-12

    def test_graph_system_torus(self):
        # matrix units of any graph are preserved by all diagonal unitaries
        sol = diagonal_phase_solver(from_graph(Graph.path(4)))
        assert sol.torus_rank == 3

    def test_to_dict(self):
        data = json.loads(json.dumps(diagonal_phase_solver(from_generators(2, [hermitian_basis_f(0, 1, 2)])).to_dict()))
        assert data["discrete_orders"] == [2]


class TestDiscreteSearch:
    def test_full_matrix_algebra(self):
        rep = discrete_aut_search(full_system(3), 3, seeded_rng(0))
        assert rep.full_stabilizer and rep.converged_fraction == 1.0
        assert rep.label == "full stabilizer"

    def test_generic_no_candidate(self):
        V = sample_qg_nd(3, 3, seeded_rng(5))
        rep = discrete_aut_search(V, 100, seeded_rng(6))
        assert rep.label == "no discrete candidate found"
        assert all(c.residual < 1e-10 for c in rep.candidates)
        assert not rep.nonscalar_candidates()

    def test_degenerate_finds_nonscalar(self):
        V = from_generators(3, [np.diag([2.0, -1.0, -1.0])])
        rep = discrete_aut_search(V, 10, seeded_rng(1))
        assert rep.nonscalar_candidates()
        for c in rep.candidates:
            assert verify_automorphism(V, c.unitary).span < 1e-9

    def test_deterministic(self):
        V = sample_qg_nd(3, 2, seeded_rng(1))
        a = discrete_aut_search(V, 4, seeded_rng(2)).to_dict()
        b = discrete_aut_search(V, 4, seeded_rng(2)).to_dict()
        assert json.dumps(a) == json.dumps(b)

    def test_restarts_positive(self):
        with pytest.raises(ValueError):
            discrete_aut_search(from_generators(2, []), 0, seeded_rng(0))
