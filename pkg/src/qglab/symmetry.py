"""Automorphisms of operator systems under unitary conjugation.

The identity component of ``{U : U V U* = V}`` modulo scalars is certified by
its Lie algebra (:func:`stabilizer_lie_algebra`). Discrete symmetries are
handled exactly for diagonal unitaries (:func:`diagonal_phase_solver`) and
probed heuristically on the whole unitary group (:func:`discrete_aut_search`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm
from scipy.sparse.csgraph import connected_components
from scipy.stats import unitary_group

from .exceptions import UnsupportedPatternError
from .matrix_core import eig_hermitian, hermitian_frame, simple_spectrum
from .operator_system import (
    OperatorSystem,
    degree_matrix,
    orthogonal_complement_system,
    quantum_adjacency,
)
from .rng import as_generator
from .validation import check_unitary

RANK_RTOL = 1e-10


def _encode_matrices(mats):
    mats = np.asarray(mats)
    return np.stack([mats.real, mats.imag], axis=-1).tolist()


# ---------------------------------------------------------------------------
# Lie algebra of the stabilizer


@dataclass(frozen=True, eq=False)
class StabilizerAlgebra:
    """Real Lie algebra of traceless skew-Hermitian H with ``[H, V] ⊆ V``.

    ``singular_values`` are those of the constraint matrix (descending) and
    ``threshold`` is the cut below which they count as zero.
    """

    n: int
    basis: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    threshold: float
    num_constraints: int

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.n * self.n - 1 - self.dim

    @property
    def gap_ratio(self) -> Optional[float]:
        """Separation of the kept and dropped singular values at the cut.

        Smallest kept value over the largest dropped one (floored at the
        round-off level). When nothing is dropped the smallest kept value is
        compared with the cut itself. ``None`` when there are no nonzero
        constraints at all.
        """
        s = self.singular_values
        r = self.rank
        if r == 0:
            return None
        kept = s[r - 1]
        size = max(self.num_constraints, self.n * self.n - 1)
        if r == self.n * self.n - 1:
            return float(kept / self.threshold)
        dropped = s[r] if r < s.size else 0.0
        floor = np.finfo(float).eps * size * s[0]
        return float(kept / max(dropped, floor))

    def to_dict(self):
        gap = self.gap_ratio
        return {
            "n": self.n,
            "dim": self.dim,
            "num_constraints": self.num_constraints,
            "threshold": self.threshold,
            "gap_ratio": gap,
            "singular_values": [float(x) for x in self.singular_values],
            "basis": _encode_matrices(self.basis),
        }


def _commutator_constraints(V: OperatorSystem):
    n = V.n
    F = np.asarray(hermitian_frame(n)[1:])
    B = V.basis[1:]
    comp = orthogonal_complement_system(V).basis[1:]
    N = n * n - 1
    if B.shape[0] == 0 or comp.shape[0] == 0:
        return np.zeros((0, N))
    # i[F_a, B_j] is Hermitian; its components along the complement must vanish
    comm = 1j * (np.einsum("axy,jyz->ajxz", F, B) - np.einsum("jxy,ayz->ajxz", B, F))
    L = np.real(np.einsum("mxy,ajxy->jma", comp.conj(), comm))
    return L.reshape(-1, N)


def stabilizer_lie_algebra(V: OperatorSystem, tol_solve=RANK_RTOL) -> StabilizerAlgebra:
    """Traceless skew-Hermitian H with ``(I - P_V)[H, B_j] = 0`` for all j.

    The constraints are linear over the ``n^2 - 1`` real coordinates of H. A
    singular value counts as zero below
    ``max(rows, n^2 - 1) * sigma_max * tol_solve``; the kernel is read off the
    right singular vectors and is orthonormal for the trace pairing.
    """
    n = V.n
    N = n * n - 1
    F = np.asarray(hermitian_frame(n)[1:])
    L = _commutator_constraints(V)
    m = L.shape[0]
    if m == 0:
        s = np.zeros(0)
        vt = np.eye(N)
        threshold = 0.0
        rank = 0
    else:
        _, s, vt = np.linalg.svd(L, full_matrices=True)
        threshold = max(m, N) * (s[0] if s.size else 0.0) * tol_solve
        rank = int(np.sum(s > threshold)) if s.size and s[0] > 0 else 0
    coeffs = vt[rank:]
    basis = 1j * np.einsum("ka,axy->kxy", coeffs, F)
    return StabilizerAlgebra(n, basis, s, float(threshold), m)


def is_abelian(S: StabilizerAlgebra, tol=1e-9) -> bool:
    H = S.basis
    for a in range(S.dim):
        for b in range(a + 1, S.dim):
            if np.linalg.norm(H[a] @ H[b] - H[b] @ H[a]) >= tol:
                return False
    return True


# ---------------------------------------------------------------------------
# Residual checks for a given unitary


class AutomorphismResidual(NamedTuple):
    span: float
    adjacency: float


def _outside_part(V: OperatorSystem, mats):
    coeffs = np.einsum("kxy,jxy->jk", V.basis.conj(), mats)
    return mats - np.einsum("jk,kxy->jxy", coeffs, V.basis)


def degree_commutant_check(V: OperatorSystem, U, tol=1e-9) -> float:
    """``||U D - D U||_F``; vanishes for every automorphism U."""
    U = check_unitary(U, tol)
    D = degree_matrix(V)
    return float(np.linalg.norm(U @ D - D @ U))


def verify_automorphism(V: OperatorSystem, U, tol=1e-9) -> AutomorphismResidual:
    """Residuals of ``U V U* = V`` in two equivalent forms.

    ``span`` is ``sum_j ||(I - P_V)(U B_j U*)||^2`` over the orthonormal
    basis. ``adjacency`` is ``sum_x ||U* A(x) U - A(U* x U)||^2`` over matrix
    units, divided by ``2 n^2``; with that normalization the two agree
    exactly in exact arithmetic.
    """
    U = check_unitary(U, tol)
    n = V.n
    conj = U @ V.basis @ U.conj().T
    span = float(np.sum(np.abs(_outside_part(V, conj)) ** 2))
    S = quantum_adjacency(V).matrix
    C = np.kron(U.T, U.conj().T)  # vec(U* x U)
    adjacency = float(np.linalg.norm(C @ S - S @ C) ** 2 / (2 * n * n))
    return AutomorphismResidual(span, adjacency)


def distance_from_scalars(U) -> float:
    """``min_{|lam| = 1} ||U - lam 1||_F`` for unitary U."""
    n = U.shape[0]
    return float(math.sqrt(max(2 * n - 2 * abs(np.trace(U)), 0.0)))


# ---------------------------------------------------------------------------
# Diagonal unitaries: exact phase constraints


def _diagonalize_integer(M):
    """Diagonalize an integer matrix by unimodular row and column operations.

    Returns ``(diag, R)`` with ``L M R = diag(d_1, ..., d_r, 0, ...)`` for
    some unimodular L; only the column transform R is tracked.
    """
    A = [list(map(int, row)) for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    R = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_cols(a, b):
        for row in A:
            row[a], row[b] = row[b], row[a]
        for row in R:
            row[a], row[b] = row[b], row[a]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        for row in A:
            row[dst] -= q * row[src]
        for row in R:
            row[dst] -= q * row[src]

    diag = []
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        A[t], A[best[0]] = A[best[0]], A[t]
        swap_cols(t, best[1])
        while True:
            for i in range(t + 1, rows):
                q = A[i][t] // A[t][t]
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
            for j in range(t + 1, cols):
                q = A[t][j] // A[t][t]
                if q:
                    add_col(j, t, q)
            rest = [(i, t) for i in range(t + 1, rows) if A[i][t]]
            rest += [(t, j) for j in range(t + 1, cols) if A[t][j]]
            if not rest:
                break
            i, j = min(rest, key=lambda ij: abs(A[ij[0]][ij[1]]))
            if j == t:
                A[t], A[i] = A[i], A[t]
            else:
                swap_cols(t, j)
        diag.append(abs(A[t][t]))
        t += 1
    return diag, np.array(R, dtype=object)


@dataclass(frozen=True, eq=False)
class PhaseSolution:
    """Diagonal unitaries ``diag(u)`` preserving V, modulo scalars.

    The group is a torus of rank ``torus_rank`` times the finite abelian
    group generated by ``generators`` (orders in ``discrete_orders``). When
    ``complete`` is true the degree matrix is diagonal with simple spectrum
    in the working basis, so these are all automorphisms of V.
    """

    n: int
    torus_rank: int
    discrete_orders: list
    generators: list = field(repr=False)
    blocks: list = field(repr=False)
    complete: bool
    basis_change: np.ndarray = field(repr=False)

    @property
    def is_trivial(self) -> bool:
        return self.torus_rank == 0 and not self.discrete_orders

    @property
    def component_group_order(self) -> int:
        return int(np.prod(self.discrete_orders)) if self.discrete_orders else 1

    def to_dict(self):
        return {
            "n": self.n,
            "torus_rank": self.torus_rank,
            "discrete_orders": list(self.discrete_orders),
            "is_trivial": self.is_trivial,
            "complete": self.complete,
            "generators": _encode_matrices(self.generators) if self.generators else [],
        }


def _coupling_blocks(P, support, thresh):
    idx = np.flatnonzero(support)
    sub = np.abs(P[np.ix_(idx, idx)]) > thresh
    _, labels = connected_components(sub, directed=False)
    return [tuple(int(x) for x in idx[labels == c]) for c in range(labels.max() + 1)] if idx.size else []


def diagonal_phase_solver(
    V: OperatorSystem, in_degree_eigenbasis=False, tol_strict=1e-7, tol_loose=1e-11
) -> PhaseSolution:
    """All diagonal unitaries preserving V, up to scalars.

    Diagonal conjugation scales entry ``(i, j)`` by ``u_i conj(u_j)``. The
    complex span of V is invariant under such a scaling exactly when the
    scaling is constant on each block of the finest coordinate partition
    that splits V as a direct sum, and that partition is the connected
    components of the nonzero pattern of the orthogonal projector onto V.
    Each block yields integer relations among the phases, solved through a
    unimodular diagonalization.

    With ``in_degree_eigenbasis=True`` V is first rotated into an eigenbasis
    of its degree matrix (which must then have simple spectrum) and the
    generators are rotated back.

    Raises
    ------
    UnsupportedPatternError
        If the coupling pattern differs between the two thresholds, i.e.
        the support cannot be decided numerically.
    """
    n = V.n
    basis = V.basis
    Q = np.eye(n, dtype=complex)
    D = degree_matrix(V)
    if in_degree_eigenbasis:
        w, Q = eig_hermitian(D)
        if not simple_spectrum(w):
            raise UnsupportedPatternError("degree matrix does not have simple spectrum")
        basis = Q.conj().T @ basis @ Q
        D = np.diag(w)
    off = D - np.diag(np.diag(D))
    complete = bool(
        np.linalg.norm(off) <= 1e-9 * max(1.0, np.linalg.norm(D))
        and simple_spectrum(np.sort(np.real(np.diag(D))))
    )
    vecs = basis.reshape(basis.shape[0], -1)  # entry (i, j) at i*n + j
    P = vecs.T @ vecs.conj()
    scale = max(np.max(np.abs(P)), 1.0)
    weight = np.sqrt(np.clip(np.real(np.diag(P)), 0.0, None))  # amplitude scale, like P_ij
    support = weight > tol_loose * scale
    if not np.array_equal(support, weight > tol_strict * scale):
        raise UnsupportedPatternError("support of V is numerically ambiguous")
    blocks = _coupling_blocks(P, support, tol_strict * scale)
    if blocks != _coupling_blocks(P, support, tol_loose * scale):
        raise UnsupportedPatternError("coupling pattern of V is numerically ambiguous")

    rows = set()
    for block in blocks:
        i0, j0 = divmod(block[0], n)
        for c in block[1:]:
            i, j = divmod(c, n)
            row = [0] * n
            row[i] += 1
            row[j] -= 1
            row[i0] -= 1
            row[j0] += 1
            if any(row):
                rows.add(tuple(row))
    rows = sorted(rows)
    diag, R = _diagonalize_integer(rows) if rows else ([], np.eye(n, dtype=int).astype(object))
    rank = sum(1 for s in diag if s)
    discrete = [(k, s) for k, s in enumerate(diag) if s > 1]
    generators = []
    for k, s in discrete:
        phases = np.array([2 * math.pi * int(R[a, k]) / s for a in range(n)])
        generators.append(Q @ np.diag(np.exp(1j * phases)) @ Q.conj().T)
    return PhaseSolution(
        n=n,
        torus_rank=n - rank - 1,
        discrete_orders=[s for _, s in discrete],
        generators=generators,
        blocks=[[divmod(c, n) for c in b] for b in blocks],
        complete=complete,
        basis_change=Q,
    )


# ---------------------------------------------------------------------------
# Heuristic search over the unitary group


@dataclass(frozen=True)
class AutCandidate:
    unitary: np.ndarray = field(repr=False)
    residual: float
    distance_from_scalars: float


@dataclass(frozen=True, eq=False)
class AutSearchReport:
    candidates: list
    restarts: int
    converged_fraction: float
    full_stabilizer: bool
    scalar_tol: float
    final_residuals: list = field(repr=False, default_factory=list)

    def nonscalar_candidates(self):
        return [c for c in self.candidates if c.distance_from_scalars >= self.scalar_tol]

    @property
    def label(self) -> str:
        if self.full_stabilizer:
            return "full stabilizer"
        if self.nonscalar_candidates():
            return "non-scalar candidate found"
        return "no discrete candidate found"

    def to_dict(self):
        return {
            "restarts": self.restarts,
            "converged_fraction": self.converged_fraction,
            "full_stabilizer": self.full_stabilizer,
            "label": self.label,
            "scalar_tol": self.scalar_tol,
            "final_residuals": [float(x) for x in self.final_residuals],
            "candidates": [
                {
                    "residual": c.residual,
                    "distance_from_scalars": c.distance_from_scalars,
                    "unitary": _encode_matrices(c.unitary),
                }
                for c in self.candidates
            ],
        }


def _search_objective(V, U):
    M = U @ V.basis[1:] @ U.conj().T
    R = _outside_part(V, M)
    f = float(np.sum(np.abs(R) ** 2))
    # steepest-descent direction in the Lie algebra for U <- exp(t S) U
    S = np.einsum("jxy,jyz->xz", M, R) - np.einsum("jxy,jyz->xz", R, M)
    return f, S


def _descend(V, U, max_iter, grad_tol):
    f, S = _search_objective(V, U)
    step = 1.0
    for it in range(max_iter):
        g2 = float(np.sum(np.abs(S) ** 2))
        if 2 * math.sqrt(g2) < grad_tol or f == 0.0:
            break
        step = min(step * 2.0, 1e3)
        while True:
            U_new = expm(step * S) @ U
            f_new, S_new = _search_objective(V, U_new)
            if f_new <= f - 1e-4 * step * 2 * g2 or step < 1e-16:
                break
            step /= 2.0
        if step < 1e-16:
            break
        U, f, S = U_new, f_new, S_new
        if it % 50 == 49:
            u, _, vh = np.linalg.svd(U)
            U = u @ vh
            f, S = _search_objective(V, U)
    return U, f


def discrete_aut_search(
    V: OperatorSystem,
    restarts,
    rng,
    search_tol=1e-10,
    max_iter=500,
    grad_tol=1e-12,
    scalar_tol=1e-4,
) -> AutSearchReport:
    """Look for unitaries preserving V by local descent from random starts.

    Minimizes ``f(U) = sum_j ||(I - P_V)(U B_j U*)||^2`` over the unitary
    group with steepest descent along ``U <- exp(t S) U`` and step halving.
    Every local minimum with ``f < search_tol`` is reported together with
    its distance from the scalars. Finding no non-scalar candidate is
    evidence, not proof, that the automorphism group is trivial.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    gen = as_generator(rng)
    n = V.n
    starts = [unitary_group.rvs(n, random_state=gen) if n > 1 else np.eye(1, dtype=complex)
              for _ in range(restarts)]
    candidates, finals = [], []
    for U0 in starts:
        U, f = _descend(V, np.asarray(U0, dtype=complex), max_iter, grad_tol)
        finals.append(f)
        if f < search_tol:
            U = U / np.linalg.det(U) ** (1.0 / n)
            candidates.append(AutCandidate(U, f, distance_from_scalars(U)))
    candidates.sort(key=lambda c: (c.residual, c.distance_from_scalars))
    return AutSearchReport(
        candidates=candidates,
        restarts=restarts,
        converged_fraction=len(candidates) / restarts,
        full_stabilizer=V.dim in (1, n * n),
        scalar_tol=scalar_tol,
        final_residuals=finals,
    )
