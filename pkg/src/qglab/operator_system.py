"""Operator systems V in M_n and their quantum adjacency matrices.

A subspace V, the orthogonal projection onto it (an element of
``M_n (x) M_n^op``) and the quantum adjacency matrix ``A(x) = n sum_i A_i x A_i*``
carry the same information. This module moves between the three and checks
the laws that characterize quantum adjacency matrices.

Conventions
-----------
* ``vec`` is column-major: ``vec(x)[a + n*b] = x[a, b]``. A linear map on
  M_n is stored as the ``n^2 x n^2`` matrix ``S`` with
  ``vec(A(x)) = S @ vec(x)``.
* Elements of ``M_n (x) M_n`` are vectorized factor by factor, first factor
  fastest: ``e_ab (x) e_cd`` sits at ``a + n*b + n^2*c + n^3*d``.
* ``M_n^op`` is represented inside ``M_n`` through the transpose, so the
  Choi element ``(1/n) sum_ij A(e_ij) (x) e_ji`` of ``M_n (x) M_n^op`` is
  stored as the ordinary matrix ``(1/n) sum_ij A(e_ij) (x) e_ij``. With this
  choice ordinary matrix multiplication is the product of
  ``M_n (x) M_n^op`` and a quantum adjacency matrix has a Choi matrix that
  is an orthogonal projection.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .exceptions import (
    ExhaustedRetriesError,
    InvalidOperatorSystemError,
    LinearlyDependentError,
    NotReflexiveError,
    NotSymmetricError,
    ParameterOutOfRangeError,
)
from .graphs import Graph
from .matrix_core import (
    GAP_TOL,
    TOL_RANK,
    _orthogonalize,
    from_hermitian_coords,
    hermitian_basis_f,
    hermitian_coords,
    hermitian_frame,
    make_traceless,
    simple_spectrum,
)
from .rng import as_generator
from .validation import check_matrix_stack, check_size, check_square


# ---------------------------------------------------------------------------
# Operator systems


@dataclass(frozen=True, eq=False)
class OperatorSystem:
    """An operator subsystem of M_n stored as an orthonormal Hermitian basis.

    ``basis[0]`` is always ``1/sqrt(n)``; ``basis[1:]`` is traceless. The
    complex span of the basis is the operator system; the real span is its
    self-adjoint part.
    """

    n: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = check_matrix_stack(self.basis, self.n, name="basis").copy()
        if B.shape[0] == 0:
            raise InvalidOperatorSystemError("an operator system contains the identity")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def traceless_part(self):
        return self.basis[1:]

    def __repr__(self):
        return f"OperatorSystem(n={self.n}, dim={self.dim})"

    def check(self, tol=1e-9):
        """Raise :class:`InvalidOperatorSystemError` unless all invariants hold."""
        n, B = self.n, self.basis
        gram = np.einsum("axy,bxy->ab", B.conj(), B)
        if np.max(np.abs(gram - np.eye(self.dim))) > tol:
            raise InvalidOperatorSystemError("basis is not orthonormal")
        if np.max(np.abs(B - B.conj().transpose(0, 2, 1))) > tol:
            raise InvalidOperatorSystemError("basis elements must be Hermitian")
        if np.max(np.abs(B[0] - np.eye(n) / np.sqrt(n))) > tol:
            raise InvalidOperatorSystemError("basis[0] must be the normalized identity")
        if self.dim > 1 and np.max(np.abs(np.trace(B[1:], axis1=1, axis2=2))) > tol:
            raise InvalidOperatorSystemError("basis[1:] must be traceless")
        return self

    def to_dict(self):
        return {
            "n": self.n,
            "dim": self.dim,
            "basis": np.stack([self.basis.real, self.basis.imag], axis=-1).tolist(),
        }

    @classmethod
    def from_dict(cls, data, tol=1e-9):
        try:
            n, dim = int(data["n"]), int(data["dim"])
            raw = np.asarray(data["basis"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidOperatorSystemError(f"malformed operator system: {exc}") from exc
        if raw.shape != (dim, n, n, 2):
            raise InvalidOperatorSystemError(
                f"basis has shape {raw.shape}, expected {(dim, n, n, 2)}"
            )
        return cls(n, raw[..., 0] + 1j * raw[..., 1]).check(tol)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str, tol=1e-9):
        return cls.from_dict(json.loads(text), tol)


def from_generators(n, generators, tol_rank=TOL_RANK) -> OperatorSystem:
    """The operator system ``span(1, X_1, ..., X_d)``.

    Generators are made traceless first. Scalar generators (which vanish
    after that step) add nothing and are skipped; any other linear
    dependence raises :class:`LinearlyDependentError`.
    """
    n = check_size(n)
    gens = check_matrix_stack(generators, n, name="generators")
    basis = [np.eye(n, dtype=complex) / np.sqrt(n)]
    for k, g in enumerate(gens):
        t = make_traceless(g)
        if np.linalg.norm(t) <= tol_rank * max(np.linalg.norm(g), np.finfo(float).tiny):
            continue
        basis.append(_orthogonalize(t, basis, tol_rank, k))
    return OperatorSystem(n, np.array(basis))


def from_graph(adjacency) -> OperatorSystem:
    """Operator system ``span{e_ij : (i, j) in R}`` of a reflexive symmetric
    relation R.

    A :class:`Graph` gets a loop at every vertex first. A raw 0/1 matrix is
    taken as the relation itself and must be reflexive and symmetric.
    """
    if isinstance(adjacency, Graph):
        R = adjacency.adjacency + np.eye(adjacency.n, dtype=np.int64)
    else:
        R = np.asarray(adjacency)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValueError("relation must be a square 0/1 matrix")
        R = R != 0
        if not np.all(np.diag(R)):
            raise NotReflexiveError("relation must contain the diagonal")
        if not np.array_equal(R, R.T):
            raise NotSymmetricError("relation must be symmetric")
    R = np.asarray(R) != 0
    n = R.shape[0]
    frame = hermitian_frame(n)
    off = [R[i, j] for i in range(n) for j in range(n) if i != j]
    keep = np.concatenate([np.ones(n, dtype=bool), np.array(off, dtype=bool)])
    return OperatorSystem(n, frame[keep])


def project(V: OperatorSystem, x):
    """Orthogonal projection of ``x`` onto V (trace inner product)."""
    x = check_square(x, "x")
    if x.shape[0] != V.n:
        raise ValueError(f"size mismatch: x is {x.shape[0]}x{x.shape[0]}, V lives in M_{V.n}")
    coeffs = np.einsum("kxy,xy->k", V.basis.conj(), x)
    return np.einsum("k,kxy->xy", coeffs, V.basis)


def projection_superoperator(V: OperatorSystem):
    """``n^2 x n^2`` matrix of :func:`project` (column-major vec)."""
    vecs = V.basis.transpose(0, 2, 1).reshape(V.dim, -1)  # rows are vec(B_k)
    return vecs.T @ vecs.conj()


def orthogonal_complement_system(V: OperatorSystem) -> OperatorSystem:
    """``span{1}`` plus the orthogonal complement of V's traceless part inside
    the traceless Hermitian matrices. Its dimension is ``n^2 - dim V + 1``."""
    n = V.n
    coords = hermitian_coords(V.basis, n)
    comp = null_space(coords)  # orthonormal columns, all orthogonal to the identity
    mats = from_hermitian_coords(comp.T, n)
    basis = np.concatenate([(np.eye(n) / np.sqrt(n))[None], mats])
    return OperatorSystem(n, basis)


def degree_matrix(V: OperatorSystem):
    """``D = A(1) = n sum_i A_i^2``. Its normalized trace ``Tr(D)/n`` is ``dim V``."""
    return V.n * np.einsum("kxy,kyz->xz", V.basis, V.basis)


# ---------------------------------------------------------------------------
# Superoperators


def vec(x):
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, n):
    return np.asarray(v).reshape(n, n, order="F")


@dataclass(frozen=True, eq=False)
class Superoperator:
    """A linear map on M_n as an ``n^2 x n^2`` matrix on column-major vectors."""

    n: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        S = np.asarray(self.matrix, dtype=complex)
        if S.shape != (self.n**2, self.n**2):
            raise ValueError(f"matrix must be {self.n**2}x{self.n**2}, got {S.shape}")
        object.__setattr__(self, "matrix", S)

    def __repr__(self):
        return f"Superoperator(n={self.n})"

    def __call__(self, x):
        return unvec(self.matrix @ vec(x), self.n)

    @classmethod
    def from_function(cls, n, f):
        cols = []
        for k in range(n * n):
            e = np.zeros(n * n, dtype=complex)
            e[k] = 1
            cols.append(vec(f(unvec(e, n))))
        return cls(n, np.array(cols).T)

    @classmethod
    def from_kraus(cls, kraus, scale=1.0):
        """``x -> scale * sum_k K_k x K_k*``."""
        K = check_matrix_stack(kraus)
        n = K.shape[1]
        S = np.einsum("kij,kab->iajb", K.conj(), K).reshape(n * n, n * n)
        return cls(n, scale * S)

    @classmethod
    def identity(cls, n):
        return cls(n, np.eye(n * n))

    @property
    def choi(self):
        """Choi element ``(1/n) sum_ij A(e_ij) (x) e_ij`` as an ``n^2 x n^2`` matrix."""
        n = self.n
        T = self.matrix.reshape(n, n, n, n)  # T[b, a, d, c] = S[a + n b, c + n d]
        return T.transpose(1, 3, 0, 2).reshape(n * n, n * n) / n

    @classmethod
    def from_choi(cls, choi):
        C = check_square(choi, "choi")
        n = int(round(np.sqrt(C.shape[0])))
        if n * n != C.shape[0]:
            raise ValueError("Choi matrix side must be a perfect square")
        T = (n * C.reshape(n, n, n, n)).transpose(2, 0, 3, 1)
        return cls(n, T.reshape(n * n, n * n))

    def choi_action(self):
        """Matrix of ``x -> sum_i P_i x Q_i`` where ``sum_i P_i (x) Q_i`` is the
        Choi element viewed in ``M_n (x) M_n^op`` (left-right multiplication)."""
        n = self.n
        C4 = self.choi.reshape(n, n, n, n)  # C4[a, e, b, d]
        return C4.transpose(1, 0, 3, 2).reshape(n * n, n * n)

    def adjoint(self):
        """Adjoint with respect to the ``tau`` inner product."""
        return Superoperator(self.n, self.matrix.conj().T)

    def kernel_tensor(self):
        """``K[a, b, p, q] = A(e_pq)[a, b]``."""
        n = self.n
        return self.matrix.reshape(n, n, n, n).transpose(1, 0, 3, 2)

    @classmethod
    def from_kernel_tensor(cls, K):
        n = K.shape[0]
        return cls(n, K.transpose(1, 0, 3, 2).reshape(n * n, n * n))


def multiplication(n):
    """Matrix of ``m: M_n (x) M_n -> M_n``, ``e_ab (x) e_cd -> delta_bc e_ad``."""
    m = np.zeros((n * n, n**4))
    for a in range(n):
        for b in range(n):
            for d in range(n):
                m[a + n * d, a + n * b + n * n * b + n**3 * d] = 1.0
    return m


def mult_adjoint(n):
    """Matrix of ``m*: M_n -> M_n (x) M_n``, ``m*(e_ij) = (1/n) sum_k e_ik (x) e_kj``.

    This is the adjoint of :func:`multiplication` for the inner products
    induced by ``tau`` on both sides.
    """
    ms = np.zeros((n**4, n * n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                ms[i + n * k + n * n * k + n**3 * j, i + n * j] = 1.0 / n
    return ms


def tensor_superoperator(S1, S2):
    """Matrix of ``S1 (x) S2`` on ``M_n (x) M_n`` (first factor fastest)."""
    return np.kron(np.asarray(S2), np.asarray(S1))


def quantum_adjacency(V: OperatorSystem) -> Superoperator:
    """``A(x) = n sum_i A_i x A_i*`` over the orthonormal basis of V."""
    return Superoperator.from_kraus(V.basis, scale=V.n)


def idempotent_composite(A: Superoperator, explicit=False):
    """``m (A (x) A) m*`` as a :class:`Superoperator`.

    The default contracts ``(1/n) sum_j A(e_ij) A(e_jl)`` directly; with
    ``explicit=True`` the three matrices are multiplied out (``O(n^8)``
    memory, intended for cross-checks at small n).
    """
    n = A.n
    if explicit:
        S = multiplication(n) @ tensor_superoperator(A.matrix, A.matrix) @ mult_adjoint(n)
        return Superoperator(n, S)
    K = A.kernel_tensor()
    K2 = np.einsum("abpq,bdqs->adps", K, K) / n
    return Superoperator.from_kernel_tensor(K2)


def check_idempotent_law(A: Superoperator) -> float:
    """Relative residual ``||m(A (x) A)m* - A||_F / ||A||_F``."""
    norm = np.linalg.norm(A.matrix)
    diff = np.linalg.norm(idempotent_composite(A).matrix - A.matrix)
    return float(diff / norm) if norm > 0 else float(diff)


def check_symmetric(A: Superoperator) -> float:
    """Relative residual of self-adjointness for the ``tau`` inner product."""
    norm = np.linalg.norm(A.matrix)
    diff = np.linalg.norm(A.matrix - A.matrix.conj().T)
    return float(diff / norm) if norm > 0 else float(diff)


def reflexivity_image(A: Superoperator, explicit=False):
    """``m (A (x) Id) m* (1)``, equal to ``(1/n) sum_ij A(e_ij) e_ji``."""
    n = A.n
    if explicit:
        S = multiplication(n) @ tensor_superoperator(A.matrix, np.eye(n * n)) @ mult_adjoint(n)
        return unvec(S @ vec(np.eye(n)), n)
    K = A.kernel_tensor()
    return np.einsum("aqdq->ad", K) / n


def check_reflexive(A: Superoperator) -> float:
    """``||m(A (x) Id)m*(1) - 1||_F``; zero iff ``1`` lies in the subspace."""
    return float(np.linalg.norm(reflexivity_image(A) - np.eye(A.n)))


def check_cp(A: Superoperator) -> float:
    """Smallest eigenvalue of the Choi matrix (``>= 0`` iff completely positive)."""
    C = A.choi
    return float(np.linalg.eigvalsh((C + C.conj().T) / 2)[0])


# ---------------------------------------------------------------------------
# Explicit constructions with diagonal degree matrices


def diag_tuple_for_simple_spectrum(n, k, shift, rng, gap_tol=GAP_TOL, max_retries=1000):
    """Traceless orthonormal diagonals ``u_1..u_k`` with ``shift + n sum u_j^2``
    free of repeated entries.

    ``shift`` is the diagonal of the rest of the degree matrix (a vector of
    length n or a diagonal matrix). Candidates are the first k rows of a
    Haar-random orthonormal frame of the traceless diagonal subspace;
    failures are resampled, which terminates quickly because bad draws form
    a measure-zero set.
    """
    n = check_size(n)
    if not 1 <= k <= n - 2:
        raise ParameterOutOfRangeError(f"need 1 <= k <= n - 2, got k={k}, n={n}")
    shift = np.asarray(shift)
    if shift.ndim == 2:
        shift = np.diag(shift)
    shift = np.real(shift).astype(float)
    if shift.shape != (n,):
        raise ValueError(f"shift must have length {n}")
    gen = as_generator(rng)
    for _ in range(max_retries):
        z = gen.standard_normal((n, k))
        z -= z.mean(axis=0)
        q, _ = np.linalg.qr(z)
        diag = shift + n * np.sum(q**2, axis=1)
        if simple_spectrum(np.sort(diag), gap_tol):
            return [np.diag(q[:, j]).astype(complex) for j in range(k)]
    raise ExhaustedRetriesError(f"no simple-spectrum diagonal tuple after {max_retries} draws")


def _rigid_core_pairs(n):
    """Support pairs (1-indexed, i < j) of the three off-diagonal generators."""
    if n == 6:
        x1 = [(1, 2), (3, 4), (5, 6)]
        x2 = [(2, 3), (4, 5), (1, 6)]
        y = [(1, 5), (3, 6)]
    else:
        x1 = [(2 * i, 2 * i + 1) for i in range(1, (n - 1) // 2 + 1)]
        x2 = [(2 * i - 1, 2 * i) for i in range(1, n // 2 + 1)]
        y = [(1, 4), (2, 5), (3, 7)]
    return x1, x2, y


def rigid_core_generators(n):
    """The three generators ``X_1, X_2, Y`` (sums of real ``f_ij``), unnormalized."""
    return [
        sum(hermitian_basis_f(i - 1, j - 1, n) for i, j in pairs)
        for pairs in _rigid_core_pairs(n)
    ]


def _free_f_indices(n):
    used = {frozenset(p) for pairs in _rigid_core_pairs(n) for p in pairs}
    return [
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and frozenset((i + 1, j + 1)) not in used
    ]


def explicit_rigid_max_direct(n):
    return 3 + len(_free_f_indices(n)) + (n - 2)


def explicit_rigid_tuple(n, d, rng, gap_tol=GAP_TOL) -> OperatorSystem:
    """An explicit d-tuple with diagonal, simple-spectrum degree matrix and
    trivial automorphism group (``n >= 6``, ``4 <= d <= n^2 - 5``).

    Three off-diagonal generators pin all diagonal phases to a common value.
    The tuple is filled with unused ``f_ij`` in lexicographic order, then with
    ``1 <= k <= n - 2`` random traceless diagonals chosen so the degree
    matrix has simple spectrum. For d beyond what fits directly the
    orthogonal complement of the ``n^2 - 1 - d`` construction is returned; it
    has the same symmetries and a degree matrix ``(n^2 + 1) 1 - D``.
    """
    n = check_size(n, minimum=6)
    if not 4 <= d <= n * n - 5:
        raise ParameterOutOfRangeError(f"need 4 <= d <= n^2 - 5 = {n * n - 5}, got d={d}")
    if d > explicit_rigid_max_direct(n):
        return orthogonal_complement_system(explicit_rigid_tuple(n, n * n - 1 - d, rng, gap_tol))
    core = [g / np.linalg.norm(g) for g in rigid_core_generators(n)]
    free = _free_f_indices(n)
    extra = min(len(free), d - 4)
    k = d - 3 - extra
    offdiag = core + [hermitian_basis_f(i, j, n) for i, j in free[:extra]]
    shift = 1.0 + n * np.real(np.einsum("kxy,kyx->x", np.array(offdiag), np.array(offdiag)))
    diags = diag_tuple_for_simple_spectrum(n, k, shift, rng, gap_tol)
    try:
        return from_generators(n, offdiag + diags)
    except LinearlyDependentError as exc:  # pragma: no cover - construction is orthonormal
        raise AssertionError("explicit tuple is orthonormal by construction") from exc
