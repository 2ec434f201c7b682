"""Dense matrix arithmetic on M_n: trace pairings, orthonormalization, the
off-diagonal Hermitian family ``f_ij``, spectra and traceless GUE sampling.

Matrices are plain complex ``numpy`` arrays. Stacks of matrices have shape
``(k, n, n)``. Indices are zero-based throughout.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .exceptions import LinearlyDependentError, NotHermitianError
from .rng import as_generator
from .validation import check_matrix_stack, check_square, hermitian_defect

TOL_NUM = 1e-12
TOL_HERM = 1e-10  # relative to ||X||_F
TOL_EIG = 1e-9
GAP_TOL = 1e-8
TOL_RANK = 1e-10  # relative residual below which Gram-Schmidt declares dependence


def trace_inner(A, B) -> complex:
    """Hilbert-Schmidt pairing ``Tr(A* B)``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"size mismatch: {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B))


def tau(x) -> complex:
    """The functional ``n Tr(x)``, normalized so that ``tau(1) = n**2``."""
    x = check_square(x, "x")
    return complex(x.shape[0] * np.trace(x))


def make_traceless(X):
    X = check_square(X)
    n = X.shape[0]
    out = X.copy()
    out[np.diag_indices(n)] -= np.trace(X) / n
    return out


def hs_norm(X) -> float:
    return float(np.linalg.norm(X))


def gram_schmidt(mats, tol_rank=TOL_RANK):
    """Orthonormalize a tuple of matrices over the reals.

    Modified Gram-Schmidt followed by one re-orthogonalization pass, with
    respect to ``Re Tr(A* B)`` (which is the trace pairing itself on
    Hermitian inputs, so Hermitian inputs give Hermitian outputs). The order
    of the input is preserved.

    Raises
    ------
    LinearlyDependentError
        If some element has residual norm ``<= tol_rank * ||input||``.
    """
    mats = check_matrix_stack(mats)
    if mats.shape[0] == 0:
        raise ValueError("gram_schmidt needs a non-empty tuple")
    basis = []
    for k, v in enumerate(mats):
        q = _orthogonalize(v, basis, tol_rank, k)
        basis.append(q)
    return np.array(basis)


def _orthogonalize(v, basis, tol_rank, index=None):
    norm0 = np.linalg.norm(v)
    q = v.copy()
    for _ in range(2):
        for b in basis:
            q = q - np.real(np.vdot(b, q)) * b
    res = np.linalg.norm(q)
    if res <= tol_rank * norm0 or res == 0.0:
        where = "" if index is None else f" at position {index}"
        raise LinearlyDependentError(
            f"linearly dependent element{where} (residual {res:.3g}, norm {norm0:.3g})"
        )
    return q / res


def hermitian_basis_f(i: int, j: int, n: int):
    """Off-diagonal Hermitian unit ``f_ij``.

    ``(e_ij + e_ji)/sqrt(2)`` for ``i < j`` and ``(1j/sqrt(2)) (e_ij - e_ji)``
    for ``i > j``. The whole family is orthonormal and ``f_ij**2`` is
    ``(e_ii + e_jj)/2``.
    """
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"indices ({i}, {j}) out of range for n={n}")
    if i == j:
        raise ValueError("f_ij is only defined for i != j")
    f = np.zeros((n, n), dtype=complex)
    s = 1 / np.sqrt(2)
    if i < j:
        f[i, j] = f[j, i] = s
    else:
        f[i, j] = 1j * s
        f[j, i] = -1j * s
    return f


def traceless_diagonal_basis(n: int):
    """Generalized Gell-Mann diagonals: an orthonormal basis of traceless
    real diagonal matrices, shape ``(n - 1, n, n)``."""
    out = np.zeros((max(n - 1, 0), n, n), dtype=complex)
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1.0
        d[k] = -k
        out[k - 1] = np.diag(d / np.sqrt(k * (k + 1)))
    return out


@lru_cache(maxsize=32)
def _hermitian_frame(n: int):
    frame = np.concatenate(
        [
            (np.eye(n) / np.sqrt(n))[None].astype(complex),
            traceless_diagonal_basis(n),
            np.array(
                [hermitian_basis_f(i, j, n) for i in range(n) for j in range(n) if i != j]
            ).reshape(-1, n, n),
        ]
    )
    frame.setflags(write=False)
    return frame


def hermitian_frame(n: int):
    """Orthonormal real basis of the Hermitian n x n matrices.

    Index 0 is ``1/sqrt(n)``, followed by ``n - 1`` traceless diagonals and the
    ``n**2 - n`` matrices ``f_ij`` in lexicographic order of ``(i, j)``. The
    returned array is read-only and cached.
    """
    return _hermitian_frame(n)


def hermitian_coords(mats, n=None):
    """Real coordinates of Hermitian matrices in :func:`hermitian_frame`."""
    mats = check_matrix_stack(mats, n)
    frame = hermitian_frame(mats.shape[1])
    return np.real(np.einsum("axy,kxy->ka", frame.conj(), mats))


def from_hermitian_coords(coords, n):
    frame = hermitian_frame(n)
    return np.einsum("ka,axy->kxy", np.asarray(coords, dtype=float), frame)


def sample_gue_traceless(n: int, rng):
    """Draw a traceless GUE matrix.

    Entries follow the density proportional to ``exp(-Tr X^2)``: diagonal
    entries have variance 1/2, real and imaginary parts of off-diagonal
    entries variance 1/4. The draw is then shifted to trace zero. The result
    is exactly Hermitian. Only the orthogonal invariance of this law matters
    for the spans built from it; the overall scale does not.
    """
    gen = as_generator(rng)
    z = gen.standard_normal((2, n, n))
    g = (z[0] + 1j * z[1]) / np.sqrt(2)
    x = (g + g.conj().T) / 2
    x[np.diag_indices(n)] -= np.trace(x).real / n
    return x


def eig_hermitian(X, rel_tol=TOL_HERM):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Raises
    ------
    NotHermitianError
        If ``||X - X*||_F > rel_tol * max(1, ||X||_F)``.
    """
    X = check_square(X)
    scale = max(np.linalg.norm(X), 1.0)
    if hermitian_defect(X) > rel_tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian (defect {hermitian_defect(X):.3g})")
    w, v = np.linalg.eigh((X + X.conj().T) / 2)
    return w, v


def simple_spectrum(eigenvalues, gap_tol=GAP_TOL) -> bool:
    """True when every consecutive gap exceeds ``gap_tol * max(1, spread)``."""
    w = np.asarray(eigenvalues, dtype=float)
    if w.size <= 1:
        return True
    spread = w[-1] - w[0]
    return bool(np.all(np.diff(w) > gap_tol * max(1.0, spread)))


def commutator(A, B):
    return A @ B - B @ A
