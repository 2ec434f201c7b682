"""Rigidity certificates for classical graphs.

Two routes lead to a trivial quantum automorphism group. For a graph with
simple adjacency spectrum whose eigenvectors mutually overlap, the quantum
automorphism group is a classical group of the form ``(Z/2)^k``, and
classical rigidity then finishes the argument. For regular graphs it is
enough that all vertices have distinct distance profiles.

Godsil-McKay switching builds isospectral pairs; their isospectrality is
verified exactly with integer characteristic polynomials.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .exceptions import BadPartitionError, NotRegularError
from .graphs import Graph
from .matrix_core import GAP_TOL, eig_hermitian, simple_spectrum

AUT_BUDGET = 10**7
ZERO_RTOL = 1e-8


class Verdict(str, enum.Enum):
    QUANTUM_TRIVIAL = "QuantumTrivial"
    CLASSICAL_TWO_GROUP = "ClassicalTwoGroup"
    INCONCLUSIVE = "Inconclusive"
    NOT_QUANTUM_ISOMORPHIC = "NotQuantumIsomorphic"


def _as_graph(G) -> Graph:
    return G if isinstance(G, Graph) else Graph(G)


# ---------------------------------------------------------------------------
# Spectral checks


def adjacency_spectrum(G):
    """Ascending eigenvalues and orthonormal eigenvectors of the adjacency matrix."""
    return eig_hermitian(_as_graph(G).adjacency.astype(float))


def _nonzero_mask(eigenvectors, zero_tol):
    V = np.asarray(eigenvectors)
    if zero_tol is None:
        zero_tol = ZERO_RTOL * (np.max(np.abs(V)) if V.size else 0.0)
    return np.abs(V) >= zero_tol


def thickness_check(eigenvectors, zero_tol=None):
    """Whether every pair of eigenvectors (columns) shares a nonzero coordinate.

    Entries below ``zero_tol`` (default ``1e-8`` times the largest entry)
    count as zero. Returns ``(thick, witness)`` where ``witness`` is the
    first disjointly supported pair of column indices, or ``None``.
    """
    Z = _nonzero_mask(eigenvectors, zero_tol).astype(np.int64)
    overlap = Z.T @ Z
    bad = np.argwhere(np.triu(overlap == 0, 1))
    if bad.size:
        return False, (int(bad[0, 0]), int(bad[0, 1]))
    return True, None


def no_zero_coordinates(eigenvectors, zero_tol=None) -> bool:
    return bool(np.all(_nonzero_mask(eigenvectors, zero_tol)))


# ---------------------------------------------------------------------------
# Distance profiles


def distance_profiles(G) -> np.ndarray:
    """Row x holds ``(d_1(x), d_2(x), ...)``, the number of vertices at each
    distance from x, padded with zeros to the largest finite distance."""
    G = _as_graph(G)
    if G.n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    dist = shortest_path(G.adjacency, method="D", unweighted=True, directed=False)
    finite = np.where(np.isinf(dist), 0, dist).astype(np.int64)
    diameter = int(finite.max())
    out = np.zeros((G.n, diameter), dtype=np.int64)
    for i in range(1, diameter + 1):
        out[:, i - 1] = np.sum(dist == i, axis=1)
    return out


def distinct_profiles(G) -> bool:
    P = distance_profiles(G)
    return np.unique(P, axis=0).shape[0] == P.shape[0]


# ---------------------------------------------------------------------------
# Classical automorphisms by individualization and refinement


def _cluster(values, tol=1e-8):
    """Integer labels that merge sorted values closer than ``tol``."""
    order = np.argsort(values, kind="stable")
    labels = np.empty(values.size, dtype=np.int64)
    label = 0
    for pos, idx in enumerate(order):
        if pos and values[idx] - values[order[pos - 1]] > tol:
            label += 1
        labels[idx] = label
    return labels


def _initial_colors(G: Graph):
    """Automorphism-invariant vertex colors: degree, distance profile and the
    diagonals of the spectral projectors of the adjacency matrix."""
    w, v = adjacency_spectrum(G)
    features = [G.degrees()[:, None], distance_profiles(G)]
    spread = max(1.0, w[-1] - w[0]) if w.size else 1.0
    start = 0
    for k in range(1, w.size + 1):
        if k == w.size or w[k] - w[k - 1] > GAP_TOL * spread:
            block = v[:, start:k]
            diag = np.sum(np.abs(block) ** 2, axis=1)
            features.append(_cluster(diag)[:, None])
            start = k
    F = np.concatenate(features, axis=1)
    return np.unique(F, axis=0, return_inverse=True)[1].reshape(-1)


def _refine(A, colors):
    """Coarsest equitable refinement, with canonical color names."""
    k = colors.max() + 1
    while True:
        counts = A @ np.eye(k, dtype=np.int64)[colors]
        sig = np.concatenate([colors[:, None], counts], axis=1)
        new = np.unique(sig, axis=0, return_inverse=True)[1].reshape(-1)
        k_new = new.max() + 1
        colors = new
        if k_new == k:
            return colors
        k = k_new


class _BudgetExceeded(Exception):
    pass


class _Search:
    def __init__(self, G: Graph, budget):
        n = G.n
        self.n = n
        A = G.adjacency
        self.A = A
        self.U = np.block([[A, np.zeros_like(A)], [np.zeros_like(A), A]])
        self.budget = budget
        self.nodes = 0

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise _BudgetExceeded

    def find_iso(self, colors):
        """An automorphism compatible with the coloring of ``G + G``, or None.

        ``colors`` has length 2n; copy one is vertices ``0..n-1``.
        """
        self._tick()
        n = self.n
        colors = _refine(self.U, colors)
        a, b = colors[:n], colors[n:]
        if not np.array_equal(np.bincount(a, minlength=colors.max() + 1),
                              np.bincount(b, minlength=colors.max() + 1)):
            return None
        if np.unique(a).size == n:
            perm = np.empty(n, dtype=np.int64)
            perm[np.argsort(a)] = np.argsort(b)
            if np.array_equal(self.A[np.ix_(perm, perm)], self.A):
                return perm
            return None
        sizes = np.bincount(a)
        cell = int(np.argmin(np.where(sizes > 1, sizes, n + 1)))
        x = int(np.flatnonzero(a == cell)[0])
        fresh = colors.max() + 1
        for y in np.flatnonzero(b == cell):
            trial = colors.copy()
            trial[x] = fresh
            trial[n + y] = fresh
            found = self.find_iso(trial)
            if found is not None:
                return found
        return None

    def trivial(self, colors):
        """True iff the only color-preserving automorphism is the identity."""
        n = self.n
        while True:
            self._tick()
            colors = _refine(self.A, colors)
            if np.unique(colors).size == n:
                return True
            sizes = np.bincount(colors)
            cell = int(np.argmin(np.where(sizes > 1, sizes, n + 1)))
            members = np.flatnonzero(colors == cell)
            v = int(members[0])
            fresh = colors.max() + 1
            for w in members[1:]:
                joint = np.concatenate([colors, colors])
                joint[v] = fresh
                joint[n + w] = fresh
                if self.find_iso(joint) is not None:
                    return False
            # every automorphism now fixes v
            colors = colors.copy()
            colors[v] = fresh


def classical_aut_trivial(G, budget=AUT_BUDGET) -> Optional[bool]:
    """True iff the identity is the only automorphism of G.

    Exact search with color refinement: the vertices of a non-singleton
    cell are tried one by one, and once no automorphism moves the chosen
    vertex it is individualized. Returns ``None`` when more than ``budget``
    search nodes would be needed.
    """
    G = _as_graph(G)
    if G.n <= 1:
        return True
    search = _Search(G, budget)
    try:
        return search.trivial(_initial_colors(G))
    except _BudgetExceeded:
        return None


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class RigidityCertificate:
    spectrum_simple: bool
    thick: bool
    no_zero_coordinates: bool
    regular: bool
    distance_profiles_distinct: bool
    classical_aut_trivial: Optional[bool]
    verdict: Verdict

    def to_dict(self):
        return {
            "spectrum_simple": self.spectrum_simple,
            "thick": self.thick,
            "no_zero_coordinates": self.no_zero_coordinates,
            "regular": self.regular,
            "distance_profiles_distinct": self.distance_profiles_distinct,
            "classical_aut_trivial": self.classical_aut_trivial,
            "verdict": self.verdict.value,
        }


def certificate_verdict(spectrum_simple, thick, classical_trivial, regular, profiles_distinct):
    if regular and profiles_distinct:
        return Verdict.QUANTUM_TRIVIAL
    if spectrum_simple and thick:
        if classical_trivial is True:
            return Verdict.QUANTUM_TRIVIAL
        return Verdict.CLASSICAL_TWO_GROUP
    return Verdict.INCONCLUSIVE


def quantum_rigidity_certificate(G, tol=GAP_TOL, budget=AUT_BUDGET) -> RigidityCertificate:
    """Run both routes to a trivial quantum automorphism group.

    ``QuantumTrivial`` when the spectrum is simple, the eigenvectors are
    thick and the classical automorphism group is trivial, or when G is
    regular with pairwise distinct distance profiles. ``ClassicalTwoGroup``
    when only the spectral half holds. ``Inconclusive`` otherwise.
    """
    G = _as_graph(G)
    w, v = adjacency_spectrum(G)
    simple = simple_spectrum(w, tol)
    thick, _ = thickness_check(v)
    nz = no_zero_coordinates(v)
    regular = G.is_regular()
    distinct = distinct_profiles(G)
    classical = True if distinct else classical_aut_trivial(G, budget)
    verdict = certificate_verdict(simple, thick, classical, regular, distinct)
    return RigidityCertificate(simple, thick, nz, regular, distinct, classical, verdict)


# ---------------------------------------------------------------------------
# Godsil-McKay switching


def gm_switch(Gamma, Vprime):
    """Add an apex joined to ``Vprime`` and, separately, one joined to its
    complement. ``Gamma`` must be regular on ``2m`` vertices and ``Vprime``
    must have ``m`` elements. The apex is vertex ``2m`` in both outputs."""
    G = _as_graph(Gamma)
    if not G.is_regular():
        raise NotRegularError("switching needs a regular graph")
    n = G.n
    Vp = sorted(int(x) for x in Vprime)
    if n % 2 or len(set(Vp)) != len(Vp) or len(Vp) != n // 2 or any(not 0 <= x < n for x in Vp):
        raise BadPartitionError(f"need {n // 2} distinct vertices out of {n} on an even vertex set")
    mask = np.zeros(n, dtype=np.int64)
    mask[Vp] = 1
    out = []
    for col in (mask, 1 - mask):
        A = np.zeros((n + 1, n + 1), dtype=np.int64)
        A[:n, :n] = G.adjacency
        A[:n, n] = A[n, :n] = col
        out.append(Graph(A))
    return out[0], out[1]


def _berkowitz(A):
    n = len(A)
    if n == 0:
        return [1]
    C = [1, -A[n - 1][n - 1]]
    for k in range(n - 2, -1, -1):
        size = n - k - 1
        R = A[k][k + 1:]
        S = [A[i][k] for i in range(k + 1, n)]
        t = [1, -A[k][k]]
        x = S
        for _ in range(size):
            t.append(-sum(r * s for r, s in zip(R, x)))
            x = [sum(A[k + 1 + i][k + 1 + j] * x[j] for j in range(size)) for i in range(size)]
        C = [sum(t[i - j] * C[j] for j in range(max(0, i - size - 1), min(i, size) + 1))
             for i in range(size + 2)]
    return C


def char_poly_integer(G):
    """Exact characteristic polynomial ``det(x I - A)`` of the adjacency matrix.

    Coefficients are Python integers from the leading one down, computed
    with Berkowitz's division-free algorithm.
    """
    A = _as_graph(G).adjacency.tolist()
    return _berkowitz(A)


def isospectral_check(G1, G2) -> bool:
    G1, G2 = _as_graph(G1), _as_graph(G2)
    if G1.n != G2.n:
        raise ValueError(f"size mismatch: {G1.n} vs {G2.n} vertices")
    return char_poly_integer(G1) == char_poly_integer(G2)


@dataclass(frozen=True)
class ObstructionReport:
    apex_unique: bool
    profiles_distinct: bool
    halves_differ: bool
    verdict: Verdict

    def to_dict(self):
        return {
            "apex_unique": self.apex_unique,
            "profiles_distinct": self.profiles_distinct,
            "halves_differ": self.halves_differ,
            "verdict": self.verdict.value,
        }


def quantum_isomorphism_obstruction(Gamma, Vprime, tol=GAP_TOL) -> ObstructionReport:
    """Show that the two switched graphs are not quantum isomorphic.

    A quantum isomorphism must send the apex to the apex when it is the
    unique vertex of maximal degree in both graphs, and then restricts to a
    quantum automorphism of ``Gamma``. That is trivial when ``Gamma`` has
    distinct distance profiles, and the trivial one cannot carry ``Vprime``
    onto its complement. Otherwise the answer is ``Inconclusive``.
    """
    G = _as_graph(Gamma)
    G1, G2 = gm_switch(G, Vprime)
    apex = G.n

    def apex_unique(H):
        deg = H.degrees()
        return bool(deg[apex] == deg.max() and np.sum(deg == deg.max()) == 1)

    unique = apex_unique(G1) and apex_unique(G2)
    distinct = distinct_profiles(G)
    Vp = set(int(x) for x in Vprime)
    differ = Vp != set(range(G.n)) - Vp
    ok = unique and distinct and differ
    verdict = Verdict.NOT_QUANTUM_ISOMORPHIC if ok else Verdict.INCONCLUSIVE
    return ObstructionReport(unique, distinct, differ, verdict)
