"""Random quantum graphs QG(n, d), QG(n, p) and classical G(n, p), G(n, r)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ExhaustedRetriesError, LinearlyDependentError, ParameterOutOfRangeError
from .graphs import Graph
from .matrix_core import TOL_RANK, _orthogonalize, sample_gue_traceless
from .operator_system import OperatorSystem
from .rng import as_generator
from .validation import check_probability, check_size

MODELS = ("QG_nd", "QG_np", "G_np", "G_nr")
GNR_MAX_RETRIES = 10_000  # r = 5 accepts about 1 pairing in 400
QG_MAX_REDRAWS = 100


@dataclass(frozen=True)
class ModelConfig:
    model: str
    n: int
    d: Optional[int] = None
    p: Optional[float] = None
    r: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterOutOfRangeError(f"unknown model {self.model!r}; choose from {MODELS}")
        check_size(self.n)
        required = {"QG_nd": {"d"}, "QG_np": {"p"}, "G_np": {"p"}, "G_nr": {"r"}}[self.model]
        given = {k for k in ("d", "p", "r") if getattr(self, k) is not None}
        if given != required:
            raise ParameterOutOfRangeError(
                f"model {self.model} takes exactly {sorted(required)}, got {sorted(given)}"
            )
        if self.d is not None and not 0 <= self.d <= self.n**2 - 1:
            raise ParameterOutOfRangeError(f"d must lie in 0..{self.n**2 - 1}, got {self.d}")
        if self.p is not None:
            check_probability(self.p, open_interval=self.model == "QG_np")
        if self.r is not None and (not 0 < self.r < self.n or (self.n * self.r) % 2):
            raise ParameterOutOfRangeError("G(n, r) needs 0 < r < n and n*r even")

    def sample(self, rng=None):
        rng = as_generator(self.seed if rng is None else rng)
        if self.model == "QG_nd":
            return sample_qg_nd(self.n, self.d, rng)
        if self.model == "QG_np":
            return sample_qg_np(self.n, self.p, rng)
        if self.model == "G_np":
            return sample_gnp(self.n, self.p, rng)
        return sample_gnr(self.n, self.r, rng)


def _sample_qg_nd(n, d, rng, tol_rank=TOL_RANK):
    """QG(n, d) sample together with the number of redrawn generators."""
    n = check_size(n)
    if not isinstance(d, (int, np.integer)) or not 0 <= d <= n * n - 1:
        raise ParameterOutOfRangeError(f"d must lie in 0..{n * n - 1}, got {d!r}")
    gen = as_generator(rng)
    basis = [np.eye(n, dtype=complex) / np.sqrt(n)]
    redraws = 0
    while len(basis) < d + 1:
        x = sample_gue_traceless(n, gen)
        try:
            basis.append(_orthogonalize(x, basis, tol_rank))
        except LinearlyDependentError:
            redraws += 1
            if redraws > QG_MAX_REDRAWS:
                raise ExhaustedRetriesError("GUE draws keep coming out dependent") from None
    return OperatorSystem(n, np.array(basis)), redraws


def sample_qg_nd(n, d, rng) -> OperatorSystem:
    """``span(1, X_1, ..., X_d)`` for independent traceless GUE ``X_i``.

    Numerically dependent draws (a probability-zero event) are replaced by
    the next draw of the same stream, so the output stays a deterministic
    function of ``(n, d, rng)``.
    """
    return _sample_qg_nd(n, d, rng)[0]


def sample_qg_np(n, p, rng) -> OperatorSystem:
    """QG(n, p): draw ``d ~ Binomial(n^2 - 1, p)``, then QG(n, d)."""
    n = check_size(n)
    p = check_probability(p, open_interval=True)
    gen = as_generator(rng)
    d = int(gen.binomial(n * n - 1, p))
    return sample_qg_nd(n, d, gen)


def qg_np_exceptional_probability(n, p):
    """Probability that QG(n, p) lands on ``d in {0, 1, n^2 - 2, n^2 - 1}``,
    the dimensions where a trivial automorphism group is not generic."""
    N = n * n - 1
    return (1 - p) ** N + N * p * (1 - p) ** (N - 1) + N * p ** (N - 1) * (1 - p) + p**N


def sample_gnp(n, p, rng) -> Graph:
    """Erdos-Renyi graph: each of the ``n choose 2`` edges independently with prob. p."""
    n = check_size(n)
    p = check_probability(p)
    gen = as_generator(rng)
    iu = np.triu_indices(n, 1)
    A = np.zeros((n, n), dtype=np.int64)
    A[iu] = gen.random(iu[0].size) < p
    return Graph(A + A.T)


def sample_gnr(n, r, rng, max_retries=GNR_MAX_RETRIES) -> Graph:
    """Uniform random r-regular graph via the pairing model.

    A uniformly random perfect matching of the ``n r`` half-edges is drawn
    and rejected whenever it produces a loop or a multiple edge. Conditional
    on acceptance the result is exactly uniform.
    """
    n = check_size(n)
    if not isinstance(r, (int, np.integer)) or not 0 < r < n or (n * r) % 2:
        raise ParameterOutOfRangeError(f"G(n, r) needs 0 < r < n and n*r even, got n={n}, r={r}")
    gen = as_generator(rng)
    points = np.repeat(np.arange(n), r)
    for _ in range(max_retries):
        pairs = gen.permutation(points).reshape(-1, 2)
        u, v = pairs[:, 0], pairs[:, 1]
        if np.any(u == v):
            continue
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            continue
        A = np.zeros((n, n), dtype=np.int64)
        A[lo, hi] = 1
        return Graph(A + A.T)
    raise ExhaustedRetriesError(f"no simple {r}-regular pairing on {n} vertices in {max_retries} tries")
