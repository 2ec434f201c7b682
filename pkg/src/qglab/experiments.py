"""Seeded Monte Carlo sweeps over the random models.

Trial ``t`` of a run with master seed ``s`` draws everything from
``seeded_rng(s, t)``, so a record depends only on the configuration and its
trial index. Records are written one JSON object per line in trial order by
a single writer, which makes the output byte-identical for any number of
workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import classical_rigidity as cr
from .exceptions import ParameterOutOfRangeError
from .matrix_core import GAP_TOL, eig_hermitian, simple_spectrum
from .operator_system import (
    check_cp,
    check_idempotent_law,
    check_reflexive,
    check_symmetric,
    degree_matrix,
    explicit_rigid_tuple,
    orthogonal_complement_system,
    quantum_adjacency,
)
from .random_models import _sample_qg_nd, sample_gnp, sample_gnr
from .rng import seeded_rng
from .symmetry import diagonal_phase_solver, is_abelian, stabilizer_lie_algebra

EXPERIMENTS = (
    "qg-aut",
    "qg-axioms",
    "qg-duality",
    "qg-degree",
    "graph-rigidity",
    "gm-demo",
    "explicit-tuple",
)
DEFAULT_TOLERANCES = {
    "tol_solve": 1e-10,
    "gap_tol": GAP_TOL,
    "law_tol": 1e-9,
    "budget": cr.AUT_BUDGET,
}
WORKERS_ENV = "QGLAB_WORKERS"


class SummaryError(ValueError):
    """A records file that cannot be summarized."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int
    d: Optional[int] = None
    p: Optional[float] = None
    r: Optional[int] = None
    trials: int = 1
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output_path: Optional[str] = None
    workers: int = 1
    timings: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ParameterOutOfRangeError(
                f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}"
            )
        if not isinstance(self.n, int) or self.n < 1:
            raise ParameterOutOfRangeError(f"n must be a positive integer, got {self.n!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ParameterOutOfRangeError(f"trials must be >= 1, got {self.trials!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ParameterOutOfRangeError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ParameterOutOfRangeError(f"workers must be >= 1, got {self.workers!r}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ParameterOutOfRangeError(f"unknown tolerance keys {sorted(unknown)}")
        given = [k for k in ("d", "p", "r") if getattr(self, k) is not None]
        exp, n = self.experiment, self.n
        if exp.startswith("qg-"):
            if len(given) > 1 or self.r is not None:
                raise ParameterOutOfRangeError(f"{exp} takes at most one of --d, --p")
            if self.d is not None and not 0 <= self.d <= n * n - 1:
                raise ParameterOutOfRangeError(f"d must lie in 0..{n * n - 1}")
            if self.p is not None and not 0 < self.p < 1:
                raise ParameterOutOfRangeError("p must lie in (0, 1)")
        elif exp == "graph-rigidity":
            if len(given) != 1 or self.d is not None:
                raise ParameterOutOfRangeError("graph-rigidity takes exactly one of --p, --r")
            if self.p is not None and not 0 <= self.p <= 1:
                raise ParameterOutOfRangeError("p must lie in [0, 1]")
            if self.r is not None and (not 0 < self.r < n or (n * self.r) % 2):
                raise ParameterOutOfRangeError("G(n, r) needs 0 < r < n and n*r even")
        elif exp == "gm-demo":
            if given != ["r"]:
                raise ParameterOutOfRangeError("gm-demo takes --r only")
            if n % 2 or not 0 < self.r < n or (n * self.r) % 2:
                raise ParameterOutOfRangeError("gm-demo needs even n and a valid degree r")
        elif exp == "explicit-tuple":
            if given != ["d"]:
                raise ParameterOutOfRangeError("explicit-tuple takes --d only")
            if n < 6 or not 4 <= self.d <= n * n - 5:
                raise ParameterOutOfRangeError("explicit-tuple needs n >= 6 and 4 <= d <= n^2 - 5")

    def tol(self, key):
        return self.tolerances.get(key, DEFAULT_TOLERANCES[key])

    def params(self):
        return {k: getattr(self, k) for k in ("n", "d", "p", "r")}

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ParameterOutOfRangeError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return asdict(self)


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _qg_system(cfg, rng):
    n = cfg.n
    if cfg.d is not None:
        d = cfg.d
    elif cfg.p is not None:
        d = int(rng.binomial(n * n - 1, cfg.p))
    else:
        d = int(rng.integers(0, n * n))
    V, redraws = _sample_qg_nd(n, d, rng)
    return V, {"d": d, "redraws": redraws}


def _trial_qg_aut(cfg, rng):
    V, out = _qg_system(cfg, rng)
    S = stabilizer_lie_algebra(V, cfg.tol("tol_solve"))
    out.update(
        stabilizer_dim=S.dim,
        trivial=S.dim == 0,
        abelian=is_abelian(S),
        gap_ratio=_finite(S.gap_ratio),
    )
    return out


def _trial_qg_axioms(cfg, rng):
    V, out = _qg_system(cfg, rng)
    A = quantum_adjacency(V)
    D = degree_matrix(V)
    res = {
        "idempotent_residual": check_idempotent_law(A),
        "symmetric_residual": check_symmetric(A),
        "reflexive_residual": check_reflexive(A),
        "degree_trace_error": abs(float(np.trace(D).real) / V.n - V.dim),
    }
    cp = check_cp(A)
    tol = cfg.tol("law_tol")
    out.update(res)
    out["choi_min_eig"] = cp
    out["laws_hold"] = all(v < tol for v in res.values()) and cp >= -tol
    return out


def _trial_qg_duality(cfg, rng):
    V, out = _qg_system(cfg, rng)
    tol = cfg.tol("tol_solve")
    a = stabilizer_lie_algebra(V, tol).dim
    b = stabilizer_lie_algebra(orthogonal_complement_system(V), tol).dim
    out.update(stabilizer_dim=a, complement_stabilizer_dim=b, dims_agree=a == b)
    return out


def _trial_qg_degree(cfg, rng):
    V, out = _qg_system(cfg, rng)
    w, _ = eig_hermitian(degree_matrix(V))
    gaps = np.diff(w)
    out.update(
        degree_simple_spectrum=simple_spectrum(w, cfg.tol("gap_tol")),
        degree_min_gap=_finite(gaps.min()) if gaps.size else None,
    )
    return out


def _trial_graph_rigidity(cfg, rng):
    if cfg.p is not None:
        G = sample_gnp(cfg.n, cfg.p, rng)
    else:
        G = sample_gnr(cfg.n, cfg.r, rng)
    cert = cr.quantum_rigidity_certificate(G, cfg.tol("gap_tol"), int(cfg.tol("budget")))
    out = cert.to_dict()
    out["quantum_trivial"] = cert.verdict is cr.Verdict.QUANTUM_TRIVIAL
    return out


def _trial_gm_demo(cfg, rng):
    G = sample_gnr(cfg.n, cfg.r, rng)
    Vp = sorted(int(x) for x in rng.choice(cfg.n, cfg.n // 2, replace=False))
    G1, G2 = cr.gm_switch(G, Vp)
    report = cr.quantum_isomorphism_obstruction(G, Vp)
    out = {"vprime": Vp, "isospectral": cr.isospectral_check(G1, G2)}
    out.update(report.to_dict())
    out["not_quantum_isomorphic"] = report.verdict is cr.Verdict.NOT_QUANTUM_ISOMORPHIC
    return out


def explicit_tuple_report(V, tol_solve=1e-10, gap_tol=GAP_TOL):
    """Checks that certify a trivial automorphism group for an explicit tuple."""
    D = degree_matrix(V)
    off = D - np.diag(np.diag(D))
    diagonal = bool(np.linalg.norm(off) <= 1e-9 * max(1.0, np.linalg.norm(D)))
    simple = simple_spectrum(np.sort(np.diag(D).real), gap_tol)
    S = stabilizer_lie_algebra(V, tol_solve)
    phases = diagonal_phase_solver(V)
    return {
        "dim": V.dim,
        "degree_diagonal": diagonal,
        "degree_simple_spectrum": simple,
        "stabilizer_dim": S.dim,
        "gap_ratio": _finite(S.gap_ratio),
        "phase_torus_rank": phases.torus_rank,
        "phase_discrete_orders": phases.discrete_orders,
        "phases_trivial": phases.is_trivial,
        "certified_trivial": diagonal and simple and S.dim == 0 and phases.is_trivial,
    }


def _trial_explicit_tuple(cfg, rng):
    V = explicit_rigid_tuple(cfg.n, cfg.d, rng, cfg.tol("gap_tol"))
    return explicit_tuple_report(V, cfg.tol("tol_solve"), cfg.tol("gap_tol"))


TRIALS = {
    "qg-aut": _trial_qg_aut,
    "qg-axioms": _trial_qg_axioms,
    "qg-duality": _trial_qg_duality,
    "qg-degree": _trial_qg_degree,
    "graph-rigidity": _trial_graph_rigidity,
    "gm-demo": _trial_gm_demo,
    "explicit-tuple": _trial_explicit_tuple,
}


def _plain(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _finite(x)
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def run_trial(cfg: ExperimentConfig, trial_index: int) -> dict:
    """One record. Exceptions are caught and stored in ``error``."""
    rng = seeded_rng(cfg.seed, trial_index)
    start = time.perf_counter()
    try:
        measured, error = TRIALS[cfg.experiment](cfg, rng), None
    except Exception as exc:  # crash isolation: one bad trial never aborts the sweep
        measured, error = {}, f"{type(exc).__name__}: {exc}"
    record = {
        "trial_index": trial_index,
        "seed_stream": [cfg.seed, trial_index],
        "experiment": cfg.experiment,
        "params": cfg.params(),
        "measured": _plain(measured),
        "error": error,
    }
    if cfg.timings:
        record["measured"]["elapsed_ms"] = (time.perf_counter() - start) * 1e3
    return record


def _run_chunk(args):
    cfg, indices = args
    return [run_trial(cfg, t) for t in indices]


def iter_records(cfg: ExperimentConfig):
    """Records in trial order, computed with ``cfg.workers`` processes."""
    if cfg.workers == 1 or cfg.trials == 1:
        for t in range(cfg.trials):
            yield run_trial(cfg, t)
        return
    size = max(1, min(64, cfg.trials // (4 * cfg.workers)))
    chunks = [(cfg, range(i, min(i + size, cfg.trials))) for i in range(0, cfg.trials, size)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        for batch in pool.map(_run_chunk, chunks):
            yield from batch


def dumps_record(record) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


def run_experiment(cfg: ExperimentConfig):
    """Run all trials, write JSONL to ``cfg.output_path`` (if set) and
    return ``(summary, records)``."""
    records = []
    out = None
    if cfg.output_path:
        parent = os.path.dirname(os.path.abspath(cfg.output_path))
        os.makedirs(parent, exist_ok=True)
        out = open(cfg.output_path, "w", encoding="utf-8", newline="\n")
    try:
        for rec in iter_records(cfg):
            records.append(rec)
            if out is not None:
                out.write(dumps_record(rec) + "\n")
    finally:
        if out is not None:
            out.close()
    return summarize_records(records), records


# ---------------------------------------------------------------------------
# Aggregation


def _flatten(measured):
    flat = {}
    for key, value in measured.items():
        if isinstance(value, bool):
            flat[key] = value
        elif isinstance(value, (int, float)):
            flat[key] = float(value)
        elif isinstance(value, str):
            flat[f"{key}={value}"] = True
    return flat


def summarize_records(records):
    """Per-metric count, mean, min, max and fraction true.

    Booleans are averaged as 0/1 and also reported as ``fraction_true``.
    String fields such as verdicts become one indicator metric per value,
    counted over the records that carry the field.
    """
    if not records:
        raise SummaryError("no records to summarize")
    values = {}
    errors = 0
    string_keys = {}
    for rec in records:
        if rec.get("error"):
            errors += 1
            continue
        measured = rec.get("measured", {})
        for key, value in measured.items():
            if isinstance(value, str):
                string_keys.setdefault(key, set()).add(value)
        for key, value in _flatten(measured).items():
            values.setdefault(key, []).append(value)
    for key, seen in string_keys.items():
        present = [r["measured"][key] for r in records if not r.get("error") and key in r["measured"]]
        for v in seen:
            values[f"{key}={v}"] = [x == v for x in present]
    metrics = {}
    for key in sorted(values):
        vals = values[key]
        arr = np.array([float(v) for v in vals])
        entry = {
            "count": len(vals),
            "mean": float(arr.mean()),
            "min": float(arr.min()),
            "max": float(arr.max()),
            "fraction_true": float(arr.mean()) if all(isinstance(v, bool) for v in vals) else None,
        }
        metrics[key] = entry
    return {"records": len(records), "errors": errors, "metrics": metrics}


def load_records(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SummaryError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or not isinstance(rec.get("measured"), dict):
                raise SummaryError(f"{path}:{lineno}: record lacks a 'measured' object")
            records.append(rec)
    if not records:
        raise SummaryError(f"{path}: no records")
    return records


def summarize(records_path):
    return summarize_records(load_records(records_path))


CSV_COLUMNS = ("metric", "count", "mean", "min", "max", "fraction_true")


def summary_csv(summary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for name, entry in summary["metrics"].items():
        writer.writerow([name] + [("" if entry[c] is None else repr(entry[c])) for c in CSV_COLUMNS[1:]])
    return buf.getvalue()


def format_summary(summary) -> str:
    lines = [f"records: {summary['records']}  errors: {summary['errors']}"]
    width = max([len(k) for k in summary["metrics"]] + [6])
    lines.append(f"{'metric':<{width}}  {'count':>6}  {'mean':>12}  {'min':>12}  {'max':>12}  {'frac':>6}")
    for name, e in summary["metrics"].items():
        frac = "" if e["fraction_true"] is None else f"{e['fraction_true']:.4f}"
        lines.append(
            f"{name:<{width}}  {e['count']:>6}  {e['mean']:>12.6g}  {e['min']:>12.6g}  {e['max']:>12.6g}  {frac:>6}"
        )
    return "\n".join(lines)
