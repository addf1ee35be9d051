"""Generalized optimal quasi-clique: maximize the sum over in-set pairs of
``w(u, v) - alpha(u, v)``.

Three solvers are provided and combined by :func:`solve`:

* :func:`local_search`, the add-until-stuck / remove-one heuristic with the
  final complement check,
* :func:`sdp_solve`, a low-rank (Burer-Monteiro style) projected gradient
  ascent on the vector relaxation where every vertex and the reference
  vertex ``v_0`` become unit vectors,
* :func:`hyperplane_round`, randomized rounding of those vectors.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .errors import GraphFormatError, SolverDivergence

METHODS = ("local-search", "sdp", "sdp+local-search")

# gains within this of zero count as ties for the ">=" acceptance tests
GAIN_TOL = 1e-12

_SDP_STREAM = 0x5D9


@dataclass(frozen=True, eq=False)
class GoqcInstance:
    """Pair weights ``w`` and per-pair penalties ``alpha`` (scalar is broadcast)."""

    w: np.ndarray
    alpha: np.ndarray | float = 0.0

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"pair-weight matrix must be square, got {w.shape}")
        n = w.shape[0]
        a = np.array(self.alpha, dtype=float)
        if a.ndim == 0:
            a = np.full((n, n), float(a))
        if a.shape != w.shape:
            raise ValueError("penalty matrix shape differs from weight matrix")
        for name, m in (("weights", w), ("penalties", a)):
            if not np.all(np.isfinite(m)):
                raise ValueError(f"non-finite {name}")
            if np.max(np.abs(m - m.T), initial=0.0) > 1e-12:
                raise ValueError(f"{name} matrix is not symmetric")
        np.fill_diagonal(w, 0.0)
        np.fill_diagonal(a, 0.0)
        c = w - a
        for m in (w, a, c):
            m.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "_c", c)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def c(self) -> np.ndarray:
        """Net pair contribution ``w - alpha`` with zero diagonal."""
        return self._c

    def induced(self, vertices) -> "GoqcInstance":
        idx = np.asarray(vertices, dtype=int)
        return GoqcInstance(self.w[np.ix_(idx, idx)], self.alpha[np.ix_(idx, idx)])


@dataclass(frozen=True)
class SolverConfig:
    restarts: int = 50
    local_search_max_passes: int = 50
    sdp_rank: int | None = None
    sdp_max_iters: int = 500
    sdp_tol: float = 1e-6
    rounding_samples: int = 50
    rng_seed: int = 0
    method: str = "sdp+local-search"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        for name in ("restarts", "local_search_max_passes", "sdp_max_iters", "rounding_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.sdp_rank is not None and self.sdp_rank < 2:
            raise ValueError("sdp_rank must be at least 2")
        if not self.sdp_tol > 0:
            raise ValueError("sdp_tol must be positive")

    def rank_for(self, n: int) -> int:
        default = min(n + 1, math.ceil(math.sqrt(2 * (n + 1))) + 2)
        return min(n + 1, self.sdp_rank if self.sdp_rank is not None else default)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolverTrace:
    method: str
    best_value: float
    restart_values: list
    iterations_used: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "best_value": self.best_value,
            "restart_values": list(self.restart_values),
            "iterations_used": {k: list(v) for k, v in self.iterations_used.items()},
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverTrace":
        return cls(d["method"], d["best_value"], list(d["restart_values"]), dict(d["iterations_used"]), d["seed"])


def _index(s: Iterable[int], n: int) -> np.ndarray:
    idx = np.array(sorted({int(v) for v in s}), dtype=int)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise GraphFormatError(f"vertex {idx[0] if idx[0] < 0 else idx[-1]} out of range [0, {n})")
    return idx


def goqc_objective(inst: GoqcInstance, s: Iterable[int]) -> float:
    """Sum of ``w - alpha`` over unordered pairs inside ``s``."""
    idx = _index(s, inst.n)
    if idx.size < 2:
        return 0.0
    return float(inst.c[np.ix_(idx, idx)].sum() / 2.0)


def edge_surplus(e_count: float, size: int, alpha: float) -> float:
    """Edge count minus ``alpha`` times the number of vertex pairs."""
    if size < 0:
        raise ValueError("size must be non-negative")
    if size == 0:
        return 0.0
    return float(e_count) - alpha * (size * (size - 1) / 2)


def _local_search(inst: GoqcInstance, start, max_passes: int, rng) -> tuple[frozenset, float, int]:
    n = inst.n
    if n == 0:
        return frozenset(), 0.0, 0
    c = inst.c
    in_s = np.zeros(n, dtype=bool)
    if start is None:
        in_s[int(rng.integers(n))] = True
    else:
        in_s[_index(start, n)] = True
    # gain[u] = f(S + u) - f(S) for u outside S, f(S) - f(S - u) for u inside
    gain = c[:, in_s].sum(axis=1)
    tabu = np.zeros(n, dtype=bool)
    passes = 0
    while passes < max_passes:
        passes += 1
        while True:
            cand = np.flatnonzero(~in_s & ~tabu & (gain >= -GAIN_TOL))
            if cand.size == 0:
                break
            u = cand[0]
            in_s[u] = True
            gain += c[:, u]
        tabu[:] = False
        cand = np.flatnonzero(in_s & (gain <= GAIN_TOL))
        if cand.size == 0:
            break
        u = cand[0]
        in_s[u] = False
        gain -= c[:, u]
        tabu[u] = True  # barred from the next pass's additions
    s = np.flatnonzero(in_s)
    comp = np.flatnonzero(~in_s)
    fs, fc = goqc_objective(inst, s), goqc_objective(inst, comp)
    if fc > fs:
        return frozenset(comp.tolist()), fc, passes
    return frozenset(s.tolist()), fs, passes


def local_search(inst: GoqcInstance, start=None, cfg: SolverConfig | None = None, rng=None):
    """Greedy add/remove search; returns ``(vertex set, objective)``.

    Starts from ``start`` or, if it is ``None``, from one uniformly drawn
    vertex. Additions and removals are accepted when they do not decrease
    the objective, scanning vertices in ascending index order. A vertex
    removed at the end of a pass may not be re-added during the following
    pass; at most ``cfg.local_search_max_passes`` passes run. The better of
    the final set and its complement is returned.
    """
    cfg = cfg or SolverConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    s, value, _ = _local_search(inst, start, cfg.local_search_max_passes, rng)
    return s, value


def _sdp_terms(c: np.ndarray):
    return c.sum(axis=1), c.sum() / 2.0


def _sdp_value_grad(V, c, deg, const):
    v0, U = V[0], V[1:]
    p = U @ v0
    cU = c @ U
    value = 0.25 * (const + deg @ p + 0.5 * np.sum(U * cU))
    grad = np.empty_like(V)
    grad[0] = 0.25 * (U.T @ deg)
    grad[1:] = 0.25 * (np.outer(deg, v0) + cU)
    return value, grad


def _normalize_rows(V):
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return V / norms


def sdp_relaxation_value(vectors: np.ndarray, inst: GoqcInstance) -> float:
    """Relaxed objective of a set of unit rows (row 0 is the reference vector)."""
    deg, const = _sdp_terms(inst.c)
    return float(_sdp_value_grad(np.asarray(vectors, float), inst.c, deg, const)[0])


def sdp_solve(inst: GoqcInstance, cfg: SolverConfig | None = None, return_iterations: bool = False):
    """Approximately solve the vector relaxation by low-rank projected ascent.

    Rows are drawn uniformly on the unit sphere (seeded by ``cfg.rng_seed``),
    then moved along the tangent-space gradient and renormalized. The step
    size is found by halving until the objective does not drop. Iteration
    stops once the relative improvement falls below ``cfg.sdp_tol``.

    Returns the ``(n + 1) x rank`` matrix of unit rows; row 0 is ``v_0``.
    """
    cfg = cfg or SolverConfig()
    n = inst.n
    k = cfg.rank_for(n)
    if k < 2:
        k = 2
    rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed, spawn_key=(_SDP_STREAM,)))
    V = _normalize_rows(rng.standard_normal((n + 1, k)))
    c = inst.c
    deg, const = _sdp_terms(c)
    value, grad = _sdp_value_grad(V, c, deg, const)
    scale = 0.25 * (np.abs(c).sum(axis=1).max(initial=0.0) * 2 + np.abs(deg).sum())
    step = 1.0 / scale if scale > 0 else 1.0
    it = 0
    for it in range(1, cfg.sdp_max_iters + 1):
        tangent = grad - np.sum(grad * V, axis=1, keepdims=True) * V
        if not np.any(tangent):
            break
        for _ in range(40):
            cand = _normalize_rows(V + step * tangent)
            new_value, new_grad = _sdp_value_grad(cand, c, deg, const)
            if not np.isfinite(new_value):
                raise SolverDivergence(f"SDP ascent diverged at iteration {it}")
            if new_value >= value:
                break
            step *= 0.5
        else:
            break
        improvement = new_value - value
        V, value, grad = cand, new_value, new_grad
        if improvement / max(abs(value), 1e-9) < cfg.sdp_tol:
            break
        step *= 1.5
    return (V, it) if return_iterations else V


def rounding_probabilities(vectors: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Inclusion probability of each vertex for the Gaussian direction ``r``."""
    U = np.asarray(vectors)[1:]
    n = U.shape[0]
    t = math.sqrt(4.0 * math.log(n))
    y = np.clip(U @ r / t, -1.0, 1.0)
    return (1.0 + y) / 2.0


def _exhaustive(inst: GoqcInstance) -> frozenset:
    best, best_val = frozenset(), 0.0
    for k in range(1, inst.n + 1):
        for s in itertools.combinations(range(inst.n), k):
            val = goqc_objective(inst, s)
            if val > best_val:
                best, best_val = frozenset(s), val
    return best


def hyperplane_round(vectors: np.ndarray, inst: GoqcInstance, samples: int = 50, rng=None) -> frozenset:
    """Randomized rounding of the relaxation vectors to a vertex set.

    Each sample draws a Gaussian direction ``r``, scales the projections by
    ``sqrt(4 log n)``, clips them to [-1, 1] and includes vertex ``u`` with
    probability ``(1 + y_u) / 2``. The best-scoring sample is returned
    (earliest wins ties). Instances with ``n <= 2`` are enumerated instead.
    """
    n = inst.n
    if n <= 2:
        return _exhaustive(inst)
    rng = rng if rng is not None else np.random.default_rng()
    V = np.asarray(vectors, dtype=float)
    R = rng.standard_normal((samples, V.shape[1]))
    probs = np.stack([rounding_probabilities(V, r) for r in R])
    X = (rng.random((samples, n)) < probs).astype(float)
    values = 0.5 * np.sum((X @ inst.c) * X, axis=1)
    best = int(np.argmax(values))
    return frozenset(np.flatnonzero(X[best]).tolist())


def _restart_rng(seed: int, i: int):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CS_THREADS", "1")))
    except ValueError:
        return 1


def solve(inst: GoqcInstance, cfg: SolverConfig | None = None):
    """Best of ``cfg.restarts`` runs of the configured method.

    Returns ``(vertex set, objective, SolverTrace)``. Restart ``i`` uses its
    own generator derived from ``(cfg.rng_seed, i)``, so results do not
    depend on the order in which restarts execute.
    """
    cfg = cfg or SolverConfig()
    n = inst.n
    iterations = {}
    vectors = None
    if cfg.method != "local-search" and n > 2:
        vectors, sdp_iters = sdp_solve(inst, cfg, return_iterations=True)
        iterations["sdp"] = [sdp_iters]

    def run(i):
        rng = _restart_rng(cfg.rng_seed, i)
        if cfg.method == "local-search":
            s, val, passes = _local_search(inst, None, cfg.local_search_max_passes, rng)
            return s, val, passes
        if vectors is None:
            cand = _exhaustive(inst)
        else:
            cand = hyperplane_round(vectors, inst, cfg.rounding_samples, rng)
        if cfg.method == "sdp":
            return cand, goqc_objective(inst, cand), 0
        idx = np.array(sorted(cand), dtype=int)
        sub_s, _, passes = _local_search(inst.induced(idx), None, cfg.local_search_max_passes, rng)
        s = frozenset(idx[sorted(sub_s)].tolist()) if sub_s else frozenset()
        return s, goqc_objective(inst, s), passes

    workers = min(_workers(), cfg.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(cfg.restarts)))
    else:
        results = [run(i) for i in range(cfg.restarts)]

    values = [r[1] for r in results]
    best = int(np.argmax(values))
    if cfg.method != "sdp":
        iterations["local_search"] = [r[2] for r in results]
    trace = SolverTrace(cfg.method, values[best], values, iterations, cfg.rng_seed)
    return results[best][0], values[best], trace
