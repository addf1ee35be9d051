"""Ground truth for tests and demos.

* :func:`fixture_f2` -- the two-graph run-through example on vertices 1..8,
* :func:`planted_dataset` -- cohorts with a denser vertex set in one class,
* :func:`brute_force` -- exact GOQC optimum by exhaustive enumeration.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ._io import write_json
from .graphs import GraphGroup, ObservationGraph, write_edge_list, write_manifest

BRUTE_FORCE_MAX_N = 20

# 1-based vertex labels as in the run-through example; stored 0-based.
F2_EDGES_A = ((1, 2), (1, 4), (2, 4), (1, 5), (2, 5), (4, 5), (3, 5), (4, 6), (5, 6))
F2_EDGES_B = ((1, 3), (2, 3), (1, 8), (4, 5))
F2_N = 8


def f2_index(vertices) -> frozenset:
    """Map 1-based fixture labels to 0-based vertex ids."""
    return frozenset(v - 1 for v in vertices)


def f2_labels(vertices) -> frozenset:
    return frozenset(v + 1 for v in vertices)


def fixture_f2() -> tuple[GraphGroup, GraphGroup]:
    def graph(edges, sid, label):
        return ObservationGraph(F2_N, frozenset((u - 1, v - 1) for u, v in edges), sid, label)

    a = GraphGroup("A", (graph(F2_EDGES_A, "F2-A", "A"),))
    b = GraphGroup("B", (graph(F2_EDGES_B, "F2-B", "B"),))
    return a, b


@dataclass(frozen=True)
class PlantedSpec:
    n: int = 60
    k: int = 10
    group_size_a: int = 40
    group_size_b: int = 40
    p_in_a: float = 0.9
    p_in_b: float = 0.1
    p_bg: float = 0.3
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("p_in_a", "p_in_b", "p_bg"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"planted size k={self.k} must lie in [0, n={self.n}]")
        if self.group_size_a < 1 or self.group_size_b < 1:
            raise ValueError("group sizes must be positive")

    @property
    def planted(self) -> frozenset:
        return frozenset(range(self.k))


def _probability_matrix(n, k, p_in, p_bg):
    p = np.full((n, n), p_bg)
    p[:k, :k] = p_in
    return p


def planted_dataset(spec: PlantedSpec = PlantedSpec()) -> tuple[GraphGroup, GraphGroup]:
    """Two cohorts that differ only in edge density on vertices ``0..k-1``."""
    rng = np.random.default_rng(spec.rng_seed)
    iu, iv = np.triu_indices(spec.n, 1)
    groups = []
    for label, size, p_in in (("A", spec.group_size_a, spec.p_in_a), ("B", spec.group_size_b, spec.p_in_b)):
        probs = _probability_matrix(spec.n, spec.k, p_in, spec.p_bg)[iu, iv]
        members = []
        for i in range(size):
            keep = rng.random(iu.size) < probs
            edges = frozenset(zip(iu[keep].tolist(), iv[keep].tolist()))
            members.append(ObservationGraph(spec.n, edges, f"{label}{i:03d}", label))
        groups.append(GraphGroup(label, tuple(members)))
    return groups[0], groups[1]


def write_cohort(a: GraphGroup, b: GraphGroup, out_dir, spec: PlantedSpec | None = None) -> dict:
    """Write edge lists, one manifest per group and (optionally) the ground truth."""
    out_dir = Path(out_dir)
    paths = {}
    for group, tag in ((a, "a"), (b, "b")):
        rows = []
        for g in group:
            rel = Path("subjects") / f"{g.subject_id}.edges"
            write_edge_list(g, out_dir / rel)
            rows.append((g.subject_id, rel.as_posix(), group.label))
        manifest = out_dir / f"group_{tag}.tsv"
        write_manifest(rows, manifest)
        paths[f"group_{tag}"] = manifest
    if spec is not None:
        truth = out_dir / "ground_truth.json"
        write_json({"planted": sorted(spec.planted), "spec": asdict(spec)}, truth)
        paths["ground_truth"] = truth
    return paths


def _subset_sums(weights: np.ndarray) -> np.ndarray:
    """Entry ``mask`` holds the sum of ``weights[i]`` over the bits set in ``mask``."""
    out = np.zeros(1)
    for x in weights:
        out = np.concatenate([out, out + x])
    return out


def brute_force(inst, tol: float = 1e-9):
    """Exact optimum of the GOQC objective over all ``2^n`` subsets.

    Returns ``(value, optima)`` where ``optima`` lists every maximizer
    (within ``tol``) as a sorted tuple, in lexicographic order.

    Objective values are built incrementally by bit: the subsets containing
    vertex ``k`` as highest element score ``f(rest) + sum_{v in rest} c[k, v]``.
    """
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got n={n}")
    c = np.asarray(inst.w, float) - np.asarray(inst.alpha, float)
    f = np.zeros(1)
    for k in range(n):
        f = np.concatenate([f, f + _subset_sums(c[k, :k])])
    best = float(f.max())
    masks = np.flatnonzero(f >= best - tol)
    optima = sorted(tuple(v for v in range(n) if (m >> v) & 1) for m in masks.tolist())
    return best, optima
