"""Summary graphs of a group, difference graphs, and degree diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContrastError, GroupError
from .graphs import GraphGroup, read_matrix_csv, write_matrix_csv

SUMMARY_MODES = ("fraction", "weighted-mean", "binary")
DIFFERENCE_MODES = ("signed", "absolute")


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=float)
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class SummaryGraph:
    w: np.ndarray
    group_label: str
    group_size: int
    mode: str = "fraction"

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(self.w))

    @property
    def n(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True, eq=False)
class DifferenceGraph:
    d: np.ndarray
    mode: str = "signed"

    def __post_init__(self):
        object.__setattr__(self, "d", _frozen(self.d))

    @property
    def n(self) -> int:
        return self.d.shape[0]


def build_summary(group: GraphGroup, mode: str = "fraction", threshold: float = 0.5) -> SummaryGraph:
    """Aggregate a group into one weighted graph.

    ``fraction``: share of members containing each edge.
    ``weighted-mean``: mean edge weight, absent edges counting as 0.
    ``binary``: 1 where the fraction is strictly above ``threshold``.
    """
    if mode not in SUMMARY_MODES:
        raise ValueError(f"unknown summary mode {mode!r}")
    if len(group.members) == 0:
        raise GroupError("empty group")
    r = len(group.members)
    if mode == "weighted-mean":
        unweighted = [g.subject_id for g in group if not g.is_weighted]
        if unweighted:
            raise GroupError(f"weighted-mean summary needs weighted graphs; unweighted: {unweighted[:3]}")
        total = np.zeros((group.n, group.n))
        for g in group:
            total += g.weight_matrix
        return SummaryGraph(total / r, group.label, r, mode)

    # integer counts first, one division at the end
    counts = np.zeros((group.n, group.n), dtype=np.int64)
    for g in group:
        counts += g.adjacency.astype(np.int64)
    frac = counts / r
    if mode == "binary":
        return SummaryGraph((frac > threshold).astype(float), group.label, r, mode)
    return SummaryGraph(frac, group.label, r, mode)


def build_difference(a: SummaryGraph, b: SummaryGraph, mode: str = "signed") -> DifferenceGraph:
    if mode not in DIFFERENCE_MODES:
        raise ValueError(f"unknown difference mode {mode!r}")
    if a.n != b.n:
        raise ContrastError(f"dimension mismatch: {a.n} vs {b.n} vertices", code="E_DIMENSION")
    if a.mode != b.mode:
        raise ContrastError(f"summary modes differ: {a.mode} vs {b.mode}", code="E_DIMENSION")
    d = a.w - b.w
    if mode == "absolute":
        d = np.abs(d)
    np.fill_diagonal(d, 0.0)
    return DifferenceGraph(d, mode)


def weighted_degrees(s) -> np.ndarray:
    """Row sums of the weight matrix (works for summary and difference graphs)."""
    m = s.w if isinstance(s, SummaryGraph) else s.d
    return m.sum(axis=1)


def dump_difference_matrix(d: DifferenceGraph, out) -> None:
    write_matrix_csv(d.d, out)


def load_difference_matrix(path, mode="signed") -> DifferenceGraph:
    return DifferenceGraph(read_matrix_csv(path), mode)
