"""Graphs over a shared vertex set, and their ingestion from disk.

Vertex identity is positional: index ``i`` refers to the same region of
interest in every subject. Three on-disk formats are understood:

* edge lists (``u v`` or ``u v w`` per line, ``#`` comments; an optional
  ``# n=<count>`` header pins the vertex count),
* dense adjacency CSVs (symmetric ``n x n`` matrix),
* ROI time series CSVs (one ROI per row), turned into graphs by
  :func:`correlation_graph`.

Groups are described by a tab-separated manifest with columns
``subject_id``, ``path`` and ``label`` (optionally ``n``).
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._io import atomic_write_text
from .errors import GraphFormatError, GroupError

DEFAULT_LABEL_ALIASES = {"A": "A", "B": "B", "TD": "A", "ASD": "B"}

_N_HEADER = re.compile(r"^#\s*n\s*[=:]\s*(\d+)\s*$")


def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class ObservationGraph:
    """One subject's undirected graph.

    ``weights`` is ``None`` for unweighted graphs (every edge has weight 1).
    """

    n: int
    edges: frozenset
    subject_id: str = ""
    label: str = "A"
    weights: Mapping[tuple[int, int], float] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise GraphFormatError(f"vertex count must be positive, got {self.n}")
        normalized = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u} in subject {self.subject_id!r}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphFormatError(
                    f"edge ({u}, {v}) out of range [0, {self.n}) in subject {self.subject_id!r}"
                )
            normalized.add(_pair(u, v))
        object.__setattr__(self, "edges", frozenset(normalized))
        if self.weights is not None:
            w = {}
            for (u, v), x in self.weights.items():
                key = _pair(int(u), int(v))
                if key not in normalized:
                    raise GraphFormatError(f"weight given for non-edge {key}")
                if not math.isfinite(x):
                    raise GraphFormatError(f"non-finite weight on edge {key}")
                w[key] = float(x)
            missing = normalized - w.keys()
            if missing:
                raise GraphFormatError(f"edges without weight: {sorted(missing)[:5]}")
            object.__setattr__(self, "weights", w)

    @classmethod
    def from_adjacency(cls, matrix, subject_id="", label="A", weighted=None):
        """Build a graph from a symmetric matrix; nonzero entries are edges.

        With ``weighted=None`` the graph is weighted iff some entry is not 0/1.
        """
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GraphFormatError(f"adjacency matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise GraphFormatError("adjacency matrix has non-finite entries")
        if np.max(np.abs(m - m.T), initial=0.0) > 1e-9:
            raise GraphFormatError("adjacency matrix is not symmetric")
        if np.any(np.diag(m) != 0):
            raise GraphFormatError("adjacency matrix has self-loops on the diagonal")
        iu, iv = np.nonzero(np.triu(m, 1))
        edges = frozenset(zip(iu.tolist(), iv.tolist()))
        if weighted is None:
            weighted = not np.all((m == 0) | (m == 1))
        weights = {(u, v): float(m[u, v]) for u, v in edges} if weighted else None
        return cls(m.shape[0], edges, subject_id, label, weights)

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    @cached_property
    def adjacency(self) -> np.ndarray:
        """0/1 indicator matrix of the edge set."""
        a = np.zeros((self.n, self.n))
        if self.edges:
            idx = np.array(sorted(self.edges))
            a[idx[:, 0], idx[:, 1]] = 1.0
            a[idx[:, 1], idx[:, 0]] = 1.0
        a.flags.writeable = False
        return a

    @cached_property
    def weight_matrix(self) -> np.ndarray:
        """Edge weights as a dense matrix (absent edges are 0)."""
        if self.weights is None:
            return self.adjacency
        a = np.zeros((self.n, self.n))
        for (u, v), x in self.weights.items():
            a[u, v] = a[v, u] = x
        a.flags.writeable = False
        return a

    def with_label(self, label: str) -> "ObservationGraph":
        return ObservationGraph(self.n, self.edges, self.subject_id, label, self.weights)


@dataclass(frozen=True)
class GraphGroup:
    label: str
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise GroupError("empty group")
        ns = {g.n for g in members}
        if len(ns) != 1:
            raise GroupError(f"inconsistent vertex count within group {self.label!r}: {sorted(ns)}")
        ids = [g.subject_id for g in members]
        dup = {s for s in ids if ids.count(s) > 1}
        if dup:
            raise GroupError(f"duplicate subject_id: {sorted(dup)}")
        object.__setattr__(self, "members", members)

    @property
    def n(self) -> int:
        return self.members[0].n

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class TimeSeriesMatrix:
    values: np.ndarray
    subject_id: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise GraphFormatError("time series must be a 2-D array (ROI x sample)")
        if v.shape[1] < 2:
            raise GraphFormatError("time series needs at least 2 samples per ROI")
        if not np.all(np.isfinite(v)):
            raise GraphFormatError(f"non-finite value in time series of subject {self.subject_id!r}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n_rois(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


def nearest_rank_percentile(values: Sequence[float], percentile: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * m)-th smallest of m values."""
    arr = np.sort(np.asarray(values, dtype=float).ravel())
    if arr.size == 0:
        raise ValueError("percentile of an empty collection")
    if not 0 < percentile <= 100:
        raise ValueError(f"percentile must lie in (0, 100], got {percentile}")
    rank = math.ceil(Fraction(str(percentile)) * arr.size / 100)
    return float(arr[max(rank, 1) - 1])


def correlation_graph(ts: TimeSeriesMatrix, percentile: float = 80.0, label: str = "A") -> ObservationGraph:
    """Threshold the Pearson correlation matrix of the ROI signals.

    The threshold is the nearest-rank ``percentile`` of the off-diagonal
    correlations (each unordered pair counted once); an edge joins every
    pair whose correlation is strictly larger.
    """
    if not 0 < percentile < 100:
        raise ValueError(f"percentile must lie in (0, 100), got {percentile}")
    x = ts.values
    std = x.std(axis=1)
    flat = np.flatnonzero(std == 0)
    if flat.size:
        raise GraphFormatError(
            f"zero-variance ROI {int(flat[0])} in subject {ts.subject_id!r}: Pearson correlation undefined"
        )
    corr = np.corrcoef(x)
    iu, iv = np.triu_indices(ts.n_rois, 1)
    vals = corr[iu, iv]
    t = nearest_rank_percentile(vals, percentile)
    keep = vals > t
    edges = frozenset(zip(iu[keep].tolist(), iv[keep].tolist()))
    return ObservationGraph(ts.n_rois, edges, ts.subject_id, label)


def edge_count_induced(g: ObservationGraph, s: Iterable[int]) -> int:
    """Number of edges of ``g`` with both endpoints in ``s``."""
    idx = _check_vertices(s, g.n)
    if idx.size < 2:
        return 0
    sub = g.adjacency[np.ix_(idx, idx)]
    return int(round(sub.sum() / 2))


def _check_vertices(s: Iterable[int], n: int) -> np.ndarray:
    idx = np.array(sorted({int(v) for v in s}), dtype=int)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        bad = idx[0] if idx[0] < 0 else idx[-1]
        raise GraphFormatError(f"vertex {bad} out of range [0, {n})")
    return idx


# --- file formats ----------------------------------------------------------


def read_edge_list(path, n: int | None = None, subject_id: str | None = None, label="A") -> ObservationGraph:
    path = Path(path)
    if not path.exists():
        raise GraphFormatError(f"missing file: {path}")
    header_n = None
    edges, weights = [], {}
    weighted = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _N_HEADER.match(line)
                if m:
                    header_n = int(m.group(1))
                continue
            parts = line.split("#", 1)[0].split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(f"{path}:{lineno}: expected 'u v' or 'u v w', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else None
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if weighted is None:
                weighted = w is not None
            elif weighted != (w is not None):
                raise GraphFormatError(f"{path}:{lineno}: mixed weighted and unweighted lines")
            if u == v:
                raise GraphFormatError(f"{path}:{lineno}: self-loop at vertex {u}")
            if u < 0 or v < 0:
                raise GraphFormatError(f"{path}:{lineno}: negative vertex id")
            key = _pair(u, v)
            edges.append(key)
            if w is not None:
                weights[key] = w
    if header_n is not None and n is not None and header_n != n:
        raise GraphFormatError(f"{path}: header n={header_n} disagrees with manifest n={n}")
    n = header_n if header_n is not None else n
    if n is None:
        n = 1 + max((max(e) for e in edges), default=0)
    sid = subject_id if subject_id is not None else path.stem
    try:
        return ObservationGraph(n, frozenset(edges), sid, label, weights if weighted else None)
    except GraphFormatError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None


def write_edge_list(g: ObservationGraph, path) -> None:
    lines = [f"# n={g.n}"]
    for u, v in sorted(g.edges):
        if g.weights is None:
            lines.append(f"{u} {v}")
        else:
            lines.append(f"{u} {v} {g.weights[(u, v)]!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise GraphFormatError(f"missing file: {path}")
    try:
        m = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None
    return m


def write_matrix_csv(matrix, path) -> None:
    m = np.asarray(matrix, dtype=float)
    rows = [",".join(_fmt(x) for x in row) for row in m]
    atomic_write_text(path, "\n".join(rows) + "\n")


def _fmt(x: float) -> str:
    # shortest round-trip repr; integral values without a trailing ".0"
    x = float(x) + 0.0
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


def read_adjacency_csv(path, subject_id=None, label="A") -> ObservationGraph:
    m = read_matrix_csv(path)
    sid = subject_id if subject_id is not None else Path(path).stem
    try:
        return ObservationGraph.from_adjacency(m, sid, label)
    except GraphFormatError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None


def read_timeseries_csv(path, subject_id=None) -> TimeSeriesMatrix:
    m = read_matrix_csv(path)
    return TimeSeriesMatrix(m, subject_id if subject_id is not None else Path(path).stem)


def read_graph(path, n=None, subject_id=None, label="A") -> ObservationGraph:
    """Dispatch on extension: ``.csv`` is an adjacency matrix, anything else an edge list."""
    if Path(path).suffix.lower() == ".csv":
        g = read_adjacency_csv(path, subject_id, label)
        if n is not None and g.n != n:
            raise GraphFormatError(f"{path}: matrix has n={g.n}, manifest says n={n}")
        return g
    return read_edge_list(path, n, subject_id, label)


@dataclass(frozen=True)
class ManifestRow:
    subject_id: str
    path: Path
    label: str
    n: int | None = None


def read_manifest(manifest_path, label_aliases: Mapping[str, str] | None = None) -> list[ManifestRow]:
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise GraphFormatError(f"missing file: {manifest_path}")
    aliases = dict(DEFAULT_LABEL_ALIASES if label_aliases is None else label_aliases)
    rows = []
    with open(manifest_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader((ln for ln in fh if not ln.startswith("#")), delimiter="\t")
        required = {"subject_id", "path", "label"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise GraphFormatError(f"{manifest_path}: manifest needs columns {sorted(required)}")
        for lineno, rec in enumerate(reader, 2):
            label = rec["label"].strip()
            if label not in aliases:
                raise GraphFormatError(f"{manifest_path}:{lineno}: unknown label {label!r}")
            p = Path(rec["path"].strip())
            if not p.is_absolute():
                p = manifest_path.parent / p
            n = rec.get("n")
            rows.append(ManifestRow(rec["subject_id"].strip(), p, aliases[label], int(n) if n else None))
    return rows


def load_group(
    manifest_path,
    label_aliases: Mapping[str, str] | None = None,
    timeseries: bool = False,
    percentile: float = 80.0,
) -> GraphGroup:
    """Load every subject listed in a manifest, in manifest order.

    With ``timeseries=True`` each path is an ROI time-series CSV thresholded
    per subject by :func:`correlation_graph`.
    """
    rows = read_manifest(manifest_path, label_aliases)
    if not rows:
        raise GroupError(f"empty group: {manifest_path}")
    labels = {r.label for r in rows}
    if len(labels) != 1:
        raise GroupError(f"{manifest_path}: a group manifest must use a single label, got {sorted(labels)}")
    members = []
    for r in rows:
        if timeseries:
            g = correlation_graph(read_timeseries_csv(r.path, r.subject_id), percentile, r.label)
        else:
            g = read_graph(r.path, r.n, r.subject_id, r.label)
        members.append(g)
    ns = {g.n for g in members}
    if len(ns) != 1:
        raise GroupError(f"{manifest_path}: inconsistent vertex count {sorted(ns)}")
    return GraphGroup(labels.pop(), tuple(members))


def write_manifest(rows: Iterable[tuple[str, str, str]], path) -> None:
    lines = ["subject_id\tpath\tlabel"]
    lines += ["\t".join(r) for r in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_atlas(path) -> list[str]:
    """ROI names in index order.

    Accepts one name per line, or ``index,name`` / ``index<TAB>name`` rows.
    """
    names = {}
    with open(path, encoding="utf-8") as fh:
        plain = []
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = re.split(r"[,\t]", line, maxsplit=1)
            if len(parts) == 2 and parts[0].strip().isdigit():
                names[int(parts[0])] = parts[1].strip()
            else:
                plain.append(line.strip())
    if names:
        return [names[i] for i in range(len(names))]
    return plain
