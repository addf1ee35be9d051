"""Contrast-subgraph extraction between two groups of graphs.

The directional problem scores a vertex set ``S`` by

    delta(S) = sum over pairs u < v in S of (w_A(u, v) - w_B(u, v) - alpha)

and the symmetric one uses ``|w_A - w_B|`` in place of the signed
difference. Both reduce to a GOQC instance with the difference graph as
pair weights and a constant penalty.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import AlphaError, ContrastError
from .goqc import GoqcInstance, SolverConfig, SolverTrace, goqc_objective, solve
from .graphs import GraphGroup, nearest_rank_percentile
from .summarize import DifferenceGraph, build_difference, build_summary

VARIANTS = ("A-minus-B", "B-minus-A", "symmetric")


@dataclass(frozen=True)
class AlphaSpec:
    """How the penalty is given: ``raw`` value, ``percent`` of 1, or
    ``percentile`` of the positive difference-graph weights."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "raw":
            if not self.value > 0:
                raise AlphaError("alpha must be positive", code="E_ALPHA_POSITIVE")
            if self.value > 1:
                raise AlphaError(
                    f"alpha exceeds max pair weight ({self.value:g} > 1, summary weights lie in [0, 1])",
                    code="E_ALPHA_BOUND",
                )
        elif self.kind == "percent":
            if not 0 < self.value <= 100:
                raise AlphaError(f"percent alpha must lie in (0, 100], got {self.value}")
        elif self.kind == "percentile":
            if not 0 < self.value < 100:
                raise AlphaError(f"percentile alpha must lie in (0, 100), got {self.value}")
        else:
            raise AlphaError(f"unknown alpha kind {self.kind!r}")

    @classmethod
    def parse(cls, text) -> "AlphaSpec":
        """``0.8`` -> raw, ``80`` (an integer above 1) -> percent, ``p90`` -> percentile."""
        s = str(text).strip().lower()
        m = re.fullmatch(r"p(?:ctl)?\s*([0-9.]+)", s)
        if m:
            return cls("percentile", float(m.group(1)))
        if s.endswith("%"):
            return cls("percent", float(s[:-1]))
        try:
            x = float(s)
        except ValueError:
            raise AlphaError(f"cannot parse alpha {text!r}") from None
        if x <= 0:
            raise AlphaError("alpha must be positive", code="E_ALPHA_POSITIVE")
        return cls("percent", x) if x > 1 and x.is_integer() else cls("raw", x)

    def __str__(self):
        return {"raw": f"{self.value:g}", "percent": f"{self.value:g}%", "percentile": f"p{self.value:g}"}[self.kind]


def resolve_alpha(spec: AlphaSpec, d: DifferenceGraph | np.ndarray) -> float:
    """Turn an :class:`AlphaSpec` into a number and check it against ``d``.

    The resolved value must satisfy ``0 < alpha < max d``; otherwise every
    pair would be detrimental and the optimum would be the empty set.
    """
    m = d.d if isinstance(d, DifferenceGraph) else np.asarray(d)
    iu = np.triu_indices(m.shape[0], 1)
    pairs = m[iu]
    positive = pairs[pairs > 0]
    if positive.size == 0:
        raise AlphaError(
            "difference graph has no positive pair weight: every pair of vertices is detrimental",
            code="E_ALPHA_BOUND",
        )
    if spec.kind == "raw":
        alpha = spec.value
    elif spec.kind == "percent":
        alpha = spec.value / 100.0
    else:
        alpha = nearest_rank_percentile(positive, spec.value)
    top = float(positive.max())
    if not 0 < alpha < top:
        raise AlphaError(
            f"alpha exceeds max pair weight ({alpha:g} >= {top:g}): every pair of vertices is detrimental",
            code="E_ALPHA_BOUND",
        )
    return float(alpha)


@dataclass
class ContrastResult:
    vertices: frozenset
    objective: float
    alpha_resolved: float
    variant: str
    trace: SolverTrace
    summary_refs: dict = field(default_factory=dict)
    n: int = 0

    def to_dict(self, atlas=None) -> dict:
        out = {
            "vertices": sorted(self.vertices),
            "objective": self.objective,
            "alpha_resolved": self.alpha_resolved,
            "variant": self.variant,
            "trace": self.trace.to_dict(),
            "groups": self.summary_refs,
            "n": self.n,
        }
        if atlas is not None:
            out["vertex_names"] = [atlas[v] for v in sorted(self.vertices)]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ContrastResult":
        return cls(
            frozenset(d["vertices"]),
            d["objective"],
            d["alpha_resolved"],
            d["variant"],
            SolverTrace.from_dict(d["trace"]),
            d.get("groups", {}),
            d.get("n", 0),
        )


def _check_groups(a: GraphGroup, b: GraphGroup):
    if a.n != b.n:
        raise ContrastError(f"dimension mismatch: group A has n={a.n}, group B has n={b.n}", code="E_DIMENSION")


def difference_graph(a: GraphGroup, b: GraphGroup, mode="signed", summary_mode="fraction", threshold=0.5):
    _check_groups(a, b)
    sa = build_summary(a, summary_mode, threshold)
    sb = build_summary(b, summary_mode, threshold)
    return build_difference(sa, sb, mode)


def _run(a, b, alpha, cfg, mode, variant, summary_mode, threshold):
    if not isinstance(alpha, AlphaSpec):
        alpha = AlphaSpec.parse(alpha)
    d = difference_graph(a, b, mode, summary_mode, threshold)
    value = resolve_alpha(alpha, d)
    inst = GoqcInstance(d.d, value)
    vertices, objective, trace = solve(inst, cfg or SolverConfig())
    refs = {
        "a": {"label": a.label, "size": len(a)},
        "b": {"label": b.label, "size": len(b)},
        "summary_mode": summary_mode,
        "alpha_spec": str(alpha),
    }
    return ContrastResult(vertices, objective, value, variant, trace, refs, a.n)


def extract(a: GraphGroup, b: GraphGroup, alpha, cfg: SolverConfig | None = None,
            summary_mode="fraction", threshold=0.5) -> ContrastResult:
    """Vertex set dense in ``a`` and sparse in ``b``.

    The objective is not symmetric; call ``extract(b, a, ...)`` for the other
    direction.
    """
    variant = "A-minus-B" if (a.label, b.label) != ("B", "A") else "B-minus-A"
    return _run(a, b, alpha, cfg, "signed", variant, summary_mode, threshold)


def extract_symmetric(a: GraphGroup, b: GraphGroup, alpha, cfg: SolverConfig | None = None,
                      summary_mode="fraction", threshold=0.5) -> ContrastResult:
    """Vertex set maximizing the absolute difference between the groups."""
    return _run(a, b, alpha, cfg, "absolute", "symmetric", summary_mode, threshold)


def contrast_objective(a: GraphGroup, b: GraphGroup, s, alpha: float, symmetric=False) -> float:
    """Score ``s`` directly from the summaries (no solver involved)."""
    d = difference_graph(a, b, "absolute" if symmetric else "signed")
    return goqc_objective(GoqcInstance(d.d, alpha), s)


def display_edges(result: ContrastResult, d: np.ndarray, threshold: float = 0.1):
    """Pairs inside the result whose difference weight is at least ``threshold``.

    For the symmetric variant the absolute weight is compared and the sign
    is reported.
    """
    vs = sorted(result.vertices)
    rows = []
    for i, u in enumerate(vs):
        for v in vs[i + 1:]:
            x = float(d[u, v])
            key = abs(x) if result.variant == "symmetric" else x
            if key >= threshold:
                rows.append((u, v, x))
    return rows
