"""Two-feature classification from contrast subgraphs.

P1 features count the edges a subject has inside each directional contrast
subgraph. P2 features measure the L1 distance between a subject's induced
subgraph on the symmetric contrast subgraph and each group's summary there.

Evaluation repeats: stratified 80/20 split, 5-fold CV over the penalty
grid on the training part, refit, score on the held-out part.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sklearn.model_selection import StratifiedKFold, StratifiedShuffleSplit

from ._io import atomic_write_text
from .errors import ProtocolError
from .graphs import ObservationGraph, _check_vertices, edge_count_induced
from .summarize import SummaryGraph

C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
RATIO_GRID = (0.25, 1 / 3, 0.5, 1.0, 2.0, 3.0, 4.0)
EPOCHS = 2000
N_FOLDS = 5
TEST_FRACTION = 0.2


@dataclass
class FeatureTable:
    subject_ids: list
    labels: list
    X: np.ndarray
    scheme: str = "P1"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).reshape(-1, 2)
        if not (len(self.subject_ids) == len(self.labels) == self.X.shape[0]):
            raise ValueError("subject ids, labels and feature rows differ in length")

    def __len__(self):
        return len(self.labels)

    @property
    def rows(self):
        return [(s, l, float(x), float(y)) for s, l, (x, y) in zip(self.subject_ids, self.labels, self.X)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subject_id", "label", "x", "y"])
        for s, l, x, y in self.rows:
            if self.scheme == "P1":
                w.writerow([s, l, int(x), int(y)])
            else:
                w.writerow([s, l, repr(x), repr(y)])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        atomic_write_text(path, self.to_csv())

    @classmethod
    def read_csv(cls, path, scheme="P1") -> "FeatureTable":
        with open(path, encoding="utf-8", newline="") as fh:
            recs = list(csv.DictReader(fh))
        return cls(
            [r["subject_id"] for r in recs],
            [r["label"] for r in recs],
            np.array([[float(r["x"]), float(r["y"])] for r in recs]).reshape(-1, 2),
            scheme,
        )

    def with_labels(self, labels) -> "FeatureTable":
        return FeatureTable(list(self.subject_ids), list(labels), self.X.copy(), self.scheme, dict(self.provenance))


def features_p1(subjects: Sequence[ObservationGraph], s_ab, s_ba, provenance=None) -> FeatureTable:
    """Edge counts inside the A-minus-B set (x) and the B-minus-A set (y)."""
    X = [(edge_count_induced(g, s_ab), edge_count_induced(g, s_ba)) for g in subjects]
    prov = {"size_x": len(set(s_ab)), "size_y": len(set(s_ba))}
    prov.update(provenance or {})
    return FeatureTable([g.subject_id for g in subjects], [g.label for g in subjects], np.array(X, float), "P1", prov)


def features_p2(subjects: Sequence[ObservationGraph], s, sum_a: SummaryGraph, sum_b: SummaryGraph,
                provenance=None) -> FeatureTable:
    """L1 distance of each subject's induced subgraph to summary A (x) and B (y)."""
    if sum_a.n != sum_b.n:
        raise ValueError("summaries disagree on the vertex count")
    idx = _check_vertices(s, sum_a.n)
    iu, iv = np.triu_indices(idx.size, 1)
    pu, pv = idx[iu], idx[iv]
    wa, wb = sum_a.w[pu, pv], sum_b.w[pu, pv]
    X = []
    for g in subjects:
        a = g.adjacency[pu, pv]
        X.append((np.abs(a - wa).sum(), np.abs(a - wb).sum()))
    prov = {"size_x": int(idx.size), "size_y": int(idx.size)}
    prov.update(provenance or {})
    return FeatureTable([g.subject_id for g in subjects], [g.label for g in subjects],
                        np.array(X, float).reshape(-1, 2), "P2", prov)


# --- classifier --------------------------------------------------------------


def _expand(Z: np.ndarray, quadratic: bool) -> np.ndarray:
    if not quadratic:
        return Z
    x, y = Z[:, 0], Z[:, 1]
    return np.column_stack([x, y, x * x, x * y, y * y])


def _hinge_fit(X: np.ndarray, y: np.ndarray, cs: Sequence[float], epochs: int = EPOCHS) -> np.ndarray:
    """Full-batch Pegasos for several penalties at once.

    ``X`` already carries a constant column for the bias. Returns one weight
    row per entry of ``cs``.
    """
    n, d = X.shape
    lam = 1.0 / (np.asarray(cs, float)[:, None] * n)
    radius = 1.0 / np.sqrt(lam)
    W = np.zeros((lam.shape[0], d))
    yX = y[:, None] * X
    for t in range(1, epochs + 1):
        active = (yX @ W.T) < 1.0
        grad = lam * W - (active.T @ yX) / n
        W -= grad / (lam * t)
        norm = np.linalg.norm(W, axis=1, keepdims=True)
        W *= np.minimum(1.0, radius / np.maximum(norm, 1e-300))
    return W


@dataclass
class ClassifierModel:
    weights: np.ndarray
    bias: float
    hyper_c: float
    feature_scaling: tuple = ((0.0, 1.0), (0.0, 1.0))
    quadratic: bool = False

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, float).reshape(-1, 2)
        mean = np.array([m for m, _ in self.feature_scaling])
        std = np.array([s for _, s in self.feature_scaling])
        Z = _expand((X - mean) / std, self.quadratic)
        return Z @ self.weights + self.bias

    def predict(self, X) -> list:
        return ["A" if s > 0 else "B" for s in self.decision_function(X)]


def _encode(labels) -> np.ndarray:
    y = np.array([1.0 if l == "A" else -1.0 for l in labels])
    return y


def _scaling(X: np.ndarray, standardize: bool):
    if not standardize:
        return ((0.0, 1.0), (0.0, 1.0))
    mean, std = X.mean(axis=0), X.std(axis=0)
    std[std == 0] = 1.0
    return tuple((float(m), float(s)) for m, s in zip(mean, std))


def fit_models(X, labels, cs=C_GRID, standardize=True, quadratic=False, epochs=EPOCHS) -> list:
    """One fitted model per penalty in ``cs``; scaling comes from ``X`` only."""
    X = np.asarray(X, float)
    scaling = _scaling(X, standardize)
    mean = np.array([m for m, _ in scaling])
    std = np.array([s for _, s in scaling])
    Z = _expand((X - mean) / std, quadratic)
    Za = np.column_stack([Z, np.ones(len(Z))])
    W = _hinge_fit(Za, _encode(labels), cs, epochs)
    return [ClassifierModel(w[:-1].copy(), float(w[-1]), float(c), scaling, quadratic) for w, c in zip(W, cs)]


def fit_classifier(X, labels, hyper_c=1.0, standardize=True, quadratic=False) -> ClassifierModel:
    return fit_models(X, labels, (hyper_c,), standardize, quadratic)[0]


def accuracy(model: ClassifierModel, X, labels) -> float:
    pred = model.predict(X)
    return float(np.mean([p == l for p, l in zip(pred, labels)]))


@dataclass
class EvalReport:
    accuracies: list
    per_repetition_seeds: list
    chosen_hyper_c: list
    scheme: str = "P1"
    protocol: str = "fixed-features"
    mean: float = field(init=False)
    stdev: float = field(init=False)

    def __post_init__(self):
        acc = np.asarray(self.accuracies, float)
        self.mean = float(acc.mean())
        self.stdev = float(acc.std())

    def to_dict(self) -> dict:
        return {
            "accuracies": list(self.accuracies),
            "mean": self.mean,
            "stdev": self.stdev,
            "per_repetition_seeds": list(self.per_repetition_seeds),
            "chosen_hyper_c": list(self.chosen_hyper_c),
            "scheme": self.scheme,
            "protocol": self.protocol,
        }


def repetition_seeds(rng_seed: int, repetitions: int) -> list:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(rng_seed).spawn(repetitions)]


def _check_table(labels, n_folds=N_FOLDS):
    labels = list(labels)
    classes = set(labels)
    if classes != {"A", "B"}:
        raise ProtocolError(f"need both labels A and B, got {sorted(classes)}", code="E_SINGLE_CLASS")
    if len(labels) < 10:
        raise ProtocolError(f"need at least 10 rows, got {len(labels)}", code="E_TOO_FEW")
    # each class must still fill every fold after the 80/20 split
    smallest = min(labels.count("A"), labels.count("B"))
    if math.floor(smallest * (1 - TEST_FRACTION)) < n_folds:
        raise ProtocolError(f"fewer rows than folds in the smaller class ({smallest})", code="E_TOO_FEW")


def select_c(X, labels, seed: int, standardize=True, quadratic=False) -> float:
    """Penalty with the best mean 5-fold accuracy (smallest wins ties)."""
    labels = np.asarray(labels)
    folds = StratifiedKFold(N_FOLDS, shuffle=True, random_state=seed)
    scores = np.zeros(len(C_GRID))
    for tr, va in folds.split(X, labels):
        models = fit_models(X[tr], labels[tr], C_GRID, standardize, quadratic)
        scores += [accuracy(m, X[va], labels[va]) for m in models]
    return C_GRID[int(np.argmax(scores / N_FOLDS))]


def run_protocol(labels, featurize: Callable[[np.ndarray], np.ndarray], repetitions=5, rng_seed=0,
                 standardize=True, quadratic=False, scheme="P1", protocol="fixed-features") -> EvalReport:
    """Repeated split / tune / test loop.

    ``featurize(train_idx)`` returns the feature matrix of *all* subjects,
    computed from whatever it is allowed to learn on ``train_idx``.
    """
    labels = np.asarray(list(labels))
    _check_table(labels)
    seeds = repetition_seeds(rng_seed, repetitions)
    accs, chosen = [], []
    for seed in seeds:
        split = StratifiedShuffleSplit(1, test_size=TEST_FRACTION, random_state=seed % 2**32)
        tr, te = next(split.split(np.zeros(len(labels)), labels))
        X = np.asarray(featurize(tr), float)
        c = select_c(X[tr], labels[tr], seed % 2**32, standardize, quadratic)
        model = fit_classifier(X[tr], labels[tr], c, standardize, quadratic)
        accs.append(accuracy(model, X[te], labels[te]))
        chosen.append(c)
    return EvalReport(accs, seeds, chosen, scheme, protocol)


def train_eval(table: FeatureTable, repetitions=5, rng_seed=0, standardize=True, quadratic=False) -> EvalReport:
    return run_protocol(table.labels, lambda _: table.X, repetitions, rng_seed, standardize, quadratic, table.scheme)


def permute_labels(table: FeatureTable, rng) -> FeatureTable:
    return table.with_labels(list(rng.permutation(np.asarray(table.labels))))


# --- decision rules ------------------------------------------------------------


@dataclass
class Rule:
    kind: str
    feature: str
    threshold: float | None
    predicts: str
    accuracy: float
    sentence: str = ""

    def __str__(self):
        other = "B" if self.predicts == "A" else "A"
        if self.kind == "threshold":
            if self.threshold is None:
                return f"always {self.predicts}"
            return f"{self.feature} > {self.threshold:g} ⇒ {self.predicts}"
        return f"y < {self.threshold:g}·x ⇒ {self.predicts} (else {other})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "feature": self.feature, "threshold": self.threshold,
                "predicts": self.predicts, "accuracy": self.accuracy, "rule": str(self),
                "sentence": self.sentence}


def _best_split(values, y):
    """(accuracy, threshold, predicts) for the rule ``value > t => predicts``."""
    distinct = np.unique(values)
    n = len(y)
    n_a = int(np.sum(y == "A"))
    majority = "A" if n_a >= n - n_a else "B"
    best = (max(n_a, n - n_a) / n, None, majority)
    for t in (distinct[:-1] + distinct[1:]) / 2:
        above = values > t
        acc_a = (np.sum(above & (y == "A")) + np.sum(~above & (y == "B"))) / n
        for acc, pred in ((acc_a, "A"), (1 - acc_a, "B")):
            if acc > best[0] + 1e-12:
                best = (float(acc), float(t), pred)
    return best


def _describe(table: FeatureTable, feature: str, t, pred) -> str:
    size = table.provenance.get("size_x" if feature == "x" else "size_y")
    if table.scheme == "P1":
        direction = "A-B" if feature == "x" else "B-A"
        among = f" among the {size} vertices" if size is not None else ""
        if t is None:
            return f"Edge counts of the {direction} contrast subgraph do not separate the classes; predict {pred}."
        return (f"If a subject has more than {t:g} edges{among} of the {direction} contrast subgraph, "
                f"the subject is likely {pred}.")
    target = "A" if feature == "x" else "B"
    if t is None:
        return f"The L1 distance to the {target} summary does not separate the classes; predict {pred}."
    return (f"If the L1 distance between a subject's contrast subgraph and the {target} summary "
            f"is larger than {t:g}, the subject is likely {pred}.")


def _describe_ratio(table: FeatureTable, k, pred) -> str:
    frac = {0.25: "a quarter of", 1 / 3: "a third of", 0.5: "half of", 1.0: "", 2.0: "twice",
            3.0: "three times", 4.0: "four times"}[k]
    if table.scheme == "P1":
        return (f"If the number of edges induced by the B-A contrast subgraph is smaller than {frac} "
                f"the number of edges induced by the A-B contrast subgraph, the subject is likely {pred}."
                ).replace("than  the", "than the")
    return (f"If the L1 distance to the B summary is smaller than {frac} the L1 distance to the A summary, "
            f"the subject is likely {pred}.").replace("than  the", "than the")


def extract_rules(table: FeatureTable) -> list:
    """Best single-axis threshold rules and the best ratio rule ``y < k x``.

    Thresholds are midpoints between adjacent distinct values; among equally
    accurate thresholds the lowest is kept.
    """
    y = np.asarray(table.labels)
    if set(y.tolist()) != {"A", "B"}:
        raise ProtocolError("rule extraction needs both labels", code="E_SINGLE_CLASS")
    rules = []
    for j, name in enumerate(("x", "y")):
        acc, t, pred = _best_split(table.X[:, j], y)
        rules.append(Rule("threshold", name, t, pred, acc, _describe(table, name, t, pred)))
    n = len(y)
    best = None
    for k in RATIO_GRID:
        below = table.X[:, 1] < k * table.X[:, 0]
        acc_a = float((np.sum(below & (y == "A")) + np.sum(~below & (y == "B"))) / n)
        for acc, pred in ((acc_a, "A"), (1 - acc_a, "B")):
            if best is None or acc > best[0] + 1e-12:
                best = (acc, k, pred)
    acc, k, pred = best
    rules.append(Rule("ratio", "y/x", k, pred, acc, _describe_ratio(table, k, pred)))
    return rules


def decision_grid(model: ClassifierModel, X, size: int = 200) -> np.ndarray:
    """Model score on a ``size x size`` grid spanning the bounding box of ``X``.

    Returns rows ``(x, y, score)``.
    """
    X = np.asarray(X, float)
    lo, hi = X.min(axis=0), X.max(axis=0)
    hi = np.where(hi > lo, hi, lo + 1.0)
    gx = np.linspace(lo[0], hi[0], size)
    gy = np.linspace(lo[1], hi[1], size)
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return np.column_stack([pts, model.decision_function(pts)])
