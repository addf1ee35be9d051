import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contrast_subgraph.errors import ContrastError, GroupError
from contrast_subgraph.graphs import GraphGroup, ObservationGraph
from contrast_subgraph.summarize import (
    SummaryGraph,
    build_difference,
    build_summary,
    dump_difference_matrix,
    load_difference_matrix,
    weighted_degrees,
)


def group(n, edge_sets, label="A", weights=None):
    members = []
    for i, es in enumerate(edge_sets):
        w = None if weights is None else weights[i]
        members.append(ObservationGraph(n, frozenset(es), f"{label}{i}", label, w))
    return GraphGroup(label, tuple(members))


def test_fraction_mode_basics():
    s = build_summary(group(3, [[(0, 1)], [(0, 1)]]))
    assert s.w[0, 1] == 1.0 and s.w[1, 0] == 1.0
    s = build_summary(group(3, [[(0, 1)], []]))
    assert s.w[0, 1] == 0.5
    assert s.group_size == 2 and s.mode == "fraction"


def test_binary_mode_is_strict():
    g = group(3, [[(0, 1)], [], [(0, 1), (1, 2)], [(1, 2)]])
    s = build_summary(g, "binary", threshold=0.5)
    assert s.w[0, 1] == 0.0
    s = build_summary(g, "binary", threshold=0.4)
    assert s.w[0, 1] == 1.0


def test_weighted_mean_mode():
    g = group(3, [[(0, 1)], [(0, 1), (1, 2)]], weights=[{(0, 1): 0.4}, {(0, 1): 0.8, (1, 2): 2.0}])
    s = build_summary(g, "weighted-mean")
    assert s.w[0, 1] == pytest.approx(0.6)
    assert s.w[1, 2] == pytest.approx(1.0)
    with pytest.raises(GroupError, match="weighted-mean"):
        build_summary(group(3, [[(0, 1)]]), "weighted-mean")


def test_empty_group():
    with pytest.raises(GroupError, match="empty group"):
        GraphGroup("A", ())


def test_difference_examples():
    a = SummaryGraph(np.array([[0, 1.0], [1.0, 0]]), "A", 4)
    b = SummaryGraph(np.array([[0, 0.25], [0.25, 0]]), "B", 4)
    assert build_difference(a, b, "signed").d[0, 1] == 0.75
    a = SummaryGraph(np.array([[0, 0.2], [0.2, 0]]), "A", 5)
    b = SummaryGraph(np.array([[0, 0.9], [0.9, 0]]), "B", 10)
    assert build_difference(a, b, "absolute").d[0, 1] == pytest.approx(0.7)
    for mode in ("signed", "absolute"):
        assert not np.any(build_difference(a, a, mode).d)


def test_difference_dimension_mismatch():
    a = SummaryGraph(np.zeros((2, 2)), "A", 1)
    b = SummaryGraph(np.zeros((3, 3)), "B", 1)
    with pytest.raises(ContrastError, match="dimension mismatch"):
        build_difference(a, b)


def test_weighted_degrees():
    assert not np.any(weighted_degrees(SummaryGraph(np.zeros((3, 3)), "A", 1)))
    s = build_summary(group(4, [[(0, 1), (1, 2), (0, 2)]]))
    assert weighted_degrees(s).tolist() == [2, 2, 2, 0]


def test_dump_difference_matrix(tmp_path):
    a = SummaryGraph(np.zeros((2, 2)), "A", 1)
    dump_difference_matrix(build_difference(a, a), tmp_path / "z.csv")
    assert (tmp_path / "z.csv").read_text() == "0,0\n0,0\n"
    rng = np.random.default_rng(3)
    m = np.triu(rng.uniform(-1, 1, (5, 5)), 1)
    d = build_difference(SummaryGraph(m + m.T, "A", 1), SummaryGraph(np.zeros((5, 5)), "B", 1))
    dump_difference_matrix(d, tmp_path / "d.csv")
    assert "-" in (tmp_path / "d.csv").read_text()
    back = load_difference_matrix(tmp_path / "d.csv")
    np.testing.assert_allclose(back.d, d.d, atol=1e-12, rtol=0)


groups = st.integers(2, 7).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1])),
                 min_size=1, max_size=6),
        st.lists(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1])),
                 min_size=1, max_size=6),
    )
)


@settings(max_examples=80, deadline=None)
@given(groups)
def test_summary_properties(case):
    n, ea, eb = case
    ga, gb = group(n, ea, "A"), group(n, eb, "B")
    sa, sb = build_summary(ga), build_summary(gb)
    r = len(ea)
    # recount memberships pair by pair
    for u in range(n):
        for v in range(n):
            count = sum((min(u, v), max(u, v)) in es for es in ea) if u != v else 0
            assert sa.w[u, v] == count / r
    assert np.all((sa.w >= 0) & (sa.w <= 1))
    assert np.allclose(sa.w * r, np.round(sa.w * r), atol=1e-12)
    assert np.array_equal(sa.w, sa.w.T) and not np.any(np.diag(sa.w))
    sab, sba = build_difference(sa, sb, "signed"), build_difference(sb, sa, "signed")
    assert np.array_equal(sab.d, -sba.d)
    assert np.all((sab.d >= -1) & (sab.d <= 1))
    aab, aba = build_difference(sa, sb, "absolute"), build_difference(sb, sa, "absolute")
    assert np.array_equal(aab.d, aba.d)
    deg = weighted_degrees(sa)
    iu = np.triu_indices(n, 1)
    assert deg.sum() == pytest.approx(2 * sa.w[iu].sum())
