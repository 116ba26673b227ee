import itertools
import math

import numpy as np
import pytest
import scipy.stats
import sympy
from hypothesis import given, settings, strategies as st

from ctmbdm.bdm import BdmConfig
from ctmbdm.harness import (
    Graph, all_strings, average_ranks, char_poly, correlation_sweep, default_sweep_configs,
    format_poly, generate_graph_corpus, graph_pair_report, is_cospectral, line_graph,
    measure_report, parse_graph, parse_sweep_config, shipped_corpus, shipped_graph,
    shipped_strings, spearman, sweep_config,
)

K3 = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
P3 = Graph.from_edges(3, [(0, 1), (1, 2)])
K13 = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])


def sympy_char_poly(g):
    """Oracle: symbolic determinant of xI - A."""
    x = sympy.Symbol("x")
    a = sympy.Matrix(g.adjacency().astype(int).tolist())
    return [int(c) for c in sympy.Poly((x * sympy.eye(g.n) - a).det(), x).all_coeffs()]


def random_graph(rng, n, p=0.3):
    return Graph.from_edges(n, [(u, v) for u, v in itertools.combinations(range(n), 2)
                                if rng.random() < p])


# -- spearman ------------------------------------------------------------------

def test_spearman_examples():
    xs = [3.0, 1.0, 4.0, 1.5, 9.0]
    assert spearman(xs, xs) == 1.0
    assert spearman(xs, [-x for x in xs]) == -1.0
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)


def test_spearman_errors():
    with pytest.raises(ValueError, match="length"):
        spearman([1, 2, 3], [1, 2])
    with pytest.raises(ValueError, match="constant"):
        spearman([1, 2, 3], [5, 5, 5])


def test_average_ranks():
    assert average_ranks([10, 20, 20, 5]) == [2.0, 3.5, 3.5, 1.0]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=3, max_size=40))
def test_spearman_matches_scipy(pairs):
    xs, ys = zip(*pairs)
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        return
    assert spearman(xs, ys) == pytest.approx(scipy.stats.spearmanr(xs, ys).statistic, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=3, max_size=30, unique=True))
def test_spearman_monotone_transform(xs):
    assert spearman(xs, xs) == 1.0
    assert spearman(xs, [x**3 + 2 * x for x in xs]) == pytest.approx(1.0, abs=1e-12)


# -- sweep ---------------------------------------------------------------------

def test_config_parsing():
    assert parse_sweep_config("b11o10") == (11, 10)
    assert sweep_config(11, 10) == BdmConfig(11, 1)
    assert sweep_config(1, 0) == BdmConfig(1, 1)
    with pytest.raises(ValueError):
        parse_sweep_config("11-10")
    assert len(default_sweep_configs(4)) == 10


def test_identity_config(d32):
    strings = all_strings(7)
    report = correlation_sweep(strings, d32, [(7, 0), (1, 0)], baselines=False)
    assert report.rho("b7o0") == 1.0


def test_single_symbol_blocks_track_entropy(d32):
    strings = all_strings(10)
    report = correlation_sweep(strings, d32, ["b1o0"], reference="entropy", both_symbols=True)
    assert report.rho("b1o0") == pytest.approx(1.0, abs=1e-12)


def test_sweep_skips_and_notes(d32):
    report = correlation_sweep(all_strings(6), d32, ["b7o0", "b8o1", "b3o1"])
    notes = {row.name: row.note for row in report.rows}
    assert report.rho("b7o0") is None and "longer than strings" in notes["b7o0"]
    assert report.rho("b3o1") is not None
    assert [row.name for row in report.rows][-3:] == ["H1", "H2", "best_H"]


def test_sweep_reference_unavailable(d32):
    report = correlation_sweep(all_strings(8), d32, ["b2o0", "b4o0"])
    assert [row.rho for row in report.rows] == [None] * len(report.rows)
    assert "reference unavailable" in report.rows[0].note


def test_sweep_is_deterministic(d32):
    configs = default_sweep_configs(7)
    a = correlation_sweep(all_strings(10), d32, configs, reference="entropy").to_text()
    b = correlation_sweep(all_strings(10), d32, configs, reference="entropy").to_text()
    assert a == b and a.count("\n") == len(configs) + 3


# -- graphs ----------------------------------------------------------------------

def test_char_poly_examples():
    assert char_poly(Graph(1, frozenset())) == [1, 0]
    assert char_poly(K3) == [1, 0, -3, -2]
    assert char_poly(P3) == [1, 0, -2, 0]
    assert format_poly(char_poly(K3)) == "x^3 - 3x - 2"


def test_char_poly_against_sympy(rng):
    for _ in range(15):
        g = random_graph(rng, int(rng.integers(1, 9)))
        assert char_poly(g) == sympy_char_poly(g)


def test_cospectral_pairs():
    star, c4k1 = shipped_graph("star_k14"), shipped_graph("cycle_c4_plus_k1")
    assert char_poly(star) == sympy_char_poly(c4k1)
    assert is_cospectral(star, c4k1)
    assert is_cospectral(K3, K3)
    assert not is_cospectral(K3, P3)


def test_char_poly_relabel_invariance(rng):
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(5, 12)))
        ref = char_poly(g)
        for _ in range(100):
            assert char_poly(g.relabel(rng.permutation(g.n).tolist())) == ref


def test_line_graph_examples():
    assert line_graph(P3).n == 2 and line_graph(P3).edges == {(0, 1)}
    assert is_cospectral(line_graph(K3), K3) and len(line_graph(K3).edges) == 3
    assert len(line_graph(K13).edges) == 3 and line_graph(K13).n == 3
    with pytest.raises(ValueError):
        line_graph(Graph(3, frozenset()))


def test_line_graph_bruteforce(rng):
    for _ in range(10):
        g = random_graph(rng, 7, 0.4)
        if not g.edges:
            continue
        lg = line_graph(g)
        edges = sorted(g.edges)
        for i, j in itertools.combinations(range(len(edges)), 2):
            shares = len(set(edges[i]) & set(edges[j])) > 0
            assert ((i, j) in lg.edges) == shares


def test_graph_validation_and_io(tmp_path):
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        parse_graph("3 1\n2 1\n")
    with pytest.raises(ValueError):
        parse_graph("3 2\n0 1\n")
    g = parse_graph("4 2\n0 1\n2 3\n")
    assert parse_graph(g.to_text()) == g
    a = g.adjacency()
    assert (a == a.T).all() and not a.diagonal().any()


def test_corpus_is_reproducible():
    corpus = shipped_corpus()
    assert len(corpus) >= 30
    assert all(8 <= g.n <= 16 for g in corpus)
    assert [g.to_text() for g in generate_graph_corpus()] == [g.to_text() for g in corpus]


def test_graph_pair_report(d2d):
    corpus = shipped_corpus()
    a = graph_pair_report(corpus, d2d, BdmConfig(4))
    b = graph_pair_report(corpus, d2d, BdmConfig(4))
    assert a.to_text() == b.to_text()
    assert a.rho > 0


def test_external_partners(d2d):
    corpus = shipped_corpus()[:5]
    rep = graph_pair_report(corpus, d2d, BdmConfig(2), partners=corpus)
    assert rep.rho == 1.0
    with pytest.raises(ValueError):
        graph_pair_report(corpus, d2d, BdmConfig(2), partners=corpus[:2])


# -- measure report --------------------------------------------------------------

def test_empty_report(d42s):
    assert measure_report([], d42s, [BdmConfig(4)]) == "id,H1,best_H,best_l,bdm_b4m4-trim,nbdm,note\n"


def test_shipped_strings_report(d42s):
    strings = shipped_strings()
    assert len(strings) == 116 and len(set(strings)) == 116
    text = measure_report(strings, d42s, [BdmConfig(4), BdmConfig(8, 1)], ids=strings, nbdm_block=4)
    rows = [line.split(",") for line in text.splitlines()[1:]]
    assert len(rows) == 116 and all(r[-1] == "" for r in rows)
    assert all(len(r[1].split(".")[1]) == 6 for r in rows)


def test_report_annotates_errors(d42s):
    text = measure_report(["0110", "01"], d42s, [BdmConfig(4)])
    lines = text.splitlines()
    assert lines[2].startswith("1,") and "error: object below block size" in lines[2]


def test_matrix_report(d2d, rng):
    mats = [rng.integers(0, 2, (8, 8)) for _ in range(3)]
    text = measure_report(mats, d2d, [BdmConfig(4)], nbdm_block=2)
    assert len(text.splitlines()) == 4
