import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp
from rama.analysis.coloring import (
    brute_force_chromatic, chromatic_lower_bound, chromatic_number, color_class_cover_check, greedy_coloring,
    is_valid_coloring,
)
from rama.analysis.discrepancy import (
    bipartite_mixing_check, discrepancy, discrepancy_reduction_check, edge_count, hypergraph_mixing_check,
    random_partite_corpus, sampled_bipartite_mixing,
)
from rama.analysis.geometry import (
    ball_sizes, bipartiteness_check, diameter_check, girth_lower_bounds, graph_diameter, injectivity_radius,
    tree_ball_sizes,
)
from rama.complex.hypergraph import (
    PartiteHypergraph, bipartite_graph_hypergraph, is_type_regular, walls_and_incidence,
)
from rama.core.errors import DomainError, PreconditionError
from rama.core.prng import SplitMix64
from rama.spectral.spectra import incidence_lambda

FANO = [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)]


def cycle(n):
    rows = list(range(n)) + [(v + 1) % n for v in range(n)]
    cols = [(v + 1) % n for v in range(n)] + list(range(n))
    return sp.csr_matrix((np.ones(2 * n), (rows, cols)), shape=(n, n))


def c6():
    return bipartite_graph_hypergraph(cycle(6), [v % 2 for v in range(6)])


def graph_hypergraph(n, edges):
    return PartiteHypergraph(d=2, n=n, facets=[tuple(sorted(e)) for e in edges])


def lam_tildes(h):
    return [incidence_lambda(walls_and_incidence(h, i)[1])[1] for i in range(h.d - 1)]


# --- discrepancy -----------------------------------------------------------

def test_discrepancy_c6_pair():
    g = c6()
    disc, exact = discrepancy(g, [[0], [1]])
    assert exact == Fraction(1, 18), "1/6 - 1/9"
    assert disc == pytest.approx(1 / 18)
    assert edge_count(g, [[0], [1]]) == 1
    assert edge_count(g, [[0], [3]]) == 0


def test_discrepancy_validates_subsets():
    with pytest.raises(PreconditionError):
        discrepancy(c6(), [[1], [0]])


def test_bipartite_mixing_c6():
    g = c6()
    lt = lam_tildes(g)[0]
    assert lt == pytest.approx(0.5), "lambda(C_6) = 1 over sqrt(2 * 2)"
    report = bipartite_mixing_check(g, [0], [1], lt)
    assert report.passed, report.render()
    assert report.lines[0].measured == Fraction(1, 18)
    assert report.lines[0].bound == pytest.approx(1 / 6)


def test_sampled_bipartite_mixing_is_deterministic():
    g = c6()
    a = sampled_bipartite_mixing(g, 0.5, 200, 7)
    b = sampled_bipartite_mixing(g, 0.5, 200, 7)
    assert a.passed, a.render()
    assert a.render() == b.render()
    assert a.render_csv() == b.render_csv()
    assert len(a.csv_rows) == 201


def test_bipartite_mixing_detects_a_wrong_eigenvalue():
    report = sampled_bipartite_mixing(c6(), 0.0, 200, 7)
    assert not report.passed, "lambda~ = 0 is too small for C_6"


def test_hypergraph_mixing_complete_partite_has_zero_discrepancy():
    facets = [(a, 2 + b, 4 + c) for a in range(2) for b in range(2) for c in range(2)]
    h = PartiteHypergraph(d=3, n=6, facets=facets, types=[0, 0, 1, 1, 2, 2], r=3)
    report = hypergraph_mixing_check(h, [0.0, 0.0], mode="exhaustive")
    assert report.passed
    assert report.families == 2 ** 6
    assert report.max_disc_exact == "0"


def test_hypergraph_mixing_corpus_exhaustive():
    corpus = random_partite_corpus(seed=11, count=50, d_values=(2, 3), max_vertices=12)
    assert len(corpus) == 50
    for h in corpus:
        assert is_type_regular(h)
        report = hypergraph_mixing_check(h, lam_tildes(h), mode="exhaustive")
        assert report.passed, f"{report.failures} failures on {h.facets}"


def test_hypergraph_mixing_sampled_threads_agree():
    h = random_partite_corpus(seed=3, count=4, d_values=(3,), max_vertices=12)[1]
    lt = lam_tildes(h)
    one = hypergraph_mixing_check(h, lt, mode="sampled", samples=300, seed=5, threads=1)
    many = hypergraph_mixing_check(h, lt, mode="sampled", samples=300, seed=5, threads=4)
    assert one.samples == many.samples, "Thread count must not change sampled results"
    assert one.passed


def test_hypergraph_mixing_preconditions():
    h = PartiteHypergraph(d=2, n=4, facets=[(0, 2), (0, 3), (1, 2)], types=[0, 0, 1, 1], r=2)
    with pytest.raises(PreconditionError):
        hypergraph_mixing_check(h, [0.5])
    big = bipartite_graph_hypergraph(cycle(26), [v % 2 for v in range(26)])
    with pytest.raises(PreconditionError):
        hypergraph_mixing_check(big, [0.9], mode="exhaustive")


def test_discrepancy_reduction_corpus():
    rng = SplitMix64(17)
    for h in random_partite_corpus(seed=5, count=30, d_values=(2, 3), max_vertices=12):
        subsets = [rng.random_subset(c) for c in h.type_classes()]
        for i in range(h.d):
            report = discrepancy_reduction_check(h, subsets, i)
            assert report.passed, report.render()


# --- coloring ----------------------------------------------------------------

@pytest.mark.parametrize("h,expected", [
    (graph_hypergraph(5, [(v, (v + 1) % 5) for v in range(5)]), 3),
    (graph_hypergraph(6, [(v, (v + 1) % 6) for v in range(6)]), 2),
    (graph_hypergraph(4, [(a, b) for a in range(4) for b in range(a + 1, 4)]), 4),
    (PartiteHypergraph(d=3, n=7, facets=FANO), 3),
])
def test_chromatic_number_small(h, expected):
    result = chromatic_number(h)
    assert result.count == expected
    assert is_valid_coloring(h, result.colors)
    assert brute_force_chromatic(h) == expected
    assert greedy_coloring(h).count >= expected


def test_chromatic_matches_brute_force_on_corpus():
    for h in random_partite_corpus(seed=23, count=20, d_values=(2, 3), max_vertices=12):
        assert chromatic_number(h).count == brute_force_chromatic(h)


def test_chromatic_limits():
    big = graph_hypergraph(70, [(v, (v + 1) % 70) for v in range(70)])
    with pytest.raises(PreconditionError):
        chromatic_number(big, mode="exact")
    assert chromatic_number(big, mode="greedy").count >= 2
    with pytest.raises(PreconditionError):
        chromatic_number(big, mode="fast")


def test_chromatic_lower_bound():
    bound = chromatic_lower_bound(1, 81, 2, [0.25])
    assert bound.half_root == pytest.approx(1.5)
    assert bound.empirical == pytest.approx(2.0)
    assert bound.best == pytest.approx(2.0)
    assert not bound.vacuous
    assert chromatic_lower_bound(1, 3, 2, [4.0]).vacuous, "every form at most 1"
    with pytest.raises(PreconditionError):
        chromatic_lower_bound(2, 81, 2, [0.25])


def test_color_class_cover():
    # C_5 and its bipartite double cover C_10: (g, t) -> 2g + t, edges (g, t) ~ (g + 1, t + 1)
    edges = [tuple(sorted((2 * g + t, 2 * ((g + 1) % 5) + (t + 1) % 2))) for g in range(5) for t in range(2)]
    cover = PartiteHypergraph(d=2, n=10, facets=edges, types=[v % 2 for v in range(10)], r=2)
    projection = [v // 2 for v in range(10)]
    colors = [0, 1, 0, 1, 2]
    report = color_class_cover_check(cover, projection, colors)
    assert report.passed, report.render()
    assert report.lines[-1].measured == Fraction(4, 25)


# --- geometry ----------------------------------------------------------------

def test_ball_sizes_and_tree():
    assert ball_sizes(cycle(6), 0, 3) == [1, 3, 5, 6]
    assert tree_ball_sizes(3, 2) == [1, 5, 17]
    assert tree_ball_sizes(3, 3)[-1] == 53


def test_injectivity_radius():
    path_sizes = [1, 3, 5, 7, 9]
    report = injectivity_radius(cycle(6), path_sizes)
    assert report.measured_radius == 2
    assert report.quotient_sizes == [1, 3, 5, 6, 6]
    assert report.displacement_from_radius == 5
    with pytest.raises(PreconditionError):
        injectivity_radius(cycle(6), [1, 3])
    with pytest.raises(DomainError):
        injectivity_radius(cycle(6), [1, 2])


def test_girth_lower_bounds():
    b = girth_lower_bounds(3, 2, 2, 720)
    assert b["displacement"] == 1.0
    assert b["radius"] == pytest.approx(math.log(720, 3) / 6 - 0.5)


def test_diameter_check():
    report = diameter_check(cycle(6), 2.0, 1.0, bipartite=True)
    assert report.passed
    assert report.lines[0].measured == 3
    assert report.lines[0].bound == 4
    assert "log_ratio_value" in report.notes
    trivial = diameter_check(cycle(6), 2.0, 0.0, bipartite=True)
    assert trivial.notes["diameter_bound"] == "not applicable"


def test_diameter_log_form():
    report = diameter_check(cycle(6), 2.0, 1.0, bipartite=True, log_form=True)
    names = [line.name for line in report.lines]
    assert names == ["diameter", "diameter-log-ratio"]
    assert report.lines[0].passed, "ceil bound holds on C_6"
    assert not report.lines[1].passed, "log 6 / log 2 = 2.58 < 3"
    assert report.lines[1].bound == pytest.approx(math.log(6) / math.log(2))
    assert [line.name for line in diameter_check(cycle(6), 2.0, 1.0, bipartite=True).lines] == ["diameter"]


def test_diameter_disconnected():
    two = sp.block_diag([cycle(3), cycle(3)]).tocsr()
    with pytest.raises(DomainError):
        graph_diameter(two)
    assert graph_diameter(cycle(7), vertex_transitive=False) == 3


def test_bipartiteness():
    even = bipartiteness_check(cycle(6))
    assert even.bipartite
    assert even.sides.tolist() == [0, 1, 0, 1, 0, 1]
    odd = bipartiteness_check(cycle(5))
    assert not odd.bipartite
    walk = odd.witness
    assert walk[0] == walk[-1]
    assert (len(walk) - 1) % 2 == 1, "Witness is an odd closed walk"
    dense = cycle(5).toarray()
    assert all(dense[a, b] for a, b in zip(walk, walk[1:]))


if __name__ == "__main__":
    test_discrepancy_c6_pair()
    test_bipartite_mixing_c6()
    test_sampled_bipartite_mixing_is_deterministic()
    test_hypergraph_mixing_complete_partite_has_zero_discrepancy()
    test_hypergraph_mixing_corpus_exhaustive()
    test_discrepancy_reduction_corpus()
    test_chromatic_matches_brute_force_on_corpus()
    test_chromatic_lower_bound()
    test_color_class_cover()
    test_ball_sizes_and_tree()
    test_injectivity_radius()
    test_diameter_check()
    test_diameter_log_form()
    test_bipartiteness()
    print("All analysis tests passed!")
