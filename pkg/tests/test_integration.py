import math

import numpy as np
import pytest
from rama.analysis.coloring import chromatic_lower_bound, chromatic_number, color_class_cover_check, is_valid_coloring
from rama.analysis.discrepancy import hypergraph_mixing_check, sampled_bipartite_mixing
from rama.analysis.geometry import bipartiteness_check, diameter_check, injectivity_radius, tree_ball_sizes
from rama.building.cslattice import generator_set
from rama.complex.hypergraph import walls_and_incidence
from rama.quotient.congruence import cover_complex, cover_group, generate_group, group_complex, search_polynomial
from rama.spectral.bounds import lambda_theoretical_bound, skeleton_ramanujan_bound
from rama.spectral.spectra import OperatorHandle, incidence_lambda, second_eigenvalue, trivial_vectors


def quotient(q, d, e, r):
    return generate_group(generator_set(d, q), search_polynomial(q, d, e, r))


@pytest.fixture(scope="module")
def pgl():
    table = quotient(3, 2, 2, 2)
    return table, group_complex(table)


@pytest.fixture(scope="module")
def psl():
    table = quotient(3, 2, 2, 1)
    cover = cover_group(table)
    return table, group_complex(table), cover, cover_complex(cover)


def nontrivial_lambda(h, sides=None, method="dense"):
    exclude = trivial_vectors(sides.tolist(), 2, h.n) if sides is not None else trivial_vectors(h.types, h.r, h.n)
    return second_eigenvalue(OperatorHandle.from_matrix(h.adjacency_matrix()), exclude, method=method)


def oracle_sizes(q, order):
    radius = 0
    while tree_ball_sizes(q, radius)[-1] <= order:
        radius += 1
    return tree_ball_sizes(q, radius)


def test_pgl_2_9_is_ramanujan(pgl):
    _, h = pgl
    bip = bipartiteness_check(h.adjacency_matrix())
    assert bip.bipartite
    lam = nontrivial_lambda(h, bip.sides)
    assert lam <= 2 * math.sqrt(3) + 1e-9, f"lambda_2 = {lam}"
    assert lam <= skeleton_ramanujan_bound(2, 3) + 1e-9


def test_pgl_2_9_mixing(pgl):
    _, h = pgl
    _, b = walls_and_incidence(h, 0)
    _, lt = incidence_lambda(b, method="dense")
    assert lt <= lambda_theoretical_bound(3).exact + 1e-9
    report = sampled_bipartite_mixing(h, lt, 1000, 7)
    assert report.passed, report.render()
    disc = hypergraph_mixing_check(h, [lt], samples=500, seed=7)
    assert disc.passed


@pytest.mark.slow
def test_pgl_2_9_mixing_full_sample(pgl):
    _, h = pgl
    _, lt = incidence_lambda(walls_and_incidence(h, 0)[1], method="dense")
    assert sampled_bipartite_mixing(h, lt, 10_000, 7).passed


def test_psl_2_9_cover_coloring(psl):
    _, h, cover, ch = psl
    assert not h.has_full_types
    result = chromatic_number(h, mode="greedy")
    assert is_valid_coloring(h, result.colors)
    assert result.count >= 3, "an odd cycle needs three colors"
    _, lt = incidence_lambda(walls_and_incidence(ch, 0)[1], method="dense")
    bound = chromatic_lower_bound(1, 3, 2, [lt])
    assert result.count >= bound.best
    report = color_class_cover_check(ch, cover.projection().tolist(), result.colors)
    assert report.passed, report.render()


def test_diameter_and_radius(pgl):
    _, h = pgl
    graph = h.adjacency_matrix()
    lam = nontrivial_lambda(h, bipartiteness_check(graph).sides)
    report = diameter_check(graph, 4.0, lam, bipartite=True, log_form=True)
    assert report.passed, report.render()
    assert [line.name for line in report.lines] == ["diameter", "diameter-log-ratio"]
    log_line = report.lines[1]
    assert log_line.measured <= log_line.bound
    assert log_line.bound == pytest.approx(math.log(720) / math.log(4.0 / lam))
    rad = injectivity_radius(graph, oracle_sizes(3, h.n), q=3, d=2, e=2)
    assert rad.measured_radius >= rad.radius_lower_bound
    assert rad.quotient_sizes[1] == 5, "four distinct neighbours"


def test_psl_diameter_not_bipartite(psl):
    _, h, _, _ = psl
    graph = h.adjacency_matrix()
    bip = bipartiteness_check(graph)
    assert not bip.bipartite
    lam = nontrivial_lambda(h)
    assert lam <= 2 * math.sqrt(3) + 1e-9
    assert diameter_check(graph, 4.0, lam, bipartite=False, log_form=True).passed


@pytest.mark.slow
def test_psl_2_81_diameter():
    table = quotient(3, 2, 4, 1)
    graph = table.graph()
    degrees = np.asarray(graph.sum(axis=1)).ravel()
    assert np.all(degrees == 4)
    exclude = trivial_vectors(None, 1, table.order)
    lam = second_eigenvalue(OperatorHandle.from_matrix(graph), exclude, method="iterative", seed=7)
    assert lam <= 2 * math.sqrt(3) + 1e-6
    report = diameter_check(graph, 4.0, lam, bipartite=False, log_form=True)
    assert report.passed, report.render()


@pytest.mark.slow
def test_psl_2_81_injectivity_radius():
    table = quotient(3, 2, 4, 1)
    graph = table.graph()
    rad = injectivity_radius(graph, oracle_sizes(3, table.order), q=3, d=2, e=4)
    assert rad.order == 265_680
    assert rad.measured_radius >= 2, rad.quotient_sizes
    assert rad.measured_radius >= rad.radius_lower_bound
    assert rad.displacement_lower_bound >= 4 / 2
    assert rad.displacement_from_radius >= rad.displacement_lower_bound


if __name__ == "__main__":
    table = quotient(3, 2, 2, 2)
    h = group_complex(table)
    test_pgl_2_9_is_ramanujan((table, h))
    test_pgl_2_9_mixing((table, h))
    test_diameter_and_radius((table, h))
    print("All integration tests passed!")
