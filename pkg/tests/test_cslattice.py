import pytest
from rama.building.cslattice import (
    build_cs_rep, build_sigma1, building_ball, cayley_degree, count_flags_brute, count_full_flags,
    enumerate_sigma, enumerate_subspaces, export_ball, gaussian_binomial, generator_set, verify_local_structure,
)
from rama.core.errors import BudgetExceededError, ParameterError, PreconditionError
from rama.core.laurent import RatFun, RelPosition, ValMatrix, classify_relation, relative_position
from rama.spectral.spectra import hecke_row_check


@pytest.mark.parametrize("d,i,q,expected", [
    (2, 1, 3, 4),
    (3, 1, 3, 13),
    (3, 2, 3, 13),
    (3, 1, 5, 31),
    (4, 2, 3, 130),
    (4, 0, 3, 1),
    (4, 5, 3, 0),
])
def test_gaussian_binomial(d, i, q, expected):
    assert gaussian_binomial(d, i, q) == expected


def test_subspace_and_flag_oracles():
    assert len(enumerate_subspaces(3, 1, 3)) == 13
    assert len(enumerate_subspaces(3, 2, 3)) == 13
    assert count_full_flags(3, 3) == 52, "13 lines times 4 planes through each"
    assert count_flags_brute(3, 3) == 52
    assert count_flags_brute(2, 5) == count_full_flags(2, 5) == 6
    assert cayley_degree(3, 3) == 26


@pytest.mark.parametrize("d,q", [(2, 3), (3, 3), (2, 5)])
def test_algebra_relations(d, q):
    rep = build_cs_rep(d, q)
    L = rep.field
    ident = ValMatrix.identity(L, d)
    assert rep.z_matrix.power(d) == ident.scale(RatFun.constant(L, 1) + RatFun.y(L))
    for i in range(d):
        assert rep.z_matrix @ rep.xi_matrices[i] == rep.xi_matrices[(i + 1) % d] @ rep.z_matrix
    assert rep.b_matrix.det().valuation() == 1


def test_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        build_cs_rep(1, 3)
    with pytest.raises(ParameterError):
        build_cs_rep(3, 4)


@pytest.mark.parametrize("d,q,sizes", [
    (2, 3, [4]),
    (2, 5, [6]),
    (3, 3, [13, 13]),
    (3, 5, [31, 31]),
])
def test_sigma_sizes(d, q, sizes):
    gens = generator_set(d, q)
    assert gens.sizes == sizes, f"Sigma sizes for d={d} q={q}"
    identity = ValMatrix.identity(gens.rep.field, d)
    for i, level in enumerate(gens.sigma, start=1):
        assert len({s.key for s in level}) == len(level), "Generators are distinct"
        for s in level:
            rel = classify_relation(relative_position(identity, s), d)
            assert rel.neighbor and rel.type_offset == i, "Sigma_i steps to a type-i neighbour"


@pytest.mark.slow
def test_sigma_sizes_d4():
    assert generator_set(4, 3).sizes == [40, 130, 40]


def test_sigma1_positions():
    rep = build_cs_rep(3, 3)
    sigma1 = build_sigma1(rep)
    assert len(sigma1) == 13
    gens = enumerate_sigma(rep, sigma1)
    assert all(len(w) == 2 for w in gens.word_expansions[1]), "Sigma_2 comes from products of two steps"


def test_ball_sizes():
    ball = building_ball(generator_set(3, 3), 1)
    assert ball.ball_sizes() == [1, 27]
    assert len(ball.vertices) == 27

    tree = building_ball(generator_set(2, 3), 2)
    assert tree.ball_sizes() == [1, 5, 17], "The (q+1)-regular tree"
    assert all(len(f) == 2 for f in tree.facets)
    assert len(tree.facets) == 16, "A tree ball has one edge fewer than vertices"


def test_ball_budget():
    with pytest.raises(BudgetExceededError) as exc:
        building_ball(generator_set(2, 3), 3, max_vertices=10)
    assert exc.value.count > 10


def test_local_structure_tree():
    ball = building_ball(generator_set(2, 3), 2)
    report = verify_local_structure(ball, 3, 2)
    assert report.passed, report.render()
    hecke = hecke_row_check(ball, 3, 2)
    assert hecke.passed, hecke.render()
    assert hecke.notes["hecke_degree"] == "12"


def test_local_structure_needs_radius_two():
    ball = building_ball(generator_set(2, 3), 1)
    with pytest.raises(PreconditionError):
        verify_local_structure(ball, 3, 2)
    with pytest.raises(ParameterError):
        verify_local_structure(ball, 5, 2)


@pytest.mark.slow
def test_local_structure_d3():
    ball = building_ball(generator_set(3, 3), 2)
    report = verify_local_structure(ball, 3, 3)
    assert report.passed, report.render()
    assert sum(1 for f in ball.facets if 0 in f) == 52
    hecke = hecke_row_check(ball, 3, 3)
    assert hecke.passed, hecke.render()
    assert hecke.notes["hecke_degree"] == "156"
    assert hecke.notes["facets_at_center"] == "52"


def test_ball_types_and_positions():
    ball = building_ball(generator_set(3, 3), 1)
    for v in ball.vertices[1:]:
        assert v.depth == 1
        assert v.type == sum(v.relpos.a) % 3
    assert ball.vertices[0].relpos == RelPosition((0, 0, 0))


def test_export_ball(tmp_path):
    ball = building_ball(generator_set(2, 3), 2)
    path = tmp_path / "ball.txt"
    export_ball(ball, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "BALL d=2 q=3 radius=2 vertices=17 facets=16"
    assert lines[1].startswith("0 0 0,0 ")
    assert sum(1 for line in lines if line.startswith("F ")) == 16


if __name__ == "__main__":
    test_subspace_and_flag_oracles()
    test_rejects_bad_parameters()
    test_sigma1_positions()
    test_ball_sizes()
    test_ball_budget()
    test_local_structure_tree()
    test_local_structure_needs_radius_two()
    test_ball_types_and_positions()
    print("All CS lattice tests passed!")
