import math
from fractions import Fraction

import pytest
from rama.core.errors import ParameterError
from rama.core.laurent import RelPosition
from rama.spectral.bounds import (
    chromatic_bound_forms, colorful_mixing_bound, lambda_theoretical_bound, oh_bound, skeleton_ramanujan_bound,
    xi_pgl2,
)


def test_xi_pgl2_values():
    xi = xi_pgl2(1, 3)
    assert xi.factor == Fraction(3, 2)
    assert xi.value == pytest.approx(1.5 / math.sqrt(3))
    assert xi.value == pytest.approx(0.8660254037844386)
    assert xi_pgl2(0, 5).value == pytest.approx(1.0)


@pytest.mark.parametrize("q", [3, 5, 9, 27])
def test_xi_below_crude_bound(q):
    for n in range(10):
        xi = xi_pgl2(n, q)
        assert xi.value <= xi.crude + 1e-15


def test_xi_rejects():
    with pytest.raises(ParameterError):
        xi_pgl2(-1, 3)
    with pytest.raises(ParameterError):
        xi_pgl2(1, 1)


def test_oh_bound():
    assert oh_bound(RelPosition((0, 1, 2)), 3) == pytest.approx(1.0)
    assert oh_bound(RelPosition((0, 1, 2)), 9) == pytest.approx(3 / 9)
    assert oh_bound(RelPosition((0, 0, 0)), 9) == pytest.approx(1.0)


def test_lambda_bound():
    lam = lambda_theoretical_bound(9)
    assert lam.exact == pytest.approx(math.sqrt(0.4))
    assert lam.simplified == pytest.approx(2 / 3)
    assert not lam.vacuous
    assert lambda_theoretical_bound(3).vacuous, "2/sqrt(3) > 1"


def test_colorful_and_chromatic_bounds():
    assert colorful_mixing_bound(2, 81) == pytest.approx(4 / 9)
    half_root, proof_form = chromatic_bound_forms(81, 2)
    assert half_root == pytest.approx(1.5)
    assert proof_form == pytest.approx(1.5)
    half_root, proof_form = chromatic_bound_forms(3 ** 12, 3)
    assert proof_form > half_root


def test_skeleton_ramanujan_bound():
    assert skeleton_ramanujan_bound(2, 3) == pytest.approx(2 * math.sqrt(3))
    assert skeleton_ramanujan_bound(3, 3) == pytest.approx(2 * 3 * 3)
    with pytest.raises(ParameterError):
        skeleton_ramanujan_bound(1, 3)


if __name__ == "__main__":
    test_xi_pgl2_values()
    test_xi_rejects()
    test_oh_bound()
    test_lambda_bound()
    test_colorful_and_chromatic_bounds()
    test_skeleton_ramanujan_bound()
    print("All bounds tests passed!")
