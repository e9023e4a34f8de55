import itertools

import numpy as np
import pytest
from rama.core.errors import DomainError, ParameterError
from rama.core.gf import (
    FieldElement, Poly, build_field, divisors, element_order, embedding, factorize, field_rank,
    find_normal_element, frobenius, is_irreducible, is_prime, minimal_polynomial, poly_gcd, prime_power,
)


def _has_root_or_factor(f: Poly) -> bool:
    """Exhaustive factor scan over monic polynomials of degree <= deg/2."""
    F = f.field
    for deg in range(1, f.degree // 2 + 1):
        for lower in itertools.product(range(F.order), repeat=deg):
            g = Poly(F, list(lower) + [1])
            if (f % g).is_zero():
                return True
    return False


def test_integer_helpers():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert factorize(720) == {2: 4, 3: 2, 5: 1}
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert prime_power(81) == (3, 4)
    with pytest.raises(ParameterError):
        prime_power(12)
    with pytest.raises(ParameterError):
        prime_power(1)


def test_prime_field_tables():
    F = build_field(7)
    assert F.order == 7 and F.modulus == (0, 1)
    for a in range(7):
        for b in range(7):
            assert F.add(a, b) == (a + b) % 7
            assert F.mul(a, b) == (a * b) % 7
    for a in range(1, 7):
        assert F.mul(a, F.inv(a)) == 1
    with pytest.raises(DomainError):
        F.inv(0)


def test_f9_smallest_modulus():
    F = build_field(3, 2)
    assert F.modulus == (1, 0, 1), "y^2 + 1 is the smallest irreducible quadratic over F_3"
    assert F.order == 9
    assert element_order(FieldElement(F, F.generator)) == 8


@pytest.mark.parametrize("p,k", [(3, 2), (3, 3), (5, 2), (3, 4)])
def test_field_axioms(p, k):
    F = build_field(p, k)
    codes = range(F.order)
    # distributivity and inverses on a sample
    sample = list(codes)[:: max(1, F.order // 9)]
    for a, b, c in itertools.product(sample, repeat=3):
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    for a in range(1, F.order):
        assert F.mul(a, F.inv(a)) == 1
        assert F.add(a, F.neg(a)) == 0
    assert F.pow(F.generator, F.n1) == 1


def test_vectorized_matches_scalar():
    F = build_field(3, 3)
    a = np.arange(F.order)
    b = (a * 7 + 3) % F.order
    assert F.vmul(a, b).tolist() == [F.mul(int(x), int(y)) for x, y in zip(a, b)]
    assert F.vadd(a, b).tolist() == [F.add(int(x), int(y)) for x, y in zip(a, b)]
    assert F.vinv(a[1:]).tolist() == [F.inv(int(x)) for x in a[1:]]
    with pytest.raises(DomainError):
        F.vinv(a)


def test_irreducibility_matches_factor_scan():
    F = build_field(3)
    for deg in (2, 3, 4):
        for lower in itertools.product(range(3), repeat=deg):
            f = Poly(F, list(lower) + [1])
            assert is_irreducible(f) == (not _has_root_or_factor(f)), f"mismatch for {f.serialize()}"


def test_poly_gcd_and_division():
    F = build_field(5)
    a = Poly(F, (1, 1)) * Poly(F, (2, 0, 1))
    b = Poly(F, (1, 1)) * Poly(F, (3, 1))
    assert poly_gcd(a, b) == Poly(F, (1, 1))
    q, r = a.divmod(Poly(F, (2, 0, 1)))
    assert r.is_zero() and q == Poly(F, (1, 1))
    assert Poly.parse(F, a.serialize()) == a


def test_embedding_is_a_homomorphism():
    K = build_field(3, 2)
    L = build_field(3, 4)
    table = embedding(K, L)
    assert len(set(table)) == K.order, "Embedding must be injective"
    for a in range(K.order):
        for b in range(K.order):
            assert table[K.mul(a, b)] == L.mul(table[a], table[b])
            assert table[K.add(a, b)] == L.add(table[a], table[b])
    with pytest.raises(ParameterError):
        embedding(build_field(3, 3), L)


def test_frobenius_and_minimal_polynomial():
    L = build_field(3, 3)
    x = FieldElement(L, L.generator)
    y = x
    for _ in range(3):
        y = frobenius(y)
    assert y == x, "phi^3 is the identity on F_27"
    f = minimal_polynomial(x)
    assert f.degree == 3 and is_irreducible(f)
    assert f.evaluate_in(L, x.code, embedding(f.field, L)) == 0


def test_field_rank():
    F = build_field(3)
    assert field_rank(F, [[1, 2], [2, 1]]) == 1
    assert field_rank(F, [[1, 0], [0, 1]]) == 2
    assert field_rank(F, []) == 0


@pytest.mark.parametrize("p,k", [(3, 2), (3, 3), (5, 3)])
def test_normal_element(p, k):
    L = build_field(p, k)
    xi = find_normal_element(L)
    conj = [xi.code]
    for _ in range(k - 1):
        conj.append(L.pow(conj[-1], p))
    # coefficient vectors of the conjugates span F_p^k
    assert field_rank(build_field(p), [L.coeffs(c) for c in conj]) == k


def test_characteristic_two_rejected():
    with pytest.raises(ParameterError):
        build_field(2, 3)
    with pytest.raises(ParameterError):
        build_field(9)


if __name__ == "__main__":
    test_integer_helpers()
    test_prime_field_tables()
    test_f9_smallest_modulus()
    test_vectorized_matches_scalar()
    test_irreducibility_matches_factor_scan()
    test_poly_gcd_and_division()
    test_embedding_is_a_homomorphism()
    test_frobenius_and_minimal_polynomial()
    test_field_rank()
    test_characteristic_two_rejected()
    print("All GF tests passed!")
