import numpy as np
import pytest
from rama.core.prng import SplitMix64


def test_prng_reference_value():
    # First SplitMix64 output for seed 0
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF, "Recurrence must match SplitMix64"


def test_prng_reproducibility():
    a = SplitMix64(42)
    b = SplitMix64(42)
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)], \
        "Streams with same seed must be identical"

    c = SplitMix64(123)
    assert SplitMix64(42).next_u64() != c.next_u64(), "Different seeds should give different streams"


def test_prng_noise_vector_matches_stream():
    rng = SplitMix64(7)
    v = rng.noise_vector(16)
    scalar = SplitMix64(7)
    expected = [2.0 * ((scalar.next_u64() >> 11) * (1.0 / (1 << 53))) - 1.0 for _ in range(16)]
    assert np.allclose(v, expected, atol=0, rtol=0), "Vectorized noise must equal the scalar stream"
    assert rng.state == scalar.state, "State must advance by the vector length"


def test_prng_noise_shape_and_range():
    v = SplitMix64(1).noise_vector(20)
    assert v.ndim == 1, "Output should be flat"
    assert v.shape[0] == 20, "Output should have size elements"
    assert np.all(v >= -1.0) and np.all(v < 1.0), "Values must lie in [-1, 1)"
    assert SplitMix64(1).noise_vector(0).shape == (0,)


def test_prng_distribution():
    v = SplitMix64(1).noise_vector(1_000_000)
    mean = float(v.mean())
    assert abs(mean) < 0.01, f"Mean {mean} should be close to 0"
    assert abs(float(v.var()) - 1 / 3) < 0.01, "Uniform on [-1, 1) has variance 1/3"


def test_prng_randbelow_and_subsets():
    rng = SplitMix64(5)
    draws = [rng.randbelow(6) for _ in range(600)]
    assert set(draws) == set(range(6)), "All residues should appear"
    with pytest.raises(ValueError):
        rng.randbelow(0)

    items = list(range(100))
    subset = SplitMix64(9).random_subset(items)
    assert subset == sorted(subset), "Subsets keep input order"
    assert subset == SplitMix64(9).random_subset(items), "Subsets are reproducible"
    assert 20 < len(subset) < 80


def test_prng_child_seeds_are_independent_streams():
    parent = SplitMix64(7)
    seeds = [parent.next_seed() for _ in range(3)]
    assert len(set(seeds)) == 3
    again = SplitMix64(7)
    assert seeds == [again.next_seed() for _ in range(3)], "Child seeds are deterministic"


def test_prng_shuffle_is_permutation():
    items = list(range(10))
    SplitMix64(3).shuffle(items)
    assert sorted(items) == list(range(10))


def test_prng_rejects_negative_seed():
    with pytest.raises(ValueError):
        SplitMix64(-1)


if __name__ == "__main__":
    test_prng_reference_value()
    test_prng_reproducibility()
    test_prng_noise_vector_matches_stream()
    test_prng_noise_shape_and_range()
    test_prng_distribution()
    test_prng_randbelow_and_subsets()
    test_prng_child_seeds_are_independent_streams()
    test_prng_shuffle_is_permutation()
    test_prng_rejects_negative_seed()
    print("All PRNG tests passed!")
