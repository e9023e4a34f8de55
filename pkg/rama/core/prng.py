import numpy as np
from typing import List, Sequence, TypeVar

T = TypeVar("T")

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """
    Deterministic 64-bit generator defined by its recurrence, so sampled
    subsets and solver start vectors are reproducible from the seed alone.
    Every report records the seed it was produced with.
    """
    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("Seed must be non-negative")
        self.seed = seed & _MASK
        self.state = self.seed

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return _mix(self.state)

    def next_seed(self) -> int:
        """
        Returns a fresh child seed. Independent sample streams are created
        as SplitMix64(parent.next_seed()).
        """
        return self.next_u64()

    def random(self) -> float:
        # 53 high bits -> [0, 1)
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow needs n > 0")
        # Rejection sampling keeps the result unbiased.
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def choice(self, items: Sequence[T]) -> T:
        if not items:
            raise ValueError("Cannot choose from an empty sequence")
        return items[self.randbelow(len(items))]

    def shuffle(self, items: List[T]) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def random_subset(self, items: Sequence[T], p: float = 0.5) -> List[T]:
        """Keeps each item independently with probability p, in input order."""
        return [x for x in items if self.random() < p]

    def noise_vector(self, size: int) -> np.ndarray:
        """
        Returns `size` floats in [-1, 1), equal to the next `size` outputs of
        the stream. Used as the deterministic start vector of eigensolvers.
        """
        if size == 0:
            return np.zeros(0)
        # Output i only depends on state + (i+1)*gamma, so the stream vectorizes.
        steps = np.arange(1, size + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + size * _GAMMA) & _MASK
        unit = (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
        return 2.0 * unit - 1.0
