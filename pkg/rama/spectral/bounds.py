"""Closed-form spectral and chromatic bounds for buildings of type A."""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from rama.core.errors import ConsistencyError, ParameterError
from rama.core.laurent import RelPosition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class XiValue:
    """value = factor * q^{-n/2}; crude = (n+1) q^{-n/2} >= value."""
    n: int
    q: int
    factor: Fraction
    value: float
    crude: float


def xi_pgl2(n: int, q: int) -> XiValue:
    """Spherical function of PGL_2 at distance n: q^{-n/2} (n(q-1)+q+1)/(q+1)."""
    if n < 0:
        raise ParameterError("n must be >= 0")
    if q < 2:
        raise ParameterError("q must be >= 2")
    factor = Fraction(n * (q - 1) + q + 1, q + 1)
    scale = q ** (-n / 2)
    out = XiValue(n=n, q=q, factor=factor, value=float(factor) * scale, crude=(n + 1) * scale)
    if out.value > out.crude + 1e-15:
        raise ConsistencyError(f"xi({n}, {q}) = {out.value} exceeds (n+1) q^(-n/2) = {out.crude}")
    return out


def oh_bound(a: RelPosition, q: int) -> float:
    """(a_d - a_1 + 1) q^{-(a_d - a_1)/2}."""
    n = a.a[-1] - a.a[0]
    return (n + 1) * q ** (-n / 2)


@dataclass(frozen=True)
class LambdaBound:
    exact: float
    simplified: float

    @property
    def vacuous(self) -> bool:
        """Normalized eigenvalues never exceed 1, so a bound above 1 says nothing."""
        return self.simplified > 1


def lambda_theoretical_bound(q: int) -> LambdaBound:
    """
    Bound on the normalized second eigenvalue of every B_i:
    sqrt(1/(q+1) + q/(q+1) * 3/q) and its simplification 2/sqrt(q).
    """
    if q < 2:
        raise ParameterError("q must be >= 2")
    wall = oh_bound(RelPosition((0, 1, 2)), q)
    exact = math.sqrt(1 / (q + 1) + q / (q + 1) * wall)
    simplified = 2 / math.sqrt(q)
    if exact > simplified + 1e-12:
        raise ConsistencyError(f"exact bound {exact} exceeds simplified bound {simplified}")
    out = LambdaBound(exact=exact, simplified=simplified)
    if out.vacuous:
        logger.warning("lambda bound 2/sqrt(%d) = %.4f is vacuous", q, simplified)
    return out


def colorful_mixing_bound(d: int, q: int) -> float:
    """Discrepancy bound 2d/sqrt(q) for non-partite quotients."""
    return 2 * d / math.sqrt(q)


def chromatic_bound_forms(q: int, d: int) -> Tuple[float, float]:
    """(1/2 q^{1/2d}, (2d)^{-1/d} q^{1/2d}); the second is the sharper one."""
    root = q ** (1 / (2 * d))
    return 0.5 * root, (2 * d) ** (-1 / d) * root


def skeleton_ramanujan_bound(d: int, q: int) -> float:
    """
    Nontrivial eigenvalue bound for the 1-skeleton of a Ramanujan quotient:
    the sum over i of binom(d, i) q^{i(d-i)/2}, which is 2 sqrt(q) for d = 2.
    """
    if d < 2:
        raise ParameterError("d must be >= 2")
    return float(sum(math.comb(d, i) * q ** (i * (d - i) / 2) for i in range(1, d)))
