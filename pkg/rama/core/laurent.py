"""
Exact arithmetic in F((y)) through rational functions in y, and d x d
matrices over it standing for elements of PGL_d(F((y))).

All valuations are y-adic. Nothing is ever truncated to a power series.
"""
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from rama.core.errors import DomainError, ParameterError
from rama.core.gf import FieldSpec, Poly, poly_gcd


class RatFun:
    """num/den in lowest terms with a monic denominator; zero is 0/1."""
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = None):
        field = num.field
        if den is None:
            den = Poly.one(field)
        if den.is_zero():
            raise DomainError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = num, Poly.one(field)
            return
        g = poly_gcd(num, den)
        if not g.is_one():
            num, den = num.exact_div(g), den.exact_div(g)
        lead = den.lead
        if lead != 1:
            inv = field.inv(lead)
            num, den = num.scale(inv), den.scale(inv)
        self.num, self.den = num, den

    @classmethod
    def constant(cls, field: FieldSpec, c: int) -> "RatFun":
        return cls(Poly.constant(field, c))

    @classmethod
    def y(cls, field: FieldSpec) -> "RatFun":
        return cls(Poly.variable(field))

    @property
    def field(self) -> FieldSpec:
        return self.num.field

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatFun):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num.coeffs, self.den.coeffs))

    def __repr__(self) -> str:
        if self.den.is_one():
            return f"RatFun({self.num!r})"
        return f"RatFun(({self.num!r})/({self.den!r}))"

    def __add__(self, other: "RatFun") -> "RatFun":
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den)

    def __sub__(self, other: "RatFun") -> "RatFun":
        return self + (-other)

    def __mul__(self, other: "RatFun") -> "RatFun":
        return RatFun(self.num * other.num, self.den * other.den)

    def inverse(self) -> "RatFun":
        if self.is_zero():
            raise DomainError("inverse of zero")
        return RatFun(self.den, self.num)

    def __truediv__(self, other: "RatFun") -> "RatFun":
        return self * other.inverse()

    def valuation(self) -> float:
        return valuation(self)

    def serialize(self) -> str:
        return f"{self.num.serialize()}/{self.den.serialize()}"


def valuation(x: RatFun) -> float:
    """y-adic valuation: root multiplicity at 0 of num minus that of den; +inf for 0."""
    if x.is_zero():
        return math.inf
    return x.num.low_degree() - x.den.low_degree()


def parse_ratfun(field: FieldSpec, text: str) -> RatFun:
    num, sep, den = text.strip().partition("/")
    if not sep:
        return RatFun(Poly.parse(field, num))
    return RatFun(Poly.parse(field, num), Poly.parse(field, den))


def _content(polys: Iterable[Poly], start: Poly) -> Poly:
    g = start
    for p in polys:
        if g.is_one():
            break
        if not p.is_zero():
            g = poly_gcd(g, p)
    return g


def poly_det(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a square polynomial matrix by fraction-free (Bareiss) elimination."""
    n = len(rows)
    if n == 0:
        raise ParameterError("empty matrix")
    field = rows[0][0].field
    m = [list(r) for r in rows]
    sign = 1
    prev = Poly.one(field)
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not m[i][k].is_zero()), None)
            if swap is None:
                return Poly.zero(field)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]).exact_div(prev)
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def poly_adjugate(rows: Sequence[Sequence[Poly]]) -> List[List[Poly]]:
    n = len(rows)
    field = rows[0][0].field
    if n == 1:
        return [[Poly.one(field)]]
    adj = [[Poly.zero(field)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[rows[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = poly_det(minor)
            # adj[j][i] is the (i, j) cofactor
            adj[j][i] = -cof if (i + j) % 2 else cof
    return adj


def poly_matmul(a: Sequence[Sequence[Poly]], b: Sequence[Sequence[Poly]]) -> List[List[Poly]]:
    n, inner, m = len(a), len(b), len(b[0])
    field = a[0][0].field
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = Poly.zero(field)
            for k in range(inner):
                x, y = a[i][k], b[k][j]
                if not x.is_zero() and not y.is_zero():
                    acc = acc + x * y
            row.append(acc)
        out.append(row)
    return out


class ValMatrix:
    """
    A d x d matrix over F(y), stored as a polynomial numerator matrix over a
    single monic common denominator with gcd(content, den) = 1. This form is
    unique, so two ValMatrix values are equal iff their `key`s are equal.
    """
    __slots__ = ("field", "d", "num", "den", "_key")

    def __init__(self, field: FieldSpec, num: Sequence[Sequence[Poly]], den: Poly = None):
        d = len(num)
        if d == 0 or any(len(r) != d for r in num):
            raise ParameterError("ValMatrix needs a square, nonempty numerator")
        if den is None:
            den = Poly.one(field)
        if den.is_zero():
            raise DomainError("zero common denominator")
        rows = [list(r) for r in num]
        if not den.is_one() or den.lead != 1:
            g = _content((p for r in rows for p in r), den)
            if not g.is_one():
                rows = [[p.exact_div(g) for p in r] for r in rows]
                den = den.exact_div(g)
            if den.lead != 1:
                inv = field.inv(den.lead)
                rows = [[p.scale(inv) for p in r] for r in rows]
                den = den.scale(inv)
        self.field = field
        self.d = d
        self.num = tuple(tuple(r) for r in rows)
        self.den = den
        self._key = None

    @classmethod
    def from_entries(cls, field: FieldSpec, entries: Sequence[Sequence[RatFun]]) -> "ValMatrix":
        den = Poly.one(field)
        for row in entries:
            for x in row:
                if not x.den.is_one():
                    den = den * x.den.exact_div(poly_gcd(den, x.den))
        num = [[x.num * den.exact_div(x.den) for x in row] for row in entries]
        return cls(field, num, den)

    @classmethod
    def identity(cls, field: FieldSpec, d: int) -> "ValMatrix":
        one, zero = Poly.one(field), Poly.zero(field)
        return cls(field, [[one if i == j else zero for j in range(d)] for i in range(d)])

    @classmethod
    def diagonal(cls, field: FieldSpec, diag: Sequence[RatFun]) -> "ValMatrix":
        zero = RatFun(Poly.zero(field))
        n = len(diag)
        return cls.from_entries(field, [[diag[i] if i == j else zero for j in range(n)] for i in range(n)])

    @property
    def key(self) -> Tuple:
        if self._key is None:
            self._key = (tuple(p.coeffs for r in self.num for p in r), self.den.coeffs)
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValMatrix):
            return NotImplemented
        return self.d == other.d and self.field == other.field and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"ValMatrix(d={self.d}, {self.serialize()})"

    def entry(self, i: int, j: int) -> RatFun:
        return RatFun(self.num[i][j], self.den)

    def entries(self) -> List[List[RatFun]]:
        return [[self.entry(i, j) for j in range(self.d)] for i in range(self.d)]

    def __matmul__(self, other: "ValMatrix") -> "ValMatrix":
        return ValMatrix(self.field, poly_matmul(self.num, other.num), self.den * other.den)

    def scale(self, s: RatFun) -> "ValMatrix":
        return ValMatrix(self.field, [[p * s.num for p in r] for r in self.num], self.den * s.den)

    def __add__(self, other: "ValMatrix") -> "ValMatrix":
        num = [[a * other.den + b * self.den for a, b in zip(ra, rb)] for ra, rb in zip(self.num, other.num)]
        return ValMatrix(self.field, num, self.den * other.den)

    def __neg__(self) -> "ValMatrix":
        return ValMatrix(self.field, [[-p for p in r] for r in self.num], self.den)

    def __sub__(self, other: "ValMatrix") -> "ValMatrix":
        return self + (-other)

    def det(self) -> RatFun:
        den = Poly.one(self.field)
        for _ in range(self.d):
            den = den * self.den
        return RatFun(poly_det(self.num), den)

    def is_invertible(self) -> bool:
        return not poly_det(self.num).is_zero()

    def inverse(self) -> "ValMatrix":
        delta = poly_det(self.num)
        if delta.is_zero():
            raise DomainError("singular matrix has no inverse")
        adj = poly_adjugate(self.num)
        return ValMatrix(self.field, [[p * self.den for p in r] for r in adj], delta)

    def power(self, n: int) -> "ValMatrix":
        if n < 0:
            return self.inverse().power(-n)
        result = ValMatrix.identity(self.field, self.d)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def min_valuation(self) -> float:
        return min(p.low_degree() for r in self.num for p in r) - self.den.low_degree()

    def primitive_numerator(self) -> List[List[Poly]]:
        """Numerator divided by the gcd of its entries: a projectively equal polynomial matrix."""
        g = _content((p for r in self.num for p in r), Poly.zero(self.field))
        if g.is_zero():
            raise DomainError("zero matrix")
        if g.is_one():
            return [list(r) for r in self.num]
        return [[p.exact_div(g) for p in r] for r in self.num]

    def mod_y(self) -> List[List[int]]:
        """Reduction at y = 0; entries must lie in the valuation ring."""
        c = self.den.coeffs[0] if self.den.coeffs else 0
        if c == 0:
            raise DomainError("matrix has entries outside the valuation ring")
        inv = self.field.inv(c)
        return [[self.field.mul(p.coeffs[0], inv) if p.coeffs else 0 for p in r] for r in self.num]

    def serialize(self) -> str:
        return ";".join(self.entry(i, j).serialize() for i in range(self.d) for j in range(self.d))


def parse_valmatrix(field: FieldSpec, text: str) -> ValMatrix:
    parts = text.strip().split(";")
    d = math.isqrt(len(parts))
    if d * d != len(parts) or d == 0:
        raise ParameterError(f"matrix text has {len(parts)} entries, not a square")
    entries = [parse_ratfun(field, t) for t in parts]
    return ValMatrix.from_entries(field, [entries[i * d:(i + 1) * d] for i in range(d)])


@dataclass(frozen=True)
class RelPosition:
    """Nondecreasing integer vector with a[0] == 0."""
    a: Tuple[int, ...]

    def __post_init__(self):
        if not self.a or self.a[0] != 0 or any(x > y for x, y in zip(self.a, self.a[1:])):
            raise ParameterError(f"not a normalized relative position: {self.a}")

    @property
    def d(self) -> int:
        return len(self.a)

    @classmethod
    def from_raw(cls, raw: Sequence[int]) -> "RelPosition":
        s = sorted(raw)
        return cls(tuple(x - s[0] for x in s))

    @classmethod
    def wall_class(cls, d: int) -> "RelPosition":
        """(0, 1, ..., 1, 2): same type, sharing a wall."""
        return cls((0,) + (1,) * (d - 2) + (2,))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.a)) + ")"


@dataclass(frozen=True)
class Relation:
    neighbor: bool
    same_type: bool
    shares_wall: bool
    distance: int
    type_offset: int


def _eliminate(rows: List[List[Poly]]) -> List[int]:
    """
    Valuation-pivot elimination over F[[y]]. With pivot y^v*u (u a unit) the
    update row_j <- u*row_j - (m_jl / y^v)*row_pivot stays polynomial and
    only multiplies rows by units, so the elementary divisors are preserved.
    """
    vals = []
    while rows:
        best = None
        for i, row in enumerate(rows):
            for j, p in enumerate(row):
                v = p.low_degree()
                if best is None or v < best[0]:
                    best = (v, i, j)
        v, pi, pj = best
        if v == math.inf:
            raise DomainError("singular matrix")
        unit = rows[pi][pj].shift_down(v)
        pivot_row = rows[pi]
        reduced = []
        for i, row in enumerate(rows):
            if i == pi:
                continue
            factor = row[pj].shift_down(v)
            reduced.append([
                unit * row[c] - factor * pivot_row[c]
                for c in range(len(row)) if c != pj
            ])
        rows = reduced
        vals.append(v)
    return sorted(vals)


def invariant_valuations(m: ValMatrix) -> Tuple[RelPosition, Tuple[int, ...]]:
    """
    Elementary-divisor valuations of m over the valuation ring, returned as
    (normalized relative position, raw nondecreasing vector).
    """
    shift = m.den.low_degree()
    raw = tuple(v - shift for v in _eliminate([list(r) for r in m.num]))
    return RelPosition.from_raw(raw), raw


def relative_position(g: ValMatrix, h: ValMatrix) -> RelPosition:
    """Cartan invariant of g^{-1}h, normalized; only the PGL classes of g and h matter."""
    if g.d != h.d:
        raise ParameterError("dimension mismatch")
    # adj(g) is a scalar multiple of g^{-1}
    prod = poly_matmul(poly_adjugate(g.num), h.num)
    return RelPosition.from_raw(_eliminate(prod))


def classify_relation(a: RelPosition, d: int) -> Relation:
    """
    Neighbour, type and wall predicates of a pair of building vertices at
    relative position a. type_offset is tau(h) - tau(g) for
    a = relative_position(g, h).
    """
    if a.d != d:
        raise ParameterError(f"relative position {a} has wrong dimension for d={d}")
    distance = a.a[-1] - a.a[0]
    offset = sum(a.a) % d
    coincide = distance == 0
    return Relation(
        neighbor=distance == 1,
        same_type=offset == 0,
        shares_wall=coincide or a == RelPosition.wall_class(d),
        distance=distance,
        type_offset=offset,
    )


def projective_canonical_form(m: ValMatrix, verify: bool = True) -> ValMatrix:
    """
    The scalar multiple of m whose first (row-major) entry of minimal
    valuation equals 1. PGL-equal matrices have identical canonical forms.
    With verify=False the invertibility check is skipped for inputs known to
    be products of invertible matrices.
    """
    if verify and not m.is_invertible():
        raise DomainError("singular matrix has no projective class")
    best = None
    for i, row in enumerate(m.num):
        for j, p in enumerate(row):
            v = p.low_degree()
            if best is None or v < best[0]:
                best = (v, i, j)
    v, pi, pj = best
    if v == math.inf:
        raise DomainError("zero matrix has no projective class")
    return ValMatrix(m.field, m.num, m.num[pi][pj])
