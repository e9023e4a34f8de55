"""
Exact arithmetic in the finite fields F_p and F_{p^k}, p an odd prime.

Elements are integer codes: the base-p digits of a code are its coefficient
vector in the power basis of the field modulus (low degree first), so codes
0..p-1 form the prime field. Extensions of extensions are never built as
towers; F_{q^e} with q = p^m is the flat field F_{p^{me}} and subfields are
reached through `embedding`.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from rama.core.errors import ConsistencyError, DomainError, ParameterError

logger = logging.getLogger(__name__)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def factorize(n: int) -> Dict[int, int]:
    """Trial-division factorization {prime: exponent}."""
    factors: Dict[int, int] = {}
    m = n
    p = 2
    while p * p <= m:
        while m % p == 0:
            factors[p] = factors.get(p, 0) + 1
            m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        factors[m] = factors.get(m, 0) + 1
    return factors


def divisors(n: int) -> List[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def prime_power(q: int) -> Tuple[int, int]:
    """Splits q = p^m. Raises ParameterError unless q is a prime power."""
    if q < 2:
        raise ParameterError(f"{q} is not a prime power")
    factors = factorize(q)
    if len(factors) != 1:
        raise ParameterError(f"{q} is not a prime power")
    (p, m), = factors.items()
    return p, m


def _digits(code: int, p: int, k: int) -> List[int]:
    out = []
    for _ in range(k):
        code, r = divmod(code, p)
        out.append(r)
    return out


def _undigits(digits: Sequence[int], p: int) -> int:
    code = 0
    for c in reversed(digits):
        code = code * p + c
    return code


def _mulmod_digits(a: Sequence[int], b: Sequence[int], modulus: Sequence[int], p: int) -> List[int]:
    k = len(modulus) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    prod[i + j] = (prod[i + j] + ai * bj) % p
    # modulus is monic
    for deg in range(len(prod) - 1, k - 1, -1):
        c = prod[deg]
        if c:
            for j in range(k + 1):
                prod[deg - k + j] = (prod[deg - k + j] - c * modulus[j]) % p
    out = prod[:k]
    return out + [0] * (k - len(out))


def _powmod_digits(a: Sequence[int], e: int, modulus: Sequence[int], p: int) -> List[int]:
    k = len(modulus) - 1
    result = [1] + [0] * (k - 1)
    base = list(a)
    while e:
        if e & 1:
            result = _mulmod_digits(result, base, modulus, p)
        base = _mulmod_digits(base, base, modulus, p)
        e >>= 1
    return result


class FieldSpec:
    """
    The field F_{p^k} = F_p[y]/(modulus).

    Multiplication goes through exp/log tables of a primitive element (the
    smallest code of order p^k - 1) and addition through a Zech logarithm
    table, so the `v*` methods can apply field arithmetic to whole numpy
    arrays of codes.
    """
    def __init__(self, p: int, k: int, modulus: Sequence[int]):
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise ParameterError(f"modulus must be monic of degree {k}")
        self.p = p
        self.k = k
        self.modulus = modulus
        self.order = p ** k
        self.n1 = self.order - 1
        self._hash = hash((p, k, modulus))
        self._build_tables()

    def _find_primitive(self) -> int:
        one = [1] + [0] * (self.k - 1)
        primes = list(factorize(self.n1))
        for code in range(1, self.order):
            g = _digits(code, self.p, self.k)
            if all(_powmod_digits(g, self.n1 // l, self.modulus, self.p) != one for l in primes):
                return code
        raise ConsistencyError(f"no primitive element found; modulus {self.modulus} is reducible")

    def _build_tables(self) -> None:
        p, k, n1 = self.p, self.k, self.n1
        g = _digits(self._find_primitive(), p, k)

        exp = [0] * n1
        log = [0] * self.order
        cur = [1] + [0] * (k - 1)
        for i in range(n1):
            c = _undigits(cur, p)
            if i > 0 and c == 1:
                raise ConsistencyError("element is not primitive")
            exp[i] = c
            log[c] = i
            cur = _mulmod_digits(cur, g, self.modulus, p)

        # zech[i] = log(1 + g^i), -1 when 1 + g^i = 0
        zech = [-1] * n1
        for i in range(n1):
            c = exp[i]
            d0 = c % p
            s = c - d0 + (d0 + 1) % p
            zech[i] = log[s] if s else -1

        # Doubled so that sums of two logs index without reduction.
        self._exp = exp + exp
        self._log = log
        self._zech = zech
        self._half = n1 // 2
        self._exp_np = np.array(self._exp, dtype=np.int64)
        self._log_np = np.array(log, dtype=np.int64)
        self._zech_np = np.array(zech, dtype=np.int64)

    def __repr__(self) -> str:
        return f"FieldSpec(p={self.p}, k={self.k}, modulus={self.modulus})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus)

    def __hash__(self) -> int:
        return self._hash

    @property
    def generator(self) -> int:
        """Code of the primitive element the tables are built on."""
        return self._exp[1 % self.n1]

    def exp(self, i: int) -> int:
        return self._exp[i % self.n1]

    def log(self, a: int) -> int:
        if a == 0:
            raise DomainError("log of zero")
        return self._log[a]

    def coeffs(self, a: int) -> Tuple[int, ...]:
        return tuple(_digits(a, self.p, self.k))

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) > self.k:
            raise ParameterError(f"too many coefficients for F_{self.p}^{self.k}")
        return _undigits([c % self.p for c in coeffs], self.p)

    def element(self, code: int) -> "FieldElement":
        return FieldElement(self, code)

    # Scalar arithmetic on codes.

    def add(self, a: int, b: int) -> int:
        if a == 0:
            return b
        if b == 0:
            return a
        la = self._log[a]
        z = self._zech[(self._log[b] - la) % self.n1]
        if z < 0:
            return 0
        return self._exp[la + z]

    def neg(self, a: int) -> int:
        if a == 0:
            return 0
        return self._exp[self._log[a] + self._half]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DomainError("inverse of zero")
        return self._exp[self.n1 - self._log[a]]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise DomainError("negative power of zero")
            return 1 if e == 0 else 0
        return self._exp[(self._log[a] * e) % self.n1]

    # Vectorized arithmetic on int arrays of codes.

    def vmul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self._exp_np[self._log_np[a] + self._log_np[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vadd(self, a, b) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        la = self._log_np[a]
        z = self._zech_np[(self._log_np[b] - la) % self.n1]
        out = np.where(z < 0, 0, self._exp_np[la + np.maximum(z, 0)])
        out = np.where(a == 0, b, out)
        return np.where(b == 0, a, out)

    def vinv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DomainError("inverse of zero")
        return self._exp_np[self.n1 - self._log_np[a]]


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    code: int

    def __post_init__(self):
        if not 0 <= self.code < self.field.order:
            raise ParameterError(f"code {self.code} out of range for {self.field}")

    def _other(self, other: "FieldElement") -> int:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise ParameterError("operands live in different fields")
        return other.code

    @property
    def coeffs(self) -> Tuple[int, ...]:
        return self.field.coeffs(self.code)

    def is_zero(self) -> bool:
        return self.code == 0

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.field, self.field.add(self.code, self._other(other)))

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.field, self.field.sub(self.code, self._other(other)))

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.field, self.field.mul(self.code, self._other(other)))

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.field, self.field.div(self.code, self._other(other)))

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, self.field.neg(self.code))

    def __pow__(self, e: int) -> "FieldElement":
        return FieldElement(self.field, self.field.pow(self.code, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.code))

    def __repr__(self) -> str:
        return f"FieldElement({list(self.coeffs)} in F_{self.field.order})"


class Poly:
    """Polynomial in y over a FieldSpec, coefficient codes low degree first."""
    __slots__ = ("field", "coeffs")

    def __init__(self, field: FieldSpec, coeffs: Sequence[int] = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.field = field
        self.coeffs = tuple(c)

    @classmethod
    def zero(cls, field: FieldSpec) -> "Poly":
        return cls(field)

    @classmethod
    def one(cls, field: FieldSpec) -> "Poly":
        return cls(field, (1,))

    @classmethod
    def constant(cls, field: FieldSpec, c: int) -> "Poly":
        return cls(field, (c,))

    @classmethod
    def variable(cls, field: FieldSpec) -> "Poly":
        return cls(field, (0, 1))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == (1,)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs and self.field == other.field

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            coef = str(c) if (c != 1 or i == 0) else ""
            mono = "" if i == 0 else ("y" if i == 1 else f"y^{i}")
            terms.append(f"{coef}{mono}")
        return " + ".join(reversed(terms))

    def __add__(self, other: "Poly") -> "Poly":
        F = self.field
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = F.add(out[i], c)
        return Poly(F, out)

    def __neg__(self) -> "Poly":
        F = self.field
        return Poly(F, [F.neg(c) for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        F = self.field
        if not a or not b:
            return Poly(F)
        exp, log, zech, n1 = F._exp, F._log, F._zech, F.n1
        out = [0] * (len(a) + len(b) - 1)
        logs_b = [(j, log[c]) for j, c in enumerate(b) if c]
        for i, ai in enumerate(a):
            if not ai:
                continue
            la = log[ai]
            for j, lb in logs_b:
                lt = la + lb
                if lt >= n1:
                    lt -= n1
                s = out[i + j]
                if s == 0:
                    out[i + j] = exp[lt]
                else:
                    ls = log[s]
                    z = zech[(lt - ls) % n1]
                    out[i + j] = 0 if z < 0 else exp[ls + z]
        return Poly(F, out)

    def scale(self, c: int) -> "Poly":
        F = self.field
        if c == 0:
            return Poly(F)
        return Poly(F, [F.mul(x, c) for x in self.coeffs])

    def monic(self) -> "Poly":
        if not self.coeffs or self.lead == 1:
            return self
        return self.scale(self.field.inv(self.lead))

    def divmod(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        if other.is_zero():
            raise DomainError("polynomial division by zero")
        F = self.field
        rem = list(self.coeffs)
        db = other.degree
        if len(rem) - 1 < db:
            return Poly(F), self
        inv_lead = F.inv(other.lead)
        quot = [0] * (len(rem) - db)
        b = other.coeffs
        for shift in range(len(rem) - 1 - db, -1, -1):
            c = rem[shift + db]
            if c == 0:
                continue
            t = F.mul(c, inv_lead)
            quot[shift] = t
            for j, bj in enumerate(b):
                if bj:
                    rem[shift + j] = F.sub(rem[shift + j], F.mul(t, bj))
        return Poly(F, quot), Poly(F, rem)

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ConsistencyError("inexact polynomial division")
        return q

    def low_degree(self) -> float:
        """Multiplicity of the root y = 0; +inf for the zero polynomial."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return math.inf

    def shift_down(self, v: int) -> "Poly":
        """Divides by y^v; the caller guarantees y^v divides self."""
        return Poly(self.field, self.coeffs[v:])

    def evaluate(self, x: int) -> int:
        F = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = F.add(F.mul(acc, x), c)
        return acc

    def evaluate_in(self, target: FieldSpec, x: int, embed: Sequence[int]) -> int:
        """Evaluates at x in `target`, mapping coefficients through `embed`."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = target.add(target.mul(acc, x), embed[c])
        return acc

    def powmod(self, e: int, modulus: "Poly") -> "Poly":
        result = Poly.one(self.field)
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def serialize(self) -> str:
        return ",".join(str(c) for c in self.coeffs) if self.coeffs else "0"

    @classmethod
    def parse(cls, field: FieldSpec, text: str) -> "Poly":
        try:
            coeffs = [int(tok) for tok in text.strip().split(",")]
        except ValueError as exc:
            raise ParameterError(f"malformed polynomial {text!r}") from exc
        if any(not 0 <= c < field.order for c in coeffs):
            raise ParameterError(f"coefficient out of range in {text!r}")
        return cls(field, coeffs)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd; zero only when both inputs are zero."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def is_irreducible(f: Poly) -> bool:
    """Ben-Or test: no factor of degree i divides y^{Q^i} - y for i <= deg/2."""
    n = f.degree
    if n < 1:
        return False
    if n == 1:
        return True
    F = f.field
    f = f.monic()
    y = Poly.variable(F)
    h = y
    for _ in range(n // 2):
        h = h.powmod(F.order, f)
        if poly_gcd(f, h - y).degree > 0:
            return False
    return True


def _smallest_irreducible(prime: FieldSpec, k: int) -> Tuple[int, ...]:
    # Candidates y^k + (lower part) in increasing integer code of the lower part.
    p = prime.p
    for n in range(p ** k):
        lower = _digits(n, p, k)
        if lower[0] == 0:
            continue
        if is_irreducible(Poly(prime, lower + [1])):
            return tuple(lower + [1])
    raise ConsistencyError(f"no irreducible polynomial of degree {k} over F_{p}")


@lru_cache(maxsize=None)
def build_field(p: int, k: int = 1) -> FieldSpec:
    """
    Builds F_{p^k} with the smallest monic irreducible modulus of degree k
    (candidates ordered by the integer code of their lower coefficients).
    The prime field uses the modulus y.
    """
    if p == 2:
        raise ParameterError("characteristic 2 is not supported")
    if not is_prime(p):
        raise ParameterError(f"{p} is not a prime")
    if k < 1:
        raise ParameterError(f"extension degree must be >= 1, got {k}")
    if k == 1:
        return FieldSpec(p, 1, (0, 1))
    modulus = _smallest_irreducible(build_field(p, 1), k)
    logger.debug("built F_%d^%d with modulus %s", p, k, modulus)
    return FieldSpec(p, k, modulus)


@lru_cache(maxsize=None)
def embedding(sub: FieldSpec, sup: FieldSpec) -> Tuple[int, ...]:
    """
    Table mapping codes of `sub` to codes of `sup`, sending the generator y of
    sub to the smallest root of sub's modulus in sup.
    """
    if sub.p != sup.p or sup.k % sub.k:
        raise ParameterError(f"{sub} is not a subfield of {sup}")
    if sub == sup:
        return tuple(range(sub.order))
    modulus = Poly(sup, sub.modulus)
    root = next((x for x in range(sup.order) if modulus.evaluate(x) == 0), None)
    if root is None:
        raise ConsistencyError(f"modulus of {sub} has no root in {sup}")
    powers = [sup.pow(root, i) for i in range(sub.k)]
    table = []
    for code in range(sub.order):
        acc = 0
        for c, pw in zip(_digits(code, sub.p, sub.k), powers):
            if c:
                acc = sup.add(acc, sup.mul(c, pw))
        table.append(acc)
    return tuple(table)


def field_rank(field: FieldSpec, rows: Sequence[Sequence[int]]) -> int:
    """Rank of a matrix of codes by Gaussian elimination."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = field.inv(m[rank][col])
        for i in range(rank + 1, len(m)):
            if m[i][col]:
                t = field.mul(m[i][col], inv)
                m[i] = [field.sub(x, field.mul(t, y)) for x, y in zip(m[i], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def frobenius(x: FieldElement, spec: Optional[FieldSpec] = None) -> FieldElement:
    """x -> x^p; applying it k times is the identity on F_{p^k}."""
    if spec is not None and spec != x.field:
        raise ParameterError("element does not belong to the given field")
    F = x.field
    return FieldElement(F, F.pow(x.code, F.p))


def element_order(x: FieldElement) -> int:
    if x.code == 0:
        raise DomainError("zero has no multiplicative order")
    F = x.field
    return F.n1 // math.gcd(F.log(x.code), F.n1)


def minimal_polynomial(x: FieldElement, base: Optional[FieldSpec] = None) -> Poly:
    """
    Minimal polynomial of x over `base` (default: the prime field), as the
    product of (Y - c) over the conjugates c = x^{|base|^i}.
    """
    F = x.field
    base = base or build_field(F.p, 1)
    back = {c: i for i, c in enumerate(embedding(base, F))}
    Q = base.order
    conjugates: List[int] = []
    c = x.code
    while c not in conjugates:
        conjugates.append(c)
        c = F.pow(c, Q)
    poly = Poly.one(F)
    for r in conjugates:
        poly = poly * Poly(F, (F.neg(r), 1))
    try:
        return Poly(base, [back[c] for c in poly.coeffs])
    except KeyError as exc:
        raise ConsistencyError("minimal polynomial has coefficients outside the base field") from exc


def find_normal_element(ext: FieldSpec, base: Optional[FieldSpec] = None) -> FieldElement:
    """
    Smallest code x whose conjugates x, x^Q, ..., x^{Q^{d-1}} (Q = |base|) are
    linearly independent over base. Independence over base is equivalent to
    the Moore matrix (x^{Q^{i+j}}) being nonsingular over ext.
    """
    base = base or build_field(ext.p, 1)
    if base.p != ext.p or ext.k % base.k:
        raise ParameterError(f"{ext} is not an extension of {base}")
    d = ext.k // base.k
    Q = base.order
    for code in range(1, ext.order):
        conj = [code]
        for _ in range(d - 1):
            conj.append(ext.pow(conj[-1], Q))
        # x^{Q^d} = x, so the rows of the Moore matrix are rotations.
        moore = [conj[i:] + conj[:i] for i in range(d)]
        if field_rank(ext, moore) == d:
            return FieldElement(ext, code)
    raise ConsistencyError(f"no normal element in {ext}")
