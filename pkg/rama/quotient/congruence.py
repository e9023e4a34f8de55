"""
Congruence quotients: reduction of the lattice modulo an irreducible f in
F_q[y], the partite index of the quotient, the polynomial search, finite
group generation by breadth-first search and the d-fold cover.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from rama.building.cslattice import GeneratorSet
from rama.complex.hypergraph import PartiteHypergraph, clique_complex
from rama.core.errors import (
    BudgetExceededError, ConsistencyError, DomainError, NotFoundError, ParameterError, PreconditionError,
)
from rama.core.gf import (
    FieldElement, FieldSpec, Poly, build_field, divisors, embedding, field_rank, is_irreducible,
    minimal_polynomial, prime_power,
)
from rama.core.laurent import ValMatrix

logger = logging.getLogger(__name__)


def pgl_order(d: int, s: int) -> int:
    out = s ** (d * (d - 1) // 2)
    for i in range(2, d + 1):
        out *= s ** i - 1
    return out


def psl_order(d: int, s: int) -> int:
    return pgl_order(d, s) // math.gcd(d, s - 1)


@dataclass
class CongruenceMap:
    """
    Evaluation y -> alpha, alpha a root of f, in the field M = F_{q^lcm(d,e)}
    that contains both the coefficient field L of the lattice and F_q[y]/(f).
    """
    q: int
    d: int
    f: Poly
    field: FieldSpec
    alpha: int
    coeff_embedding: Tuple[int, ...]

    @property
    def e(self) -> int:
        return self.f.degree

    def evaluate(self, p: Poly) -> int:
        return p.evaluate_in(self.field, self.alpha, self.coeff_embedding)


def congruence_map(q: int, d: int, f: Poly) -> CongruenceMap:
    """f must be monic irreducible over F_q of degree e >= 2 with f(0), f(-1) != 0."""
    p, m = prime_power(q)
    base = build_field(p, m)
    if f.field != base:
        raise ParameterError(f"f must have coefficients in F_{q}")
    e = f.degree
    if e < 2:
        raise ParameterError(f"f must have degree >= 2, got {e}")
    if f.lead != 1 or not is_irreducible(f):
        raise ParameterError(f"f = {f.serialize()} is not monic irreducible")
    if f.evaluate(0) == 0 or f.evaluate(base.neg(1)) == 0:
        raise ParameterError("f must not vanish at 0 or -1")
    L = build_field(p, m * d)
    M = build_field(p, m * math.lcm(d, e))
    l_to_m = embedding(L, M)
    base_to_m = tuple(l_to_m[c] for c in embedding(base, L))
    fm = Poly(M, [base_to_m[c] for c in f.coeffs])
    alpha = next((x for x in range(M.order) if fm.evaluate(x) == 0), None)
    if alpha is None:
        raise ConsistencyError(f"f = {f.serialize()} has no root in {M}")
    return CongruenceMap(q=q, d=d, f=f, field=M, alpha=alpha, coeff_embedding=l_to_m)


@dataclass(frozen=True)
class ProjMatrix:
    """Row-major codes over `field`, first nonzero entry equal to 1."""
    field: FieldSpec
    d: int
    codes: Tuple[int, ...]

    @classmethod
    def canonical(cls, field: FieldSpec, rows: Sequence[Sequence[int]]) -> "ProjMatrix":
        flat = [c for r in rows for c in r]
        lead = next((c for c in flat if c), 0)
        if lead == 0:
            raise DomainError("zero matrix has no projective class")
        inv = field.inv(lead)
        return cls(field, len(rows), tuple(field.mul(c, inv) for c in flat))

    @classmethod
    def identity(cls, field: FieldSpec, d: int) -> "ProjMatrix":
        return cls(field, d, tuple(1 if i == j else 0 for i in range(d) for j in range(d)))

    def rows(self) -> List[List[int]]:
        d = self.d
        return [list(self.codes[i * d:(i + 1) * d]) for i in range(d)]

    def __matmul__(self, other: "ProjMatrix") -> "ProjMatrix":
        F, d = self.field, self.d
        a, b = self.codes, other.codes
        out = []
        for i in range(d):
            for j in range(d):
                acc = 0
                for k in range(d):
                    acc = F.add(acc, F.mul(a[i * d + k], b[k * d + j]))
                out.append(acc)
        return ProjMatrix.canonical(F, [out[i * d:(i + 1) * d] for i in range(d)])

    def serialize(self) -> str:
        return ",".join(map(str, self.codes))


def reduce_mod_f(m: ValMatrix, cmap: CongruenceMap) -> ProjMatrix:
    """
    Entrywise evaluation at y = alpha of the primitive numerator of m, so a
    common factor f of the entries cannot zero out the projective class.
    """
    if cmap.evaluate(m.den) == 0:
        raise DomainError("denominator vanishes at alpha; entries are not in R")
    rows = [[cmap.evaluate(p) for p in r] for r in m.primitive_numerator()]
    if field_rank(cmap.field, rows) < m.d:
        raise DomainError("reduction is singular modulo f")
    return ProjMatrix.canonical(cmap.field, rows)


def partite_index(cmap: CongruenceMap, d: int) -> int:
    """Order of alpha/(1+alpha) in F_{q^e}* modulo d-th powers."""
    M = cmap.field
    s = cmap.q ** cmap.e
    x = M.div(cmap.alpha, M.add(1, cmap.alpha))
    test = (s - 1) // math.gcd(d, s - 1)
    for r in divisors(d):
        if M.pow(M.pow(x, r), test) == 1:
            return r
    raise ConsistencyError("no divisor of d kills alpha/(1+alpha) modulo d-th powers")


def _monic_candidates(base: FieldSpec, e: int):
    for code in range(base.order ** e):
        lower = [(code // base.order ** i) % base.order for i in range(e)]
        yield Poly(base, lower + [1])


def search_polynomial(q: int, d: int, e: int, target_r: int) -> CongruenceMap:
    """
    For target_r = 1: the first beta in F_{q^e} (code order) with beta^d != 1
    such that alpha = beta^d / (1 - beta^d) generates F_{q^e}; f is the
    minimal polynomial of alpha. Otherwise the first irreducible f of degree
    e (coefficient code order) with partite index target_r.
    """
    if e < 2:
        raise ParameterError(f"e must be >= 2, got {e}")
    if target_r < 1 or d % target_r:
        raise ParameterError(f"r = {target_r} does not divide d = {d}")
    p, m = prime_power(q)
    base = build_field(p, m)
    if target_r == 1:
        if q ** e < 4 * d * d + 1:
            logger.warning("q^e = %d < 4d^2+1 = %d: existence of a suitable beta is not guaranteed",
                           q ** e, 4 * d * d + 1)
        K = build_field(p, m * e)
        for beta in range(1, K.order):
            bd = K.pow(beta, d)
            if bd == 1:
                continue
            alpha = K.div(bd, K.sub(1, bd))
            f = minimal_polynomial(FieldElement(K, alpha), base)
            if f.degree != e:
                continue
            cmap = congruence_map(q, d, f)
            if partite_index(cmap, d) != 1:
                raise ConsistencyError(f"beta = {beta} gives partite index {partite_index(cmap, d)}")
            logger.info("search_polynomial: beta=%d f=%s", beta, f.serialize())
            return cmap
        raise NotFoundError(f"no beta in F_{q}^{e} gives a non-partite quotient for d={d}")
    minus_one = base.neg(1)
    for f in _monic_candidates(base, e):
        if f.evaluate(0) == 0 or f.evaluate(minus_one) == 0 or not is_irreducible(f):
            continue
        cmap = congruence_map(q, d, f)
        if partite_index(cmap, d) == target_r:
            logger.info("search_polynomial: f=%s has partite index %d", f.serialize(), target_r)
            return cmap
    raise NotFoundError(f"no irreducible f of degree {e} over F_{q} has partite index {target_r} for d={d}")


def _batch_right_mul(F: FieldSpec, flat: np.ndarray, g: Sequence[int], d: int) -> np.ndarray:
    """Rows of `flat` (n, d*d) times the fixed matrix g, entrywise in F."""
    out = np.zeros_like(flat)
    for i in range(d):
        for j in range(d):
            acc = np.zeros(len(flat), dtype=np.int64)
            for k in range(d):
                c = g[k * d + j]
                if c:
                    acc = F.vadd(acc, F.vmul(flat[:, i * d + k], c))
            out[:, i * d + j] = acc
    return out


def _batch_canonical(F: FieldSpec, flat: np.ndarray) -> np.ndarray:
    lead_pos = np.argmax(flat != 0, axis=1)
    lead = flat[np.arange(len(flat)), lead_pos]
    return F.vmul(flat, F.vinv(lead)[:, None])


class _KeyCodec:
    """Packed integer keys when they fit in 62 bits, raw bytes otherwise."""

    def __init__(self, order: int, width: int):
        self.packed = order ** width < 2 ** 62
        if self.packed:
            self.powers = np.array([order ** i for i in range(width)], dtype=np.int64)

    def keys(self, flat: np.ndarray) -> list:
        if self.packed:
            return (flat @ self.powers).tolist()
        return [row.tobytes() for row in flat]


def _simple_graph(adjacency: np.ndarray) -> sp.csr_matrix:
    """Symmetric 0/1 adjacency of the Cayley graph, loops and repeated edges dropped."""
    n, s = adjacency.shape
    rows = np.repeat(np.arange(n, dtype=np.int64), s)
    cols = adjacency.reshape(-1).astype(np.int64)
    keep = rows != cols
    a = sp.csr_matrix((np.ones(int(keep.sum())), (rows[keep], cols[keep])), shape=(n, n))
    a = ((a + a.T) > 0).astype(np.float64)
    return a.tocsr()


def _neighbor_lists(a: sp.csr_matrix) -> List[List[int]]:
    return [a.indices[a.indptr[v]:a.indptr[v + 1]].tolist() for v in range(a.shape[0])]


@dataclass
class GroupTable:
    """
    The quotient group as an (N, d*d) array of canonical codes in M, in BFS
    discovery order (identity first). adjacency[g, s] is the index of
    g * sigma_s for the s-th generator of Sigma_1, Sigma_2, ...
    """
    d: int
    q: int
    e: int
    r: int
    cmap: CongruenceMap
    elements: np.ndarray
    index: Dict
    generator_images: List[ProjMatrix]
    generator_types: np.ndarray
    adjacency: np.ndarray
    types: Optional[np.ndarray] = None

    @property
    def order(self) -> int:
        return len(self.elements)

    def element(self, i: int) -> ProjMatrix:
        return ProjMatrix(self.cmap.field, self.d, tuple(int(c) for c in self.elements[i]))

    def graph(self) -> sp.csr_matrix:
        return _simple_graph(self.adjacency)


def generate_group(gens: GeneratorSet, cmap: CongruenceMap, max_elements: int = 5_000_000) -> GroupTable:
    """
    Closure of the identity under right multiplication by the reduced
    generators, one BFS level at a time with the products of a whole level
    computed as numpy arrays.
    """
    d, q, e = gens.d, gens.q, cmap.e
    if cmap.d != d:
        raise ParameterError(f"congruence map was built for d={cmap.d}, generators for d={d}")
    M = cmap.field
    flat_gens = gens.flat()
    images = [reduce_mod_f(s, cmap) for s, _ in flat_gens]
    gen_types = np.array([t for _, t in flat_gens], dtype=np.int64)
    r = partite_index(cmap, d)
    codec = _KeyCodec(M.order, d * d)

    ident = np.array([ProjMatrix.identity(M, d).codes], dtype=np.int64)
    index: Dict = {codec.keys(ident)[0]: 0}
    levels = [ident]
    blocks: List[np.ndarray] = []
    types: List[int] = [0]
    level = ident
    start = 0
    logger.info("group BFS: d=%d q=%d e=%d r=%d over %r with %d generators", d, q, e, r, M, len(images))
    while len(level):
        block = np.empty((len(level), len(images)), dtype=np.int64)
        new_rows = []
        for s, img in enumerate(images):
            prod = _batch_canonical(M, _batch_right_mul(M, level, img.codes, d))
            t_s = int(gen_types[s])
            for row, key in enumerate(codec.keys(prod)):
                j = index.get(key)
                expected_type = (types[start + row] + t_s) % r
                if j is None:
                    j = len(index)
                    index[key] = j
                    new_rows.append(prod[row])
                    types.append(expected_type)
                    if j + 1 > max_elements:
                        raise BudgetExceededError(f"group BFS exceeded {max_elements} elements", j + 1)
                elif r > 1 and types[j] != expected_type:
                    raise ConsistencyError(f"type labels disagree at element {j}: {types[j]} vs {expected_type}")
                block[row, s] = j
        blocks.append(block)
        start += len(level)
        level = np.array(new_rows, dtype=np.int64).reshape(-1, d * d)
        levels.append(level)
        logger.debug("group BFS level %d: %d new, %d total", len(blocks), len(level), len(index))

    elements = np.concatenate(levels, axis=0)
    adjacency = np.concatenate(blocks, axis=0)
    n = len(elements)
    s = q ** e
    psl = psl_order(d, s)
    allowed = {psl * k for k in divisors(d)}
    if n not in allowed:
        raise ConsistencyError(f"group has {n} elements, not |PSL_{d}({s})| * k for k | {d}")
    if n != psl * r:
        raise ConsistencyError(f"group has {n} elements but partite index {r} predicts {psl * r}")
    logger.info("group BFS done: %d elements", n)
    return GroupTable(
        d=d, q=q, e=e, r=r, cmap=cmap, elements=elements, index=index,
        generator_images=images, generator_types=gen_types, adjacency=adjacency,
        types=np.array(types, dtype=np.int64) if r > 1 else None,
    )


def write_group(table: GroupTable, path: str) -> None:
    """Header 'd q e r order', element lines 'index codes', then 'g h type' edges."""
    with open(path, "w") as fh:
        fh.write("d q e r order\n")
        fh.write(f"{table.d} {table.q} {table.e} {table.r} {table.order}\n")
        for i, row in enumerate(table.elements):
            fh.write(f"{i} {','.join(map(str, row.tolist()))}\n")
        fh.write("g h type\n")
        for g in range(table.order):
            for s, h in enumerate(table.adjacency[g].tolist()):
                fh.write(f"{g} {h} {int(table.generator_types[s])}\n")


@dataclass
class CoverTable:
    """Elements (g, t) stored as g*d + t; adjacency[(g, t), s] = (g sigma_s, t + type_s)."""
    base: GroupTable
    adjacency: np.ndarray

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def order(self) -> int:
        return len(self.adjacency)

    @property
    def types(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64) % self.d

    def element(self, idx: int) -> Tuple[int, int]:
        return divmod(idx, self.d)

    def projection(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64) // self.d

    def graph(self) -> sp.csr_matrix:
        return _simple_graph(self.adjacency)


def cover_group(base: GroupTable) -> CoverTable:
    if base.r != 1:
        raise PreconditionError(f"the d-fold cover needs partite index 1, got r = {base.r}")
    d = base.d
    n, s = base.adjacency.shape
    g = np.repeat(np.arange(n, dtype=np.int64), d)
    t = np.tile(np.arange(d, dtype=np.int64), n)
    adj = base.adjacency[g] * d + (t[:, None] + base.generator_types[None, :]) % d
    return CoverTable(base=base, adjacency=adj)


def group_complex(table: GroupTable) -> PartiteHypergraph:
    """Clique complex of the quotient's Cayley graph; types mod r when r > 1."""
    types = table.types.tolist() if table.types is not None else None
    return clique_complex(_neighbor_lists(table.graph()), table.d, types=types, r=table.r)


def cover_complex(cover: CoverTable) -> PartiteHypergraph:
    return clique_complex(_neighbor_lists(cover.graph()), cover.d, types=cover.types.tolist(), r=cover.d)
