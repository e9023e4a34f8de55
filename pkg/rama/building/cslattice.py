"""
The arithmetic lattice acting simply transitively on the vertices of the
building of PGL_d(F_q((y))): its algebra, the generators Sigma_1..Sigma_{d-1}
and balls of the building around the standard vertex.

The division algebra is represented over L(y), L = F_{q^d}, where it splits:
z is the companion matrix of X^d - (1+y) and u in L acts as the diagonal
matrix of its Galois conjugates. Valuations and vertex classes are unchanged
by this unramified extension of scalars.
"""
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from rama.complex.hypergraph import Facet, enumerate_cliques
from rama.core.errors import BudgetExceededError, ConsistencyError, ParameterError, PreconditionError
from rama.core.gf import FieldSpec, Poly, build_field, field_rank, find_normal_element, prime_power
from rama.core.laurent import (
    RatFun, RelPosition, ValMatrix, classify_relation, invariant_valuations,
    projective_canonical_form, relative_position,
)
from rama.schema import CheckReport

logger = logging.getLogger(__name__)


def gaussian_binomial(d: int, i: int, q: int) -> int:
    """Number of i-dimensional subspaces of F_q^d."""
    if i < 0 or i > d:
        return 0
    num, den = 1, 1
    for k in range(i):
        num *= q ** (d - k) - 1
        den *= q ** (k + 1) - 1
    return num // den


def count_full_flags(d: int, q: int) -> int:
    """Number of complete flags 0 < V_1 < ... < V_{d-1} < F_q^d."""
    out = 1
    for k in range(1, d + 1):
        out *= (q ** k - 1) // (q - 1)
    return out


def cayley_degree(d: int, q: int) -> int:
    """Vertex degree of the building's 1-skeleton: the sum of |Sigma_i|."""
    return sum(gaussian_binomial(d, i, q) for i in range(1, d))


def enumerate_subspaces(d: int, i: int, q: int) -> List[FrozenSet[Tuple[int, ...]]]:
    """
    Every i-dimensional subspace of F_q^d as the frozenset of its vectors,
    one per reduced row echelon form.
    """
    p, m = prime_power(q)
    F = build_field(p, m)
    out = []
    for pivots in itertools.combinations(range(d), i):
        free = [(r, c) for r, pc in enumerate(pivots) for c in range(pc + 1, d) if c not in pivots]
        for values in itertools.product(range(q), repeat=len(free)):
            basis = [[0] * d for _ in range(i)]
            for r, pc in enumerate(pivots):
                basis[r][pc] = 1
            for (r, c), val in zip(free, values):
                basis[r][c] = val
            span = set()
            for coeffs in itertools.product(range(q), repeat=i):
                vec = [0] * d
                for a, row in zip(coeffs, basis):
                    if a:
                        vec = [F.add(x, F.mul(a, y)) for x, y in zip(vec, row)]
                span.add(tuple(vec))
            out.append(frozenset(span))
    return out


def count_flags_brute(d: int, q: int) -> int:
    """Complete flags counted by walking subspace inclusions; an oracle for count_full_flags."""
    if d == 1:
        return 1
    levels = [enumerate_subspaces(d, i, q) for i in range(1, d)]
    chains = {s: 1 for s in levels[0]}
    for upper in levels[1:]:
        chains = {v: sum(c for u, c in chains.items() if u <= v) for v in upper}
    return sum(chains.values())


@dataclass
class CSAlgebraRep:
    d: int
    q: int
    base: FieldSpec
    field: FieldSpec
    xi0: int
    xi_matrices: Tuple[ValMatrix, ...]
    z_matrix: ValMatrix
    b_matrix: ValMatrix

    def phi(self, x: int, times: int = 1) -> int:
        """Frobenius x -> x^q of L, applied `times` times (mod d)."""
        return self.field.pow(x, self.q ** (times % self.d))

    def unit_matrix(self, u: int) -> ValMatrix:
        """D(u) = diag(u, phi^{-1}(u), ..., phi^{-(d-1)}(u))."""
        diag = [RatFun.constant(self.field, self.phi(u, -j)) for j in range(self.d)]
        return ValMatrix.diagonal(self.field, diag)

    def conjugated_generator(self, u: int) -> ValMatrix:
        """Projective canonical form of b_u = u b u^{-1}."""
        m = self.unit_matrix(u) @ self.b_matrix @ self.unit_matrix(self.field.inv(u))
        return projective_canonical_form(m, verify=False)


def build_cs_rep(d: int, q: int) -> CSAlgebraRep:
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    p, m = prime_power(q)
    if p == 2:
        raise ParameterError(f"q = {q} is even; only odd q is supported")
    base = build_field(p, m)
    L = build_field(p, m * d)
    xi0 = find_normal_element(L, base).code

    one, zero = Poly.one(L), Poly.zero(L)
    one_plus_y = Poly(L, (1, 1))
    num = [[zero] * d for _ in range(d)]
    for j in range(d - 1):
        num[j + 1][j] = one
    num[0][d - 1] = one_plus_y
    z = ValMatrix(L, num)

    rep = CSAlgebraRep(d=d, q=q, base=base, field=L, xi0=xi0, xi_matrices=(), z_matrix=z, b_matrix=z)
    xis = [rep.phi(xi0, i) for i in range(d)]
    rep.xi_matrices = tuple(rep.unit_matrix(x) for x in xis)

    identity = ValMatrix.identity(L, d)
    if z.power(d) != identity.scale(RatFun(one_plus_y)):
        raise ConsistencyError("z^d != (1+y) I")
    for i in range(d):
        if z @ rep.xi_matrices[i] != rep.xi_matrices[(i + 1) % d] @ z:
            raise ConsistencyError(f"z xi_{i} != xi_{(i + 1) % d} z")

    z_inv = z.inverse()
    b = identity - z_inv
    if b.det().valuation() != 1:
        raise ConsistencyError(f"det(b) has valuation {b.det().valuation()}, expected 1")
    partial = identity
    acc = identity
    for _ in range(d - 1):
        partial = partial @ z_inv
        acc = acc + partial
    y_over = RatFun(Poly.variable(L), one_plus_y)
    if b @ acc != identity.scale(y_over):
        raise ConsistencyError("b does not divide y/(1+y)")
    rep.b_matrix = b
    logger.info("algebra representation d=%d q=%d over %r, normal element %d", d, q, L, xi0)
    return rep


def build_sigma1(rep: CSAlgebraRep) -> List[ValMatrix]:
    """b_u for u = g^k, 0 <= k < (q^d-1)/(q-1): one per coset of F_{q^d}* / F_q*."""
    d, q = rep.d, rep.q
    count = (q ** d - 1) // (q - 1)
    target = RelPosition((0,) * (d - 1) + (1,))
    out: List[ValMatrix] = []
    seen = set()
    for k in range(count):
        bu = rep.conjugated_generator(rep.field.exp(k))
        if bu.key in seen:
            raise ConsistencyError(f"b_u for u = g^{k} repeats an earlier generator")
        seen.add(bu.key)
        a, _ = invariant_valuations(bu)
        if a != target:
            raise ConsistencyError(f"b_u for u = g^{k} has relative position {a}, expected {target}")
        out.append(bu)
    logger.info("Sigma_1: %d generators", len(out))
    return out


@dataclass
class GeneratorSet:
    """
    sigma[i-1] is Sigma_i. word_expansions[i-1][k] lists the Sigma_1 indices
    whose product realizes sigma[i-1][k].
    """
    rep: CSAlgebraRep
    sigma: List[List[ValMatrix]]
    word_expansions: List[List[Tuple[int, ...]]]

    @property
    def d(self) -> int:
        return self.rep.d

    @property
    def q(self) -> int:
        return self.rep.q

    @property
    def sizes(self) -> List[int]:
        return [len(s) for s in self.sigma]

    def flat(self) -> List[Tuple[ValMatrix, int]]:
        """(generator, type) pairs in order Sigma_1, Sigma_2, ..."""
        return [(g, i + 1) for i, level in enumerate(self.sigma) for g in level]


def _matmul_codes(F: FieldSpec, a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> List[List[int]]:
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = 0
            for k in range(n):
                if a[i][k] and b[k][j]:
                    acc = F.add(acc, F.mul(a[i][k], b[k][j]))
            row.append(acc)
        out.append(row)
    return out


def _widened_search(
    sigma1: List[ValMatrix], i: int, d: int, target: RelPosition,
    found: Dict[Tuple, Tuple[Tuple[int, ...], ValMatrix, List[List[int]]]], max_words: int,
) -> None:
    level = [((j,), s) for j, s in enumerate(sigma1)]
    for _ in range(2, i + d + 1):
        nxt: Dict[Tuple, Tuple[Tuple[int, ...], ValMatrix]] = {}
        for word, mat in level:
            for j, s in enumerate(sigma1):
                prod = projective_canonical_form(mat @ s, verify=False)
                if prod.key not in nxt:
                    nxt[prod.key] = (word + (j,), prod)
                    if len(nxt) > max_words:
                        raise BudgetExceededError(f"widened Sigma_{i} search exceeded {max_words} words", len(nxt))
        level = list(nxt.values())
    for word, mat in level:
        if mat.key not in found and invariant_valuations(mat)[0] == target:
            found[mat.key] = (word, mat, mat.mod_y())


def enumerate_sigma(rep: CSAlgebraRep, sigma1: List[ValMatrix], max_words: int = 200_000) -> GeneratorSet:
    """
    Sigma_i for i = 2..d-1 as products of i elements of Sigma_1. A word is
    extended only while its reduction at y = 0 keeps rank d - (length),
    i.e. while its lattice stays a neighbour of the standard one.
    """
    d, q, L = rep.d, rep.q, rep.field
    reductions = [s.mod_y() for s in sigma1]
    sigma = [list(sigma1)]
    words: List[List[Tuple[int, ...]]] = [[(j,) for j in range(len(sigma1))]]
    level = [((j,), s, r) for j, (s, r) in enumerate(zip(sigma1, reductions))]
    for i in range(2, d):
        expected = gaussian_binomial(d, i, q)
        target = RelPosition((0,) * (d - i) + (1,) * i)
        found: Dict[Tuple, Tuple[Tuple[int, ...], ValMatrix, List[List[int]]]] = {}
        for word, mat, red in level:
            for j, s in enumerate(sigma1):
                red_prod = _matmul_codes(L, red, reductions[j])
                if field_rank(L, red_prod) != d - i:
                    continue
                prod = projective_canonical_form(mat @ s, verify=False)
                if prod.key not in found:
                    found[prod.key] = (word + (j,), prod, red_prod)
        if len(found) < expected:
            logger.warning("Sigma_%d: %d of %d found by length-%d words, widening to length %d",
                           i, len(found), expected, i, i + d)
            _widened_search(sigma1, i, d, target, found, max_words)
        if len(found) != expected:
            raise ConsistencyError(f"|Sigma_{i}| = {len(found)}, expected [{d} choose {i}]_{q} = {expected}")
        members = list(found.values())
        for word, mat, _ in members:
            a, _ = invariant_valuations(mat)
            if a != target:
                raise ConsistencyError(f"Sigma_{i} element from word {word} has relative position {a}")
        sigma.append([m for _, m, _ in members])
        words.append([w for w, _, _ in members])
        level = members
        logger.info("Sigma_%d: %d generators", i, len(members))
    return GeneratorSet(rep=rep, sigma=sigma, word_expansions=words)


def generator_set(d: int, q: int) -> GeneratorSet:
    """build_cs_rep, build_sigma1 and enumerate_sigma in one call."""
    rep = build_cs_rep(d, q)
    return enumerate_sigma(rep, build_sigma1(rep))


@dataclass
class BallVertex:
    matrix: ValMatrix
    depth: int
    relpos: RelPosition
    type: int


@dataclass
class BuildingBall:
    """Vertex 0 is the standard vertex; neighbour lists are sorted."""
    d: int
    q: int
    radius: int
    vertices: List[BallVertex]
    neighbors: List[List[int]]
    facets: List[Facet] = field(default_factory=list)

    @property
    def center(self) -> int:
        return 0

    def depth_counts(self) -> List[int]:
        counts = [0] * (self.radius + 1)
        for v in self.vertices:
            counts[v.depth] += 1
        return counts

    def ball_sizes(self) -> List[int]:
        """Number of vertices within distance 0, 1, ..., radius of the center."""
        return list(itertools.accumulate(self.depth_counts()))


def building_ball(gens: GeneratorSet, radius: int, max_vertices: int = 2_000_000) -> BuildingBall:
    """
    Breadth-first search from the identity by right multiplication with Sigma.
    Depth-r vertices are expanded too, recording only edges to vertices
    already in the ball, so the ball's induced graph is complete.
    """
    if radius < 0:
        raise ParameterError("radius must be >= 0")
    d, q, L = gens.d, gens.q, gens.rep.field
    moves = gens.flat()
    identity = ValMatrix.identity(L, d)
    origin = RelPosition((0,) * d)
    vertices = [BallVertex(identity, 0, origin, 0)]
    index = {identity.key: 0}
    adj: List[set] = [set()]
    frontier = deque([0])
    logger.info("building ball d=%d q=%d radius=%d", d, q, radius)
    while frontier:
        v = frontier.popleft()
        here = vertices[v]
        for s, t in moves:
            w_mat = projective_canonical_form(here.matrix @ s, verify=False)
            w = index.get(w_mat.key)
            if w is None:
                if here.depth == radius:
                    continue
                depth = here.depth + 1
                a = relative_position(identity, w_mat)
                rel = classify_relation(a, d)
                tau = (here.type + t) % d
                if rel.distance != depth:
                    raise ConsistencyError(f"vertex at BFS depth {depth} has building distance {rel.distance}")
                if rel.type_offset != tau:
                    raise ConsistencyError(f"type {tau} from generator words disagrees with {rel.type_offset}")
                w = len(vertices)
                vertices.append(BallVertex(w_mat, depth, a, tau))
                index[w_mat.key] = w
                adj.append(set())
                frontier.append(w)
                if len(vertices) > max_vertices:
                    raise BudgetExceededError(f"building ball exceeded {max_vertices} vertices", len(vertices))
            if w != v:
                adj[v].add(w)
                adj[w].add(v)
        if v and vertices[v].depth != vertices[v - 1].depth:
            logger.debug("ball depth %d reached with %d vertices", vertices[v].depth, len(vertices))
    neighbors = [sorted(s) for s in adj]
    facets = enumerate_cliques(neighbors, d)
    ball = BuildingBall(d=d, q=q, radius=radius, vertices=vertices, neighbors=neighbors, facets=facets)
    logger.info("building ball: %d vertices by depth %s, %d facets", len(vertices), ball.depth_counts(), len(facets))
    return ball


def verify_local_structure(ball: BuildingBall, q: int, d: int) -> CheckReport:
    """Link of the center: wall degrees, facet count and neighbour types."""
    if (ball.q, ball.d) != (q, d):
        raise ParameterError(f"ball was built for d={ball.d} q={ball.q}, not d={d} q={q}")
    if ball.radius < 2:
        raise PreconditionError("the center's star is only complete in a ball of radius >= 2")
    report = CheckReport(title="local-structure")
    c = ball.center
    star = [f for f in ball.facets if c in f]
    walls: Dict[Facet, int] = {}
    for f in star:
        for wall in itertools.combinations(f, d - 1):
            if c in wall:
                walls.setdefault(wall, 0)
    for f in star:
        for wall in walls:
            if set(wall) <= set(f):
                walls[wall] += 1
    degrees = sorted(set(walls.values()))
    report.check("walls-at-center", len(walls) > 0, len(walls))
    report.check("wall-degree", degrees == [q + 1], degrees, q + 1, anchor="wall-degree")
    flags = count_full_flags(d, q)
    report.check("facets-at-center", len(star) == flags, len(star), flags, anchor="full-flags")
    if d <= 4 and q ** (d * d) <= 10 ** 9:
        brute = count_flags_brute(d, q)
        report.check("full-flags-oracle", brute == flags, brute, flags)
    depth1 = [v for v in ball.vertices if v.depth == 1]
    report.check("simple-transitivity", len(depth1) == cayley_degree(d, q), len(depth1), cayley_degree(d, q),
                 anchor="simple-transitivity")
    for i in range(1, d):
        n_i = sum(1 for v in depth1 if v.type == i)
        expected = gaussian_binomial(d, i, q)
        report.check(f"neighbors-type-{i}", n_i == expected, n_i, expected, anchor="sigma-sizes")
    report.note("vertices", len(ball.vertices))
    report.note("facets", len(ball.facets))
    return report


def export_ball(ball: BuildingBall, path: str) -> None:
    """One vertex per line (index, depth, relative position, matrix), then 'F' facet lines."""
    with open(path, "w") as fh:
        fh.write(f"BALL d={ball.d} q={ball.q} radius={ball.radius} "
                 f"vertices={len(ball.vertices)} facets={len(ball.facets)}\n")
        for k, v in enumerate(ball.vertices):
            rel = ",".join(map(str, v.relpos.a))
            fh.write(f"{k} {v.depth} {rel} {v.matrix.serialize()}\n")
        for f in ball.facets:
            fh.write("F " + " ".join(map(str, f)) + "\n")
