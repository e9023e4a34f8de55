"""
Discrepancy of partite hypergraphs and the mixing inequalities that bound it
through the second eigenvalues of the vertex-versus-wall graphs.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from rama.complex.hypergraph import PartiteHypergraph, is_type_regular, walls_and_incidence
from rama.core.errors import ParameterError, PreconditionError
from rama.core.prng import SplitMix64
from rama.schema import BOUND_SLACK, CheckReport, DiscrepancyReport

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 24


def _masks(h: PartiteHypergraph, subsets: Sequence[Sequence[int]]) -> List[np.ndarray]:
    if len(subsets) != h.d:
        raise ParameterError(f"need {h.d} subsets, got {len(subsets)}")
    masks = []
    for i, w in enumerate(subsets):
        m = np.zeros(h.n, dtype=bool)
        for v in w:
            if not 0 <= v < h.n or h.types[v] != i:
                raise PreconditionError(f"vertex {v} of W_{i} is not of type {i}")
            m[v] = True
        masks.append(m)
    return masks


def edge_count(h: PartiteHypergraph, subsets: Sequence[Sequence[int]]) -> int:
    """|E(W_0, ..., W_{d-1})|: facets whose type-i vertex lies in W_i for every i."""
    if not h.has_full_types:
        raise PreconditionError("discrepancy needs a full type function (r = d)")
    tf = h.typed_facets()
    inside = np.ones(len(tf), dtype=bool)
    for i, m in enumerate(_masks(h, subsets)):
        inside &= m[tf[:, i]]
    return int(inside.sum())


def discrepancy(h: PartiteHypergraph, subsets: Sequence[Sequence[int]]) -> Tuple[float, Fraction]:
    """| |E(W)|/|E| - prod |W_i|/|V_i| |, as a float and as an exact fraction."""
    count = edge_count(h, subsets)
    sizes = [len(c) for c in h.type_classes()]
    if 0 in sizes:
        raise PreconditionError("every type class must be nonempty")
    product = Fraction(1)
    for w, v in zip(subsets, sizes):
        product *= Fraction(len(set(w)), v)
    ratio = Fraction(count, len(h.facets)) if h.facets else Fraction(0)
    exact = abs(ratio - product)
    return float(exact), exact


def _side_degrees(h: PartiteHypergraph) -> Tuple[int, int]:
    if h.d != 2 or not h.has_full_types:
        raise PreconditionError("bipartite mixing needs a 2-partite graph with sides")
    tf = h.typed_facets()
    sizes = [len(c) for c in h.type_classes()]
    degrees = []
    for i in range(2):
        deg = np.bincount(tf[:, i], minlength=h.n)[np.array(h.type_classes()[i], dtype=np.int64)]
        if len(deg) == 0 or np.any(deg != deg[0]):
            raise PreconditionError(f"side {i} is not regular")
        degrees.append(int(deg[0]))
    if degrees[0] * sizes[0] != degrees[1] * sizes[1]:
        raise PreconditionError("side degrees do not balance")
    return degrees[0], degrees[1]


def bipartite_mixing_check(
    g: PartiteHypergraph, s: Sequence[int], t: Sequence[int], lam_tilde: float,
) -> CheckReport:
    """
    Both forms of the bipartite mixing inequality for one pair (S, T):
    disc <= lam~ sqrt(|S||T| / (|V1||V2|)) and
    | e(S,T) - k1 |S||T| / |V2| | <= lam sqrt(|S||T|), lam = lam~ sqrt(k1 k2).
    """
    k1, k2 = _side_degrees(g)
    v1, v2 = (len(c) for c in g.type_classes())
    disc, exact = discrepancy(g, [s, t])
    ns, nt = len(set(s)), len(set(t))
    bound = lam_tilde * math.sqrt(ns * nt / (v1 * v2))
    report = CheckReport(title="bipartite-mixing")
    report.check("normalized", disc <= bound + BOUND_SLACK, exact, bound, anchor="bipartite-mixing")
    e_st = edge_count(g, [s, t])
    deviation = abs(Fraction(e_st) - Fraction(k1 * ns * nt, v2))
    lam = lam_tilde * math.sqrt(k1 * k2)
    report.check("unnormalized", float(deviation) <= lam * math.sqrt(ns * nt) + BOUND_SLACK,
                 deviation, lam * math.sqrt(ns * nt), anchor="expander-mixing")
    return report


def sampled_bipartite_mixing(
    g: PartiteHypergraph, lam_tilde: float, samples: int, seed: int,
) -> CheckReport:
    """Seeded random (S, T) pairs, each side kept with probability 1/2."""
    _side_degrees(g)
    v1, v2 = g.type_classes()
    rng = SplitMix64(seed)
    failures = 0
    worst = (0.0, Fraction(0), 0.0)
    report = CheckReport(title="bipartite-mixing-sampled")
    report.csv_rows.append(["sample", "s", "t", "disc", "bound"])
    for k in range(samples):
        child = SplitMix64(rng.next_seed())
        s, t = child.random_subset(v1), child.random_subset(v2)
        pair = bipartite_mixing_check(g, s, t, lam_tilde)
        if not pair.passed:
            failures += 1
        line = pair.lines[0]
        if float(line.measured) >= worst[0]:
            worst = (float(line.measured), line.measured, float(line.bound))
        report.csv_rows.append([k, len(s), len(t), float(line.measured), float(line.bound)])
    report.check("failures", failures == 0, failures, 0, anchor="bipartite-mixing")
    report.note("seed", seed)
    report.note("samples", samples)
    report.note("max_disc", worst[1])
    report.note("bound_at_max", worst[2])
    return report


def hypergraph_bound(lam_tildes: Sequence[float], sizes: Sequence[int], class_sizes: Sequence[int]) -> float:
    """sum over i < d-1 of lam~(B_i) sqrt(|W_i| / |V_i|)."""
    return sum(lt * math.sqrt(w / v) for lt, w, v in zip(lam_tildes, sizes, class_sizes))


def _family_result(h, tf, classes, lam_tildes, colorful, family):
    inside = np.ones(len(tf), dtype=bool)
    product = Fraction(1)
    sizes = []
    for i, w in enumerate(family):
        m = np.zeros(h.n, dtype=bool)
        m[list(w)] = True
        inside &= m[tf[:, i]]
        product *= Fraction(len(w), len(classes[i]))
        sizes.append(len(w))
    exact = abs(Fraction(int(inside.sum()), len(tf)) - product)
    bound = hypergraph_bound(lam_tildes, sizes, [len(c) for c in classes])
    ok = float(exact) <= bound + BOUND_SLACK
    if colorful is not None:
        ok = ok and float(exact) <= colorful + BOUND_SLACK
    return exact, sizes, bound, ok


def hypergraph_mixing_check(
    h: PartiteHypergraph,
    lam_tildes: Sequence[float],
    mode: str = "sampled",
    samples: int = 10_000,
    seed: int = 7,
    colorful_bound: Optional[float] = None,
    threads: int = 1,
) -> DiscrepancyReport:
    """
    disc(W) <= sum_{i<d-1} lam~(B_i) sqrt(|W_i|/|V_i|) over every subset family
    (exhaustive) or over seeded random families (sampled). With
    `colorful_bound` each family is also checked against that constant.
    """
    if not is_type_regular(h):
        raise PreconditionError("hypergraph mixing needs a type-regular hypergraph")
    if len(lam_tildes) < h.d - 1:
        raise ParameterError(f"need {h.d - 1} normalized eigenvalues, got {len(lam_tildes)}")
    if not h.facets:
        raise PreconditionError("hypergraph has no facets")
    classes = h.type_classes()
    tf = h.typed_facets()

    if mode == "exhaustive":
        if sum(len(c) for c in classes) > EXHAUSTIVE_LIMIT:
            raise PreconditionError(f"exhaustive mode needs at most {EXHAUSTIVE_LIMIT} vertices in total")
        power_sets = [
            [tuple(c[j] for j in range(len(c)) if bits >> j & 1) for bits in range(1 << len(c))]
            for c in classes
        ]
        families = itertools.product(*power_sets)
        results = [_family_result(h, tf, classes, lam_tildes, colorful_bound, f) for f in families]
        used_seed = None
    elif mode == "sampled":
        rng = SplitMix64(seed)
        child_seeds = [rng.next_seed() for _ in range(samples)]

        def draw(child_seed: int):
            child = SplitMix64(child_seed)
            family = [child.random_subset(c) for c in classes]
            return _family_result(h, tf, classes, lam_tildes, colorful_bound, family)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(draw, child_seeds))
        else:
            results = [draw(s) for s in child_seeds]
        used_seed = seed
    else:
        raise ParameterError(f"unknown mode {mode!r}")

    failures = sum(1 for r in results if not r[3])
    worst = max(results, key=lambda r: r[0])
    rows = [[k, *r[1], float(r[0]), r[2], "PASS" if r[3] else "FAIL"] for k, r in enumerate(results)] \
        if mode == "sampled" else []
    logger.info("hypergraph mixing (%s): %d families, %d failures, max disc %s",
                mode, len(results), failures, worst[0])
    return DiscrepancyReport(
        mode=mode, seed=used_seed, families=len(results), failures=failures,
        max_disc=float(worst[0]), max_disc_exact=str(worst[0]), worst_sizes=worst[1],
        hypergraph_bound_at_worst=worst[2], colorful_bound=colorful_bound, samples=rows,
    )


def discrepancy_reduction_check(h: PartiteHypergraph, subsets: Sequence[Sequence[int]], i: int) -> CheckReport:
    """
    Splitting off type i: disc_H(W) <= disc_{B_i}(W_i, E_i(W)) + |W_i|/|V_i| disc_{H_i}(W),
    and disc_{H_i}(W) == disc_H(W with W_i replaced by V_i) on type-regular H.
    """
    if not h.has_full_types:
        raise PreconditionError("reduction check needs a full type function (r = d)")
    walls, b = walls_and_incidence(h, i)
    classes = h.type_classes()
    _masks(h, subsets)
    members = set().union(*(set(subsets[j]) for j in range(h.d) if j != i))
    in_w = [all(v in members for v in wall) for wall in walls]
    e_i_w = sum(in_w)
    frac_i = Fraction(len(set(subsets[i])), len(classes[i]))

    disc_h, exact_h = discrepancy(h, subsets)
    count = edge_count(h, subsets)
    disc_b = abs(Fraction(count, len(h.facets)) - frac_i * Fraction(e_i_w, len(walls)))
    product_rest = Fraction(1)
    for j in range(h.d):
        if j != i:
            product_rest *= Fraction(len(set(subsets[j])), len(classes[j]))
    disc_hi = abs(Fraction(e_i_w, len(walls)) - product_rest)

    report = CheckReport(title=f"reduction-type-{i}")
    rhs = disc_b + frac_i * disc_hi
    report.check("inequality", exact_h <= rhs, exact_h, rhs, anchor="type-reduction")
    replaced = [list(subsets[j]) if j != i else classes[i] for j in range(h.d)]
    _, exact_full = discrepancy(h, replaced)
    report.check("identity", disc_hi == exact_full, disc_hi, exact_full, anchor="type-reduction")
    return report


def _complete_block(d: int, s: int) -> Tuple[List[Tuple[int, ...]], int]:
    facets = [tuple(j * s + a for j, a in enumerate(c)) for c in itertools.product(range(s), repeat=d)]
    return facets, s


def _circulant_block(rng: SplitMix64, d: int, n: int) -> List[Tuple[int, ...]]:
    offsets = [rng.randbelow(n) for _ in range(d)]
    shifts = rng.random_subset(list(range(n))) or [rng.randbelow(n)]
    facets = []
    for x in range(n):
        for t in shifts:
            f = [j * n + (x + offsets[j]) % n for j in range(d - 1)]
            f.append((d - 1) * n + (x + offsets[d - 1] + t) % n)
            facets.append(tuple(f))
    return facets


def random_partite_corpus(
    seed: int, count: int, d_values: Sequence[int] = (2, 3), max_vertices: int = 12,
) -> List[PartiteHypergraph]:
    """
    Seeded type-regular d-partite hypergraphs: complete multipartite blocks,
    disjoint copies of one block and cyclic shifted constructions.
    """
    rng = SplitMix64(seed)
    out = []
    for k in range(count):
        d = d_values[k % len(d_values)]
        per_type = max_vertices // d
        if per_type < 1:
            raise ParameterError(f"max_vertices {max_vertices} is below d = {d}")
        kind = (k // len(d_values)) % 3
        if kind == 0:
            s = 1 + rng.randbelow(per_type)
            facets, part = _complete_block(d, s)
        elif kind == 1:
            n = 1 + rng.randbelow(per_type)
            facets, part = _circulant_block(rng, d, n), n
        else:
            s = 1 + rng.randbelow(max(1, per_type // 2))
            copies = max(1, per_type // s)
            copies = 1 + rng.randbelow(copies)
            block, _ = _complete_block(d, s)
            part = s * copies
            facets = []
            for c in range(copies):
                for f in block:
                    facets.append(tuple((v // s) * part + c * s + v % s for v in f))
        types = [v // part for v in range(d * part)]
        out.append(PartiteHypergraph(d=d, n=d * part, facets=sorted(facets), types=types, r=d))
    return out
