"""
Weak colorings of pure complexes: no facet may be monochromatic.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from rama.analysis.discrepancy import discrepancy, edge_count
from rama.complex.hypergraph import PartiteHypergraph
from rama.core.errors import BudgetExceededError, DomainError, PreconditionError
from rama.schema import CheckReport
from rama.spectral.bounds import chromatic_bound_forms

logger = logging.getLogger(__name__)

EXACT_MAX_VERTICES = 60


@dataclass
class ColoringResult:
    colors: List[int]
    count: int
    mode: str
    certificate: str = ""
    nodes: int = 0


def is_valid_coloring(h: PartiteHypergraph, colors: Sequence[int]) -> bool:
    if not h.facets:
        return True
    f = np.array(h.facets, dtype=np.int64)
    c = np.asarray(colors)[f]
    return not bool(np.any(np.all(c == c[:, :1], axis=1)))


def _facets_by_vertex(h: PartiteHypergraph) -> List[List[tuple]]:
    out: List[List[tuple]] = [[] for _ in range(h.n)]
    for f in h.facets:
        for v in f:
            out[v].append(f)
    return out


def _closes_monochromatic(v: int, c: int, incident: List[tuple], colors: List[int]) -> bool:
    for f in incident:
        if all(colors[u] == c for u in f if u != v):
            return True
    return False


def _check_facets(h: PartiteHypergraph) -> None:
    if h.d < 2 and h.facets:
        raise DomainError("a facet with a single vertex is always monochromatic")


def greedy_coloring(h: PartiteHypergraph, order: Optional[Sequence[int]] = None) -> ColoringResult:
    """Each vertex takes the smallest color that completes no monochromatic facet."""
    _check_facets(h)
    incident = _facets_by_vertex(h)
    order = list(order) if order is not None else sorted(range(h.n), key=lambda v: (-len(incident[v]), v))
    colors = [-1] * h.n
    for v in order:
        c = 0
        while _closes_monochromatic(v, c, incident[v], colors):
            c += 1
        colors[v] = c
    count = max(colors) + 1 if colors else 0
    return ColoringResult(colors=colors, count=count, mode="greedy")


def _search(order, incident, n, k, budget, nodes):
    colors = [-1] * n

    def place(pos: int, used: int) -> bool:
        if pos == len(order):
            return True
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceededError(f"coloring search exceeded {budget} nodes", nodes[0])
        v = order[pos]
        for c in range(min(k, used + 1)):
            if _closes_monochromatic(v, c, incident[v], colors):
                continue
            colors[v] = c
            if place(pos + 1, max(used, c + 1)):
                return True
            colors[v] = -1
        return False

    return colors if place(0, 0) else None


def chromatic_number(h: PartiteHypergraph, mode: str = "exact", budget: int = 2_000_000) -> ColoringResult:
    """
    Exact: backtracking over vertices by decreasing facet degree, the first
    vertex fixed to color 0 and new colors opened one at a time, for
    k = 1, 2, ... up to the greedy count. Greedy: an upper bound.
    """
    _check_facets(h)
    greedy = greedy_coloring(h)
    if mode == "greedy":
        return greedy
    if mode != "exact":
        raise PreconditionError(f"unknown coloring mode {mode!r}")
    if h.n > EXACT_MAX_VERTICES:
        raise PreconditionError(f"exact coloring is limited to {EXACT_MAX_VERTICES} vertices, got {h.n}")
    if h.n == 0:
        return ColoringResult(colors=[], count=0, mode="exact")
    incident = _facets_by_vertex(h)
    order = sorted(range(h.n), key=lambda v: (-len(incident[v]), v))
    nodes = [0]
    lower = 1
    try:
        for k in range(1, greedy.count):
            found = _search(order, incident, h.n, k, budget, nodes)
            if found is not None:
                return ColoringResult(colors=found, count=k, mode="exact",
                                      certificate=f"search exhausted at {k - 1} colors", nodes=nodes[0])
            lower = k + 1
    except BudgetExceededError as exc:
        raise BudgetExceededError(
            f"exact coloring stopped with {lower} <= chi <= {greedy.count}", exc.count) from None
    return ColoringResult(colors=greedy.colors, count=greedy.count, mode="exact",
                          certificate=f"search exhausted at {greedy.count - 1} colors", nodes=nodes[0])


def brute_force_chromatic(h: PartiteHypergraph) -> int:
    """Smallest k for which some of the k^n assignments is valid."""
    _check_facets(h)
    if h.n == 0:
        return 0
    for k in range(1, h.n + 1):
        for colors in itertools.product(range(k), repeat=h.n):
            if is_valid_coloring(h, colors):
                return k
    return h.n


@dataclass
class ChromaticBound:
    half_root: float
    proof_form: float
    empirical: float

    @property
    def best(self) -> float:
        return max(self.half_root, self.proof_form, self.empirical)

    @property
    def vacuous(self) -> bool:
        return self.best <= 1


def chromatic_lower_bound(r: int, q: int, d: int, lam_tildes: Sequence[float]) -> ChromaticBound:
    """
    Lower bounds on the chromatic number of a non-partite quotient:
    1/2 q^{1/2d}, (2d)^{-1/d} q^{1/2d} and delta^{-1/d} with delta the sum
    of the measured normalized eigenvalues.
    """
    if r != 1:
        raise PreconditionError(f"chromatic lower bound holds for non-partite quotients only, got r = {r}")
    half_root, proof_form = chromatic_bound_forms(q, d)
    delta = float(sum(lam_tildes))
    empirical = delta ** (-1 / d) if delta > 0 else math.inf
    out = ChromaticBound(half_root=half_root, proof_form=proof_form, empirical=empirical)
    if out.vacuous:
        logger.warning("chromatic lower bound %.4f is vacuous for q=%d d=%d", out.best, q, d)
    return out


def color_class_cover_check(cover: PartiteHypergraph, projection: Sequence[int], colors: Sequence[int]) -> CheckReport:
    """
    Lift a largest color class W of a valid base coloring to the cover: its
    type-i preimages W_i span no facet, so the discrepancy of (W_0, ...)
    equals prod |W_i| / |V_i|, and every |W_i| equals |W|.
    """
    counts: Dict[int, int] = {}
    for c in colors:
        counts[c] = counts.get(c, 0) + 1
    best = min(c for c, k in counts.items() if k == max(counts.values()))
    w = {g for g, c in enumerate(colors) if c == best}
    subsets = [[v for v in cls if projection[v] in w] for cls in cover.type_classes()]
    report = CheckReport(title="color-class-cover")
    report.check("empty-edge-set", edge_count(cover, subsets) == 0, edge_count(cover, subsets), 0,
                 anchor="chromatic-bound")
    sizes = [len(s) for s in subsets]
    report.check("fiber-sizes", all(s == len(w) for s in sizes), sizes, len(w), anchor="cover-fibers")
    _, exact = discrepancy(cover, subsets)
    product = Fraction(1)
    for s, cls in zip(subsets, cover.type_classes()):
        product *= Fraction(len(s), len(cls))
    report.check("disc-equals-product", exact == product, exact, product, anchor="chromatic-bound")
    return report
