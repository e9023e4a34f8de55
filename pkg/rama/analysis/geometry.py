"""
Metric checks on quotient graphs: ball growth against the building,
injectivity radius, diameter and bipartiteness.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from rama.core.errors import DomainError, PreconditionError
from rama.schema import BOUND_SLACK, CheckReport, RadiusReport

logger = logging.getLogger(__name__)


def bfs_distances(graph: sp.spmatrix, source: int = 0) -> np.ndarray:
    """Hop distances from source; -1 where unreachable."""
    dist = csgraph.shortest_path(graph, directed=False, unweighted=True, indices=source)
    return np.where(np.isinf(dist), -1, dist).astype(np.int64)


def ball_sizes(graph: sp.spmatrix, source: int, max_radius: int) -> List[int]:
    dist = bfs_distances(graph, source)
    reached = dist[dist >= 0]
    counts = np.bincount(reached, minlength=max_radius + 1)[:max_radius + 1]
    return np.cumsum(counts).tolist()


def tree_ball_sizes(q: int, max_radius: int) -> List[int]:
    """Balls of the (q+1)-regular tree: 1 + (q+1)(q^r - 1)/(q - 1)."""
    return [1 + (q + 1) * (q ** r - 1) // (q - 1) for r in range(max_radius + 1)]


def girth_lower_bounds(q: int, d: int, e: int, order: int) -> Dict[str, float]:
    """
    Lower bounds for the minimal displacement (e/d, and log_q|X|/((d-1)(d^2-1))
    which follows from it) and for the injectivity radius.
    """
    log_x = math.log(order, q)
    denom = (d - 1) * (d * d - 1)
    return {
        "displacement": e / d,
        "displacement_from_order": log_x / denom,
        "radius": log_x / (2 * denom) - 0.5,
    }


def injectivity_radius(
    graph: sp.spmatrix,
    building_sizes: Sequence[int],
    source: int = 0,
    q: Optional[int] = None,
    d: Optional[int] = None,
    e: Optional[int] = None,
) -> RadiusReport:
    """
    Largest r with |B_X(source, r)| = |B_building(x_0, r)|. On a Cayley
    graph one source represents every vertex.
    """
    max_radius = len(building_sizes) - 1
    sizes = ball_sizes(graph, source, max_radius)
    sizes += [sizes[-1]] * (max_radius + 1 - len(sizes))
    measured = -1
    for r in range(max_radius + 1):
        if sizes[r] > building_sizes[r]:
            raise DomainError(f"quotient ball of radius {r} is larger than the building ball")
        if sizes[r] != building_sizes[r]:
            break
        measured = r
    if measured == max_radius:
        raise PreconditionError(f"balls agree up to the oracle radius {max_radius}; extend the building oracle")
    order = graph.shape[0]
    bounds = girth_lower_bounds(q, d, e, order) if None not in (q, d, e) else {}
    logger.info("injectivity radius %d (ball sizes %s vs building %s)", measured, sizes, list(building_sizes))
    return RadiusReport(
        measured_radius=measured,
        building_sizes=list(building_sizes),
        quotient_sizes=sizes,
        order=order,
        radius_lower_bound=bounds.get("radius"),
        displacement_lower_bound=bounds.get("displacement"),
        displacement_from_radius=2 * measured + 1,
    )


def graph_diameter(graph: sp.spmatrix, vertex_transitive: bool = True) -> int:
    """Eccentricity of vertex 0 when vertex-transitive, else the maximum over all sources."""
    n = graph.shape[0]
    if n == 0:
        raise DomainError("empty graph has no diameter")
    sources = [0] if vertex_transitive else list(range(n))
    best = 0
    for s in sources:
        dist = bfs_distances(graph, s)
        if np.any(dist < 0):
            raise DomainError("graph is disconnected")
        best = max(best, int(dist.max()))
    return best


def diameter_check(
    graph: sp.spmatrix,
    lam1: float,
    lam: float,
    bipartite: bool,
    vertex_transitive: bool = True,
    log_form: bool = False,
) -> CheckReport:
    """
    diam <= ceil(log(n-1) / log(lam1/lam)), plus one for bipartite graphs,
    where lam is the largest nontrivial eigenvalue modulus. With `log_form`
    the quotient form diam <= log(n) / log(lam1/lam) is asserted as well;
    it does not hold for every small graph (C_6 gives 2.58 < 3).
    """
    n = graph.shape[0]
    diam = graph_diameter(graph, vertex_transitive)
    report = CheckReport(title="diameter")
    report.note("diameter", diam)
    if lam <= 0 or lam >= lam1 or n < 2:
        report.note("diameter_bound", "not applicable")
        return report
    ratio = math.log(lam1 / lam)
    bound = math.ceil(math.log(n - 1) / ratio - 1e-12) + (1 if bipartite else 0)
    log_ratio = math.log(n) / ratio
    report.note("log_ratio_value", log_ratio)
    report.check("diameter", diam <= bound, diam, bound, anchor="spectral-diameter")
    if log_form:
        report.check("diameter-log-ratio", diam <= log_ratio + BOUND_SLACK, diam, log_ratio,
                     anchor="quotient-diameter")
    return report


@dataclass
class BipartitenessResult:
    bipartite: bool
    sides: Optional[np.ndarray] = None
    witness: Optional[List[int]] = None


def _path_to_root(v: int, pred: np.ndarray) -> List[int]:
    path = [v]
    while pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    return path


def bipartiteness_check(graph: sp.spmatrix) -> BipartitenessResult:
    """
    BFS 2-coloring per connected component. A non-bipartite graph yields an
    odd closed walk (first vertex repeated at the end) through the BFS tree.
    """
    n = graph.shape[0]
    graph = sp.csr_matrix(graph)
    _, labels = csgraph.connected_components(graph, directed=False)
    depth = np.full(n, -1, dtype=np.int64)
    pred = np.full(n, -9999, dtype=np.int64)
    for comp in np.unique(labels):
        root = int(np.flatnonzero(labels == comp)[0])
        order, p = csgraph.breadth_first_order(graph, root, directed=False, return_predecessors=True)
        depth[root] = 0
        pred[root] = -1
        for v in order[1:]:
            pred[v] = p[v]
            depth[v] = depth[p[v]] + 1
    coo = graph.tocoo()
    clash = np.flatnonzero((depth[coo.row] % 2) == (depth[coo.col] % 2))
    if len(clash) == 0:
        return BipartitenessResult(bipartite=True, sides=(depth % 2).astype(np.int64))
    u, v = int(coo.row[clash[0]]), int(coo.col[clash[0]])
    pu, pv = _path_to_root(u, pred), _path_to_root(v, pred)
    on_v = set(pv)
    lca = next(x for x in pu if x in on_v)
    up = pu[:pu.index(lca) + 1]
    down = pv[:pv.index(lca)]
    # lca -> ... -> u -> v -> ... -> lca, odd since depth(u) and depth(v) share parity
    witness = list(reversed(up)) + down + [lca]
    logger.debug("odd closed walk of length %d through %d", len(witness) - 1, lca)
    return BipartitenessResult(bipartite=False, witness=witness)
