"""
Pure simplicial complexes seen as d-uniform hypergraphs: clique complexes of
Cayley graphs, walls, the vertex-versus-wall bipartite graphs B_i and the
two-step multigraphs D_i.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from rama.core.errors import ParameterError, ParseError, PreconditionError

logger = logging.getLogger(__name__)

Facet = Tuple[int, ...]


@dataclass
class PartiteHypergraph:
    """
    d-uniform hypergraph on vertices 0..n-1. `types` holds tau(v) mod r when
    a type function is known; with r == d it is one-to-one on every facet.
    """
    d: int
    n: int
    facets: List[Facet]
    types: Optional[List[int]] = None
    r: int = 1
    purity_violations: int = 0
    _neighbors: Optional[List[List[int]]] = field(default=None, repr=False, compare=False)
    _classes: Optional[List[List[int]]] = field(default=None, repr=False, compare=False)
    _typed: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError("d must be >= 1")
        if self.types is not None and len(self.types) != self.n:
            raise ParameterError(f"type list has {len(self.types)} entries for {self.n} vertices")
        for f in self.facets:
            if len(f) != self.d or len(set(f)) != self.d:
                raise ParameterError(f"facet {f} does not have {self.d} distinct vertices")
            if min(f) < 0 or max(f) >= self.n:
                raise ParameterError(f"facet {f} references a vertex outside 0..{self.n - 1}")
        if self.has_full_types:
            for f in self.facets:
                if len({self.types[v] for v in f}) != self.d:
                    raise ParameterError(f"type function is not one-to-one on facet {f}")

    @property
    def has_full_types(self) -> bool:
        return self.types is not None and self.r == self.d

    @property
    def neighbors(self) -> List[List[int]]:
        """Sorted adjacency lists of the 1-skeleton."""
        if self._neighbors is None:
            nb = [set() for _ in range(self.n)]
            for f in self.facets:
                for a in f:
                    nb[a].update(f)
            for v in range(self.n):
                nb[v].discard(v)
            self._neighbors = [sorted(s) for s in nb]
        return self._neighbors

    def adjacency_matrix(self) -> sp.csr_matrix:
        rows, cols = [], []
        for v, nb in enumerate(self.neighbors):
            rows.extend([v] * len(nb))
            cols.extend(nb)
        data = np.ones(len(rows), dtype=np.float64)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def type_classes(self) -> List[List[int]]:
        """Vertices of each type 0..d-1."""
        if not self.has_full_types:
            raise PreconditionError("a full type function (r = d) is required")
        if self._classes is None:
            classes = [[] for _ in range(self.d)]
            for v, t in enumerate(self.types):
                classes[t].append(v)
            self._classes = classes
        return self._classes

    def typed_facets(self) -> np.ndarray:
        """Facets as an (m, d) array whose column j holds the type-j vertex."""
        if not self.has_full_types:
            raise PreconditionError("a full type function (r = d) is required")
        if self._typed is None:
            out = np.empty((len(self.facets), self.d), dtype=np.int64)
            for k, f in enumerate(self.facets):
                for v in f:
                    out[k, self.types[v]] = v
            self._typed = out
        return self._typed

    def structurally_equal(self, other: "PartiteHypergraph") -> bool:
        return (self.d, self.n, self.r, sorted(self.facets), self.types) == \
            (other.d, other.n, other.r, sorted(other.facets), other.types)


def enumerate_cliques(neighbors: Sequence[Sequence[int]], size: int) -> List[Facet]:
    """
    All cliques with exactly `size` vertices, each as an increasing tuple,
    in lexicographic order. Cliques grow only by larger common neighbours,
    so every clique is produced once.
    """
    if size < 1:
        raise ParameterError("clique size must be >= 1")
    nbr_sets = [set(nb) for nb in neighbors]
    out: List[Facet] = []

    def expand(base: Tuple[int, ...], candidates: List[int]):
        if len(base) == size:
            out.append(base)
            return
        for idx, u in enumerate(candidates):
            nu = nbr_sets[u]
            expand(base + (u,), [w for w in candidates[idx + 1:] if w in nu])

    for v in range(len(neighbors)):
        expand((v,), sorted(w for w in nbr_sets[v] if w > v))
    return out


def _count_impure(nbr_sets: List[set], d: int) -> int:
    """Number of maximal cliques whose size is not d."""
    bad = 0
    queue = deque(((v,), sorted(w for w in nbr_sets[v] if w > v)) for v in range(len(nbr_sets)))
    while queue:
        base, forward = queue.popleft()
        if len(base) > d:
            bad += 1
            continue
        if len(base) < d:
            common = set.intersection(*(nbr_sets[v] for v in base))
            if not common:
                bad += 1
        if len(base) <= d:
            for idx, u in enumerate(forward):
                nu = nbr_sets[u]
                queue.append((base + (u,), [w for w in forward[idx + 1:] if w in nu]))
    return bad


def clique_complex(
    neighbors: Sequence[Sequence[int]],
    d: int,
    types: Optional[Sequence[int]] = None,
    r: int = 1,
) -> PartiteHypergraph:
    """
    The complex whose facets are the d-cliques of a simple graph. Maximal
    cliques of any other size are counted as purity violations and logged.
    """
    for v, nb in enumerate(neighbors):
        if v in nb:
            raise ParameterError(f"graph has a loop at vertex {v}")
    facets = enumerate_cliques(neighbors, d)
    bad = _count_impure([set(nb) for nb in neighbors], d)
    if bad:
        logger.warning("clique complex is not pure: %d maximal cliques of size != %d", bad, d)
    logger.info("clique complex: %d vertices, %d facets (d=%d)", len(neighbors), len(facets), d)
    return PartiteHypergraph(
        d=d, n=len(neighbors), facets=facets,
        types=list(types) if types is not None else None, r=r,
        purity_violations=bad,
    )


@dataclass
class BipartiteIncidence:
    """
    Vertices of one type (left) against the walls missing that type (right).
    Edge k joins left[edges[k, 0]] and right[edges[k, 1]].
    """
    left: List[int]
    right: List[Facet]
    edges: np.ndarray

    @property
    def left_degrees(self) -> np.ndarray:
        return np.bincount(self.edges[:, 0], minlength=len(self.left))

    @property
    def right_degrees(self) -> np.ndarray:
        return np.bincount(self.edges[:, 1], minlength=len(self.right))

    @property
    def biregularity(self) -> Tuple[Optional[int], Optional[int]]:
        """(k, l) when left and right degrees are constant, None where they are not."""
        ld, rd = self.left_degrees, self.right_degrees
        k = int(ld[0]) if len(ld) and np.all(ld == ld[0]) else None
        l = int(rd[0]) if len(rd) and np.all(rd == rd[0]) else None
        return k, l

    def incidence_matrix(self) -> sp.csr_matrix:
        """N with N[v, w] = 1 when v lies on wall w."""
        data = np.ones(len(self.edges), dtype=np.float64)
        return sp.csr_matrix(
            (data, (self.edges[:, 0], self.edges[:, 1])),
            shape=(len(self.left), len(self.right)),
        )

    def adjacency_matrix(self) -> sp.csr_matrix:
        """Symmetric adjacency of the bipartite graph, left vertices first."""
        n = self.incidence_matrix()
        return sp.bmat([[None, n], [n.T, None]], format="csr")

    def as_hypergraph(self) -> PartiteHypergraph:
        """The graph as a 2-partite hypergraph: left vertices type 0, walls type 1."""
        nl = len(self.left)
        facets = [(int(a), nl + int(b)) for a, b in self.edges]
        types = [0] * nl + [1] * len(self.right)
        return PartiteHypergraph(d=2, n=nl + len(self.right), facets=facets, types=types, r=2)


def walls_and_incidence(h: PartiteHypergraph, i: int) -> Tuple[List[Facet], BipartiteIncidence]:
    """
    E_i = {F minus its type-i vertex}, deduplicated by sorted tuple, and the
    graph B_i whose edges are in bijection with the facets of h.
    """
    if not h.has_full_types:
        raise PreconditionError("walls need a full type function (r = d)")
    if not 0 <= i < h.d:
        raise ParameterError(f"type {i} out of range 0..{h.d - 1}")
    left = [v for v in range(h.n) if h.types[v] == i]
    left_index = {v: k for k, v in enumerate(left)}
    wall_index: Dict[Facet, int] = {}
    walls: List[Facet] = []
    edges = np.empty((len(h.facets), 2), dtype=np.int64)
    for k, f in enumerate(h.facets):
        v = next(x for x in f if h.types[x] == i)
        wall = tuple(sorted(x for x in f if x != v))
        w = wall_index.get(wall)
        if w is None:
            w = wall_index[wall] = len(walls)
            walls.append(wall)
        edges[k] = (left_index[v], w)
    inc = BipartiteIncidence(left=left, right=walls, edges=edges)
    logger.debug("B_%d: %d vertices, %d walls, biregularity %s", i, len(left), len(walls), inc.biregularity)
    return walls, inc


@dataclass
class MultiGraph:
    """Weighted adjacency on V_i counting paths of length 2 in B_i; loops on the diagonal."""
    vertices: List[int]
    weights: sp.csr_matrix

    @property
    def loops(self) -> np.ndarray:
        return np.asarray(self.weights.diagonal()).astype(np.int64)

    @property
    def row_sums(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel().astype(np.int64)


def is_type_regular(h: PartiteHypergraph) -> bool:
    """Every B_i is biregular."""
    if not h.has_full_types:
        return False
    for i in range(h.d):
        k, l = walls_and_incidence(h, i)[1].biregularity
        if k is None or l is None:
            return False
    return True


def bipartite_graph_hypergraph(graph: sp.spmatrix, sides: Sequence[int]) -> PartiteHypergraph:
    """A bipartite graph as a 2-partite hypergraph with types given by `sides` (0 or 1)."""
    coo = sp.triu(graph, k=1).tocoo()
    facets = [(int(a), int(b)) for a, b in zip(coo.row, coo.col)]
    return PartiteHypergraph(d=2, n=graph.shape[0], facets=facets, types=[int(s) for s in sides], r=2)


def two_step_multigraph(b: BipartiteIncidence) -> MultiGraph:
    n = b.incidence_matrix()
    return MultiGraph(vertices=list(b.left), weights=(n @ n.T).tocsr())


def write_complex(h: PartiteHypergraph, path: str) -> None:
    """RCX text: header, optional types line, facets sorted lexicographically."""
    with open(path, "w") as fh:
        fh.write(f"RCX d={h.d} n={h.n} r={h.r}\n")
        if h.types is not None:
            fh.write("types: " + " ".join(map(str, h.types)) + "\n")
        for f in sorted(tuple(sorted(f)) for f in h.facets):
            fh.write(" ".join(map(str, f)) + "\n")


def _parse_header(line: str) -> Dict[str, int]:
    parts = line.split()
    if not parts or parts[0] != "RCX":
        raise ParseError("missing 'RCX' header", line=1)
    values = {}
    for token in parts[1:]:
        key, sep, val = token.partition("=")
        if not sep or key not in ("d", "n", "r"):
            raise ParseError(f"bad header field {token!r}", line=1)
        try:
            values[key] = int(val)
        except ValueError:
            raise ParseError(f"bad header value {token!r}", line=1) from None
    if set(values) != {"d", "n", "r"}:
        raise ParseError("header needs d, n and r", line=1)
    return values


def read_complex(path: str) -> PartiteHypergraph:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = _parse_header(lines[0])
    d, n, r = header["d"], header["n"], header["r"]
    types = None
    facets: List[Facet] = []
    for lineno, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text:
            continue
        if text.startswith("types:"):
            if lineno != 2:
                raise ParseError("types line must follow the header", line=lineno)
            try:
                types = [int(t) for t in text[len("types:"):].split()]
            except ValueError:
                raise ParseError("non-integer type label", line=lineno) from None
            if len(types) != n:
                raise ParseError(f"{len(types)} type labels for {n} vertices", line=lineno)
            if any(not 0 <= t < r for t in types):
                raise ParseError(f"type label outside 0..{r - 1}", line=lineno)
            continue
        try:
            f = tuple(int(t) for t in text.split())
        except ValueError:
            raise ParseError("non-integer vertex index", line=lineno) from None
        if len(f) != d:
            raise ParseError(f"facet has {len(f)} vertices, expected {d}", line=lineno)
        if any(not 0 <= v < n for v in f):
            raise ParseError(f"vertex index out of range 0..{n - 1}", line=lineno)
        if len(set(f)) != d:
            raise ParseError("repeated vertex in facet", line=lineno)
        facets.append(f)
    try:
        return PartiteHypergraph(d=d, n=n, facets=facets, types=types, r=r)
    except ParameterError as exc:
        raise ParseError(str(exc)) from exc
