"""
Spectra of graph adjacency operators: full dense decompositions for small
graphs, the second eigenvalue with known top eigenvectors deflated for large
ones, and the spectral identities of bipartite vertex-versus-wall graphs.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from rama.building.cslattice import BuildingBall
from rama.complex.hypergraph import BipartiteIncidence, two_step_multigraph
from rama.core.errors import NumericError, ParameterError, PreconditionError
from rama.core.laurent import RelPosition
from rama.core.prng import SplitMix64
from rama.schema import CheckReport

logger = logging.getLogger(__name__)

DENSE_RESIDUAL = 1e-9
EIGEN_TOL = 1e-6
SYMMETRY_TOL = 1e-8
DENSE_REMAINDER = 64


@dataclass
class OperatorHandle:
    """
    A linear operator on R^dimension given by its matvec. `matrix` is kept
    when the operator came from an explicit (sparse or dense) matrix.
    """
    dimension: int
    matvec: Callable[[np.ndarray], np.ndarray]
    symmetric: bool = True
    matrix: Optional[Union[sp.spmatrix, np.ndarray]] = None

    @classmethod
    def from_matrix(cls, a, symmetric: bool = True) -> "OperatorHandle":
        if a.shape[0] != a.shape[1]:
            raise ParameterError(f"operator must be square, got shape {a.shape}")
        if sp.issparse(a):
            a = a.tocsr()
        else:
            a = np.asarray(a, dtype=np.float64)
        return cls(dimension=a.shape[0], matvec=lambda x: a @ x, symmetric=symmetric, matrix=a)

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix.toarray() if sp.issparse(self.matrix) else np.array(self.matrix, dtype=np.float64)
        cols = [self.matvec(e) for e in np.eye(self.dimension)]
        return np.array(cols, dtype=np.float64).T if cols else np.zeros((0, 0))

    def check_symmetry(self, trials: int = 4, seed: int = 7, tol: float = 1e-9) -> bool:
        """<Av, w> == <v, Aw> on seeded random vector pairs."""
        rng = SplitMix64(seed)
        for _ in range(trials):
            v = rng.noise_vector(self.dimension)
            w = rng.noise_vector(self.dimension)
            lhs = float(self.matvec(v) @ w)
            rhs = float(v @ self.matvec(w))
            if abs(lhs - rhs) > tol * max(1.0, abs(lhs)):
                return False
        return True


@dataclass
class Spectrum:
    """Eigenvalues in descending order; `vectors[:, k]` belongs to eigenvalues[k]."""
    eigenvalues: np.ndarray
    method: str
    residual: float
    vectors: Optional[np.ndarray] = field(default=None, repr=False)

    def to_csv(self) -> str:
        return "index,eigenvalue\n" + "".join(f"{k},{v:.12g}\n" for k, v in enumerate(self.eigenvalues))


def dense_spectrum(op: OperatorHandle, dense_threshold: int = 4096) -> Spectrum:
    if not op.symmetric:
        raise PreconditionError("dense_spectrum needs a symmetric operator")
    if op.dimension > dense_threshold:
        raise PreconditionError(f"dimension {op.dimension} exceeds the dense threshold {dense_threshold}")
    if op.dimension == 0:
        return Spectrum(eigenvalues=np.zeros(0), method="dense", residual=0.0, vectors=np.zeros((0, 0)))
    a = op.dense()
    w, v = scipy.linalg.eigh(a)
    scale = max(1.0, float(np.abs(a).max()))
    residual = float(np.abs(a @ v - v * w).max()) / scale
    if residual > DENSE_RESIDUAL:
        raise NumericError("dense eigendecomposition failed its reconstruction check", residual)
    order = np.argsort(w)[::-1]
    return Spectrum(eigenvalues=w[order], method="dense", residual=residual, vectors=v[:, order])


def constant_vector(n: int) -> np.ndarray:
    """Top eigenvector of a regular graph."""
    return np.ones(n) / np.sqrt(n) if n else np.zeros(0)


def trivial_vectors(types: Optional[Sequence[int]], r: int, n: int) -> List[np.ndarray]:
    """
    Real and imaginary parts of the characters t -> exp(2 pi i j t / r) of the
    type labels; on an r-partite regular graph they span the trivial eigenspace.
    """
    if r == 1 or types is None:
        return [constant_vector(n)]
    t = np.asarray(types, dtype=np.float64)
    out = []
    for j in range(r):
        angle = 2 * np.pi * j * t / r
        out.append(np.cos(angle))
        if np.abs(np.sin(angle)).max() > 1e-12:
            out.append(np.sin(angle))
    return out


def bipartite_top_vectors(side: np.ndarray, k1: int, k2: int) -> List[np.ndarray]:
    """
    sqrt(k1) 1_{V1} + sqrt(k2) 1_{V2} and sqrt(k1) 1_{V1} - sqrt(k2) 1_{V2},
    eigenvectors for +-sqrt(k1 k2) of a (k1, k2)-biregular bipartite graph.
    `side` is True on V1.
    """
    side = np.asarray(side, dtype=bool)
    plus = np.where(side, np.sqrt(k1), np.sqrt(k2)).astype(np.float64)
    minus = np.where(side, np.sqrt(k1), -np.sqrt(k2)).astype(np.float64)
    return [plus, minus]


def incidence_sides(b: BipartiteIncidence) -> np.ndarray:
    """Side mask matching BipartiteIncidence.adjacency_matrix (left vertices first)."""
    return np.concatenate([np.ones(len(b.left), dtype=bool), np.zeros(len(b.right), dtype=bool)])


def _orthonormal(vectors: Sequence[np.ndarray], n: int) -> np.ndarray:
    if not vectors:
        return np.zeros((n, 0))
    q, r = np.linalg.qr(np.column_stack(vectors))
    keep = np.abs(np.diag(r)) > 1e-12
    return q[:, keep]


def second_eigenvalue(
    op: OperatorHandle,
    exclude: Sequence[np.ndarray] = (),
    seed: int = 7,
    tol: float = EIGEN_TOL,
    maxiter: int = 5000,
    method: str = "auto",
) -> float:
    """
    Largest eigenvalue modulus of op on the orthogonal complement of
    `exclude`, computed on the deflated operator P A P.
    """
    if not op.symmetric:
        raise PreconditionError("second_eigenvalue needs a symmetric operator")
    if method not in ("auto", "dense", "iterative"):
        raise ParameterError(f"unknown method {method!r}")
    n = op.dimension
    q = _orthonormal(list(exclude), n)
    remaining = n - q.shape[1]
    if remaining <= 0:
        return 0.0

    def project(x: np.ndarray) -> np.ndarray:
        return x - q @ (q.T @ x)

    def deflated(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        return project(op.matvec(project(x)))

    if method == "dense" or (method == "auto" and remaining <= DENSE_REMAINDER):
        a = op.dense()
        p = np.eye(n) - q @ q.T
        w = scipy.linalg.eigh(p @ a @ p, eigvals_only=True)
        value = float(np.abs(w).max())
        logger.debug("second eigenvalue (dense, n=%d): %.12g", n, value)
        return value

    v0 = project(SplitMix64(seed).noise_vector(n))
    lo = LinearOperator((n, n), matvec=deflated, dtype=np.float64)
    try:
        vals, vecs = eigsh(lo, k=1, which="LM", v0=v0, tol=tol * 1e-3, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        residual = float("inf")
        if len(exc.eigenvalues):
            x = exc.eigenvectors[:, 0]
            residual = float(np.linalg.norm(deflated(x) - exc.eigenvalues[0] * x))
        raise NumericError(f"eigsh did not converge in {maxiter} iterations", residual) from exc
    lam, x = float(vals[0]), vecs[:, 0]
    residual = float(np.linalg.norm(deflated(x) - lam * x))
    if residual > tol * max(1.0, abs(lam)):
        raise NumericError("second eigenvalue residual above tolerance", residual)
    logger.info("second eigenvalue (iterative, n=%d): %.12g, residual %.2e", n, abs(lam), residual)
    return abs(lam)


def normalized_lambda(degrees: Union[BipartiteIncidence, Tuple[Optional[int], Optional[int]]], lam: float) -> float:
    """lambda / sqrt(k1 k2) for a (k1, k2)-biregular graph."""
    k1, k2 = degrees.biregularity if isinstance(degrees, BipartiteIncidence) else degrees
    if k1 is None or k2 is None:
        raise PreconditionError("normalized eigenvalue needs a biregular graph")
    if k1 == 0 or k2 == 0:
        raise PreconditionError("normalized eigenvalue needs positive degrees")
    return lam / float(np.sqrt(k1 * k2))


def incidence_lambda(b: BipartiteIncidence, seed: int = 7, maxiter: int = 5000, method: str = "auto") -> Tuple[float, float]:
    """(lambda, normalized lambda) of a biregular B_i with its two top eigenvectors deflated."""
    k1, k2 = b.biregularity
    if k1 is None or k2 is None:
        raise PreconditionError("B_i is not biregular")
    op = OperatorHandle.from_matrix(b.adjacency_matrix())
    lam = second_eigenvalue(op, bipartite_top_vectors(incidence_sides(b), k1, k2),
                            seed=seed, maxiter=maxiter, method=method)
    return lam, normalized_lambda((k1, k2), lam)


def spectrum_symmetry_check(spec: Spectrum, tol: float = SYMMETRY_TOL) -> Tuple[bool, float]:
    """Whether the eigenvalue multiset is symmetric about 0; also the largest mismatch."""
    w = np.sort(np.asarray(spec.eigenvalues, dtype=np.float64))
    if len(w) == 0:
        return True, 0.0
    mismatch = float(np.abs(w + w[::-1]).max())
    return mismatch <= tol, mismatch


def nn_transpose_check(b: BipartiteIncidence, tol: float = EIGEN_TOL, dense_threshold: int = 4096) -> Tuple[bool, float]:
    """Nonzero eigenvalues of N N^t are the squares of the positive eigenvalues of B_i."""
    spec_b = dense_spectrum(OperatorHandle.from_matrix(b.adjacency_matrix()), dense_threshold)
    spec_nn = dense_spectrum(OperatorHandle.from_matrix(two_step_multigraph(b).weights), dense_threshold)
    squares = np.sort(spec_b.eigenvalues[spec_b.eigenvalues > 1e-9] ** 2)
    nonzero = np.sort(spec_nn.eigenvalues[np.abs(spec_nn.eigenvalues) > 1e-9])
    if len(squares) != len(nonzero):
        return False, float("inf")
    mismatch = float(np.abs(squares - nonzero).max()) if len(squares) else 0.0
    return mismatch <= tol, mismatch


def top_eigenpair_check(b: BipartiteIncidence, dense_threshold: int = 4096) -> CheckReport:
    """lambda_1 = sqrt(k1 k2) with the explicit eigenvector in its eigenspace."""
    k1, k2 = b.biregularity
    if k1 is None or k2 is None:
        raise PreconditionError("top eigenpair check needs a biregular graph")
    report = CheckReport(title="top-eigenpair")
    spec = dense_spectrum(OperatorHandle.from_matrix(b.adjacency_matrix()), dense_threshold)
    expected = float(np.sqrt(k1 * k2))
    lam1 = float(spec.eigenvalues[0])
    report.check("lambda1", abs(lam1 - expected) <= EIGEN_TOL, lam1, expected, anchor="biregular-top-eigenvalue")
    f = bipartite_top_vectors(incidence_sides(b), k1, k2)[0]
    f = f / np.linalg.norm(f)
    top = spec.vectors[:, np.abs(spec.eigenvalues - lam1) <= EIGEN_TOL]
    cosine = float(np.linalg.norm(top.T @ f))
    report.check("top-eigenvector-cosine", cosine >= 1 - EIGEN_TOL, cosine, 1 - EIGEN_TOL,
                 anchor="biregular-top-eigenvalue")
    return report


def hecke_row_check(ball: BuildingBall, q: int, d: int) -> CheckReport:
    """
    Row of the center in the normalized two-step operator through the walls
    opposite it. It must put 1/(q+1) on the center and spread q/(q+1)
    uniformly over the vertices at relative position (0, 1, ..., 1, 2).
    The building is vertex-transitive, so checking at the center covers
    every vertex type.
    """
    if (ball.q, ball.d) != (q, d):
        raise ParameterError(f"ball was built for d={ball.d} q={ball.q}, not d={d} q={q}")
    if ball.radius < 2:
        raise PreconditionError("the center's star is only complete in a ball of radius >= 2")
    report = CheckReport(title="hecke-row")
    c = ball.center
    nbr = [set(x) for x in ball.neighbors]
    star = [f for f in ball.facets if c in f]
    k = len(star)
    counts: Dict[int, int] = {}
    bad_walls = 0
    for f in star:
        wall = [v for v in f if v != c]
        common = set.intersection(*(nbr[v] for v in wall)) if wall else set(range(len(ball.vertices)))
        completions = [x for x in common if x not in wall]
        if len(completions) != q + 1 or c not in completions:
            bad_walls += 1
        for x in completions:
            counts[x] = counts.get(x, 0) + 1
    report.check("wall-completions", bad_walls == 0, bad_walls, 0, anchor="wall-degree")

    total = Fraction(k * (q + 1))
    self_weight = Fraction(counts.get(c, 0)) / total
    report.check("self-weight", self_weight == Fraction(1, q + 1), self_weight, Fraction(1, q + 1),
                 anchor="two-step-hecke")

    wall_class = RelPosition.wall_class(d)
    target = {i for i, v in enumerate(ball.vertices) if v.relpos == wall_class}
    off_class = sorted({str(ball.vertices[x].relpos) for x in counts if x != c and x not in target})
    report.check("mass-on-wall-class", not off_class, ",".join(off_class) or "none", "none",
                 anchor="two-step-hecke")
    reached = {x for x in counts if x != c}
    report.check("wall-class-covered", reached == target, len(reached), len(target), anchor="two-step-hecke")
    if target:
        expected = Fraction(q, q + 1) / len(target)
        weights = {Fraction(counts.get(x, 0)) / total for x in target}
        report.check("uniform-weight", weights == {expected}, ",".join(map(str, sorted(weights))), expected,
                     anchor="two-step-hecke")
    report.note("hecke_degree", len(target))
    report.note("facets_at_center", k)
    return report
