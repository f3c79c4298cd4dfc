"""Domain types and random graph generators.

A random dot product graph (RDPG) places each vertex i at a latent vector
X_i; an edge {i, j} appears independently with probability <X_i, X_j>.
Stochastic blockmodels (SBM) and their degree-corrected variant (DC-SBM)
are the special cases where rows of X take K fixed values, optionally
scaled per vertex.

All types are immutable after construction and safe to share across
threads.  Samplers are pure functions of (inputs, seed); parallel callers
must use distinct seeds derived via :func:`rdpgtest.rng.derive_seed`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidLatentPositions, NotPositiveSemidefinite
from .rng import generator

# Dense adjacency matrices are materialized on demand up to this size;
# larger graphs only ever use sparse paths.
DENSE_ADJACENCY_LIMIT = 20_000

_PROBABILITY_TOL = 1e-12
_PSD_TOL = 1e-10
_SAMPLE_BLOCK = 512


def _as_positions_array(positions) -> np.ndarray:
    if isinstance(positions, LatentPositions):
        return positions.matrix
    arr = np.asarray(positions, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"latent positions must be 2-D, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class LatentPositions:
    """An n x d matrix whose rows are per-vertex latent vectors.

    The model parameter of an RDPG.  Valid parameters have every pairwise
    inner product in [0, 1] and full column rank; :meth:`validate` enforces
    this.  Estimated positions (spectral embeddings) routinely violate the
    inner-product condition, so validation is explicit rather than implied
    by construction.
    """

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.float64))
        if arr.ndim != 2:
            raise ValueError(f"latent positions must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    def probability_matrix(self, clip: bool = False) -> np.ndarray:
        """The n x n edge probability matrix X X^T (diagonal included)."""
        p = self.matrix @ self.matrix.T
        if clip:
            np.clip(p, 0.0, 1.0, out=p)
        return p

    def validate(self, product_tol: float = _PROBABILITY_TOL, rank_tol: float | None = None):
        """Raise unless this is a valid RDPG parameter.

        Checks every off-diagonal inner product lies in
        [-product_tol, 1 + product_tol] and that the d-th singular value
        exceeds ``rank_tol`` (default: the usual eps-scaled cutoff).
        """
        _check_products_in_unit_interval(self.matrix, product_tol)
        s = np.linalg.svd(self.matrix, compute_uv=False)
        if rank_tol is None:
            rank_tol = max(self.n, self.d) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
        if s.size < self.d or s[-1] <= rank_tol:
            raise InvalidLatentPositions(
                f"latent positions are rank deficient (smallest singular value "
                f"{s[-1] if s.size else 0.0:.3g})"
            )
        return self


def _check_products_in_unit_interval(x: np.ndarray, tol: float):
    """Validate off-diagonal entries of X X^T against [0, 1], blockwise."""
    n = x.shape[0]
    for start in range(0, n, _SAMPLE_BLOCK):
        stop = min(start + _SAMPLE_BLOCK, n)
        block = x[start:stop] @ x.T
        rows = np.arange(start, stop)
        block[rows - start, rows] = 0.5  # ignore the diagonal
        low = block.min(initial=0.5)
        high = block.max(initial=0.5)
        if low < -tol or high > 1.0 + tol:
            bad = low if low < -tol else high
            raise InvalidLatentPositions(
                f"inner product {bad:.6g} outside [0, 1] (tolerance {tol:g})"
            )


@dataclass(frozen=True)
class Graph:
    """A simple undirected loop-free graph on vertices 0..n-1.

    Edges are stored as a canonically sorted (m, 2) integer array with
    i < j in every row.  A dense adjacency matrix is materialized on
    demand for n <= 20000; beyond that only the sparse representation is
    available.
    """

    n: int
    edges: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        edges = self.edges
        if edges is None:
            edges = np.empty((0, 2), dtype=np.int32)
        edges = np.asarray(edges)
        if edges.size == 0:
            edges = np.empty((0, 2), dtype=np.int32)
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise ValueError("edges must be an (m, 2) array")
        edges = edges.astype(np.int32, copy=True)
        if edges.shape[0]:
            if edges.min() < 0 or edges.max() >= self.n:
                raise ValueError("edge endpoint outside [0, n)")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            if np.any(lo == hi):
                raise ValueError("self-loops are not allowed")
            order = np.lexsort((hi, lo))
            edges = np.column_stack([lo[order], hi[order]])
            dup = (np.diff(edges[:, 0]) == 0) & (np.diff(edges[:, 1]) == 0)
            if np.any(dup):
                raise ValueError("duplicate edges are not allowed")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    @classmethod
    def from_adjacency(cls, a) -> "Graph":
        """Build a graph from a symmetric binary adjacency matrix."""
        if sp.issparse(a):
            coo = sp.triu(a, k=1).tocoo()
            edges = np.column_stack([coo.row, coo.col])
            return cls(a.shape[0], edges)
        arr = np.asarray(a)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("adjacency matrix must be square")
        rows, cols = np.nonzero(np.triu(arr, k=1))
        return cls(arr.shape[0], np.column_stack([rows, cols]))

    def dense_adjacency(self) -> np.ndarray:
        if self.n > DENSE_ADJACENCY_LIMIT:
            raise ValueError(
                f"dense adjacency refused for n={self.n} > {DENSE_ADJACENCY_LIMIT}; "
                "use sparse_adjacency()"
            )
        a = np.zeros((self.n, self.n), dtype=np.float64)
        if self.edge_count:
            a[self.edges[:, 0], self.edges[:, 1]] = 1.0
            a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def sparse_adjacency(self) -> sp.csr_matrix:
        i = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        j = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.ones(i.shape[0], dtype=np.float64)
        return sp.coo_matrix((data, (i, j)), shape=(self.n, self.n)).tocsr()

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edge_count:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def relabel(self, permutation) -> "Graph":
        """The graph with vertex i renamed to permutation[i]."""
        perm = np.asarray(permutation)
        return Graph(self.n, perm[self.edges]) if self.edge_count else Graph(self.n)

    def edge_keys(self) -> np.ndarray:
        """Each edge {i, j}, i < j, encoded as the integer i * n + j."""
        return self.edges[:, 0].astype(np.int64) * self.n + self.edges[:, 1]


@dataclass(frozen=True)
class BlockModelSpec:
    """Parameters of a (degree-corrected) stochastic blockmodel.

    ``block_probabilities`` is the K x K symmetric matrix of between-block
    edge probabilities.  Block membership comes either from ``pi`` (a
    length-K sampling distribution) or from a fixed assignment vector
    passed to the latent-position constructors.  ``degree_corrections``,
    when present, scales vertex i's latent vector by c_i > 0.
    """

    block_probabilities: np.ndarray
    pi: np.ndarray | None = None
    degree_corrections: np.ndarray | None = None

    def __post_init__(self):
        b = np.asarray(self.block_probabilities, dtype=np.float64)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("block probability matrix must be square")
        if not np.allclose(b, b.T, atol=1e-12):
            raise ValueError("block probability matrix must be symmetric")
        if b.min() < 0.0 or b.max() > 1.0:
            raise ValueError("block probabilities must lie in [0, 1]")
        b = 0.5 * (b + b.T)
        b.setflags(write=False)
        object.__setattr__(self, "block_probabilities", b)
        if self.pi is not None:
            pi = np.asarray(self.pi, dtype=np.float64)
            if pi.ndim != 1 or pi.shape[0] != b.shape[0]:
                raise ValueError("pi must have one entry per block")
            if pi.min() < 0.0 or abs(pi.sum() - 1.0) > 1e-12:
                raise ValueError("pi must be nonnegative and sum to 1")
            pi.setflags(write=False)
            object.__setattr__(self, "pi", pi)
        if self.degree_corrections is not None:
            c = np.asarray(self.degree_corrections, dtype=np.float64)
            if c.ndim != 1:
                raise ValueError("degree corrections must be a vector")
            if c.min() <= 0.0:
                raise ValueError("degree corrections must be strictly positive")
            c.setflags(write=False)
            object.__setattr__(self, "degree_corrections", c)

    @property
    def block_count(self) -> int:
        return self.block_probabilities.shape[0]


def sample_assignments(pi, n: int, seed: int) -> np.ndarray:
    """Draw n i.i.d. block labels from the distribution ``pi``."""
    pi = np.asarray(pi, dtype=np.float64)
    if pi.ndim != 1 or pi.size == 0:
        raise ValueError("pi must be a nonempty vector")
    if pi.min() < 0.0 or abs(pi.sum() - 1.0) > 1e-12:
        raise ValueError("pi must be nonnegative and sum to 1")
    if n == 0:
        return np.empty(0, dtype=np.int64)
    rng = generator(seed)
    return rng.choice(pi.size, size=n, p=pi).astype(np.int64)


def _block_vectors(block_probabilities: np.ndarray) -> np.ndarray:
    """Factor a PSD block matrix B into row vectors nu with
    <nu_k, nu_l> = B_kl exactly; eigenvalues in [-1e-10, 0] are dropped,
    anything more negative is rejected."""
    b = np.asarray(block_probabilities, dtype=np.float64)
    values, vectors = np.linalg.eigh(b)
    if values.min() < -_PSD_TOL:
        raise NotPositiveSemidefinite(
            f"block matrix has eigenvalue {values.min():.6g} < -{_PSD_TOL:g}; "
            "no inner-product representation exists"
        )
    keep = values > _PSD_TOL  # numerical zeros carry no probability mass
    order = np.argsort(-values[keep])
    values = values[keep][order]
    vectors = vectors[:, keep][:, order]
    return vectors * np.sqrt(values)


def _validated_assignments(assignments, block_count: int) -> np.ndarray:
    tau = np.asarray(assignments, dtype=np.int64)
    if tau.ndim != 1:
        raise ValueError("assignments must be a vector of block labels")
    if tau.size and (tau.min() < 0 or tau.max() >= block_count):
        raise ValueError(f"assignments must lie in [0, {block_count})")
    return tau


def sbm_latent_positions(spec, assignments) -> LatentPositions:
    """Latent positions of an SBM with fixed block assignments.

    ``spec`` may be a :class:`BlockModelSpec` or a bare block probability
    matrix.  The matrix must be positive semidefinite; block k's latent
    vector is the k-th row of V Lambda^(1/2) from its eigendecomposition,
    so reconstructed inner products match the block probabilities exactly.
    """
    b = spec.block_probabilities if isinstance(spec, BlockModelSpec) else np.asarray(spec, dtype=np.float64)
    nu = _block_vectors(b)
    tau = _validated_assignments(assignments, b.shape[0])
    return LatentPositions(nu[tau])


def dcsbm_latent_positions(spec, assignments, degree_corrections=None) -> LatentPositions:
    """Latent positions of a degree-corrected SBM: row i is c_i times the
    latent vector of block tau(i).

    Degree corrections come from the spec unless overridden.  Raises
    :class:`InvalidLatentPositions` when some c_i c_j B_(tau(i) tau(j))
    exceeds 1.
    """
    if isinstance(spec, BlockModelSpec):
        b = spec.block_probabilities
        if degree_corrections is None:
            degree_corrections = spec.degree_corrections
    else:
        b = np.asarray(spec, dtype=np.float64)
    if degree_corrections is None:
        raise ValueError("degree corrections are required")
    c = np.asarray(degree_corrections, dtype=np.float64)
    tau = _validated_assignments(assignments, b.shape[0])
    if c.shape != tau.shape:
        raise ValueError("degree corrections must have one entry per vertex")
    if c.min() <= 0.0:
        raise ValueError("degree corrections must be strictly positive")
    # Exact feasibility check via per-block maxima of c.
    kmax = np.zeros(b.shape[0])
    np.maximum.at(kmax, tau, c)
    worst = (np.outer(kmax, kmax) * b).max()
    if worst > 1.0 + _PROBABILITY_TOL:
        raise InvalidLatentPositions(
            f"degree corrections give edge probability {worst:.6g} > 1"
        )
    nu = _block_vectors(b)
    return LatentPositions(nu[tau] * c[:, None])


def _sample_edges_from_positions(x: np.ndarray, rng: np.random.Generator, clip: bool) -> np.ndarray:
    """Bernoulli-sample the upper triangle of X X^T, blockwise over rows.

    Returns an (m, 2) int32 edge array.  With ``clip=False`` any inner
    product outside [0, 1] (beyond tolerance) raises."""
    n = x.shape[0]
    chunks = []
    for start in range(0, n, _SAMPLE_BLOCK):
        stop = min(start + _SAMPLE_BLOCK, n)
        probs = x[start:stop] @ x[start:].T  # columns start..n-1 only
        local_rows = np.arange(stop - start)
        probs[local_rows, local_rows] = 0.5  # diagonal is never sampled or validated
        if clip:
            np.clip(probs, 0.0, 1.0, out=probs)
        else:
            lo, hi = probs.min(initial=0.0), probs.max(initial=0.0)
            if lo < -_PROBABILITY_TOL or hi > 1.0 + _PROBABILITY_TOL:
                bad = lo if lo < -_PROBABILITY_TOL else hi
                raise InvalidLatentPositions(
                    f"inner product {bad:.6g} outside [0, 1] "
                    f"(tolerance {_PROBABILITY_TOL:g})"
                )
        draws = rng.random(probs.shape)
        hit = draws < probs
        # keep strictly-upper pairs: global column index > global row index
        cols_from_diag = local_rows[:, None] >= np.arange(probs.shape[1])[None, :]
        hit &= ~cols_from_diag
        rows, cols = np.nonzero(hit)
        if rows.size:
            chunks.append(np.column_stack([rows + start, cols + start]).astype(np.int32))
    if not chunks:
        return np.empty((0, 2), dtype=np.int32)
    return np.concatenate(chunks, axis=0)


def sample_rdpg(positions, seed: int) -> Graph:
    """Sample an RDPG adjacency from latent positions.

    Each pair i < j is joined independently with probability
    <X_i, X_j>; a product outside [0, 1] (tolerance 1e-12) raises
    :class:`InvalidLatentPositions`.  Deterministic for a fixed seed.
    """
    x = _as_positions_array(positions)
    rng = generator(seed)
    edges = _sample_edges_from_positions(x, rng, clip=False)
    return Graph(x.shape[0], edges)


def sample_adjacency(probabilities: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Dense Bernoulli sample of a hollow symmetric adjacency matrix from a
    precomputed probability matrix (already clipped to [0, 1])."""
    n = probabilities.shape[0]
    draws = rng.random((n, n))
    upper = np.triu(draws < probabilities, k=1)
    return (upper | upper.T).astype(np.float64)
