"""Two-sample latent position tests.

Three null hypotheses about the latent positions X, Y of two random dot
product graphs on a common, aligned vertex set:

* identity: Y equals X up to an orthogonal transformation,
* scaling: Y equals c X up to an orthogonal transformation, some c > 0,
* diagonal: Y equals D X up to an orthogonal transformation, some positive
  diagonal D.

Each statistic is a ratio: an aligned distance between (transformed)
spectral embeddings over an estimate of its null-hypothesis ceiling, so
values at or above a threshold C > 1 reject at any level for n large
enough.  Critical values for finite n come either from that theoretical
region or from a parametric bootstrap that resamples graphs from the
estimated positions.  For graphs too large to resample whole, a partition
of the vertex set yields per-block bootstrap p-values combined by
Fisher's method.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import gammaln
from sklearn.base import BaseEstimator

from ._eigs import DENSE_SOLVER_LIMIT
from .alignment import frobenius_normalize, procrustes_distance, sphere_project
from .errors import (
    BlockTooSmall,
    DegenerateGamma,
    DimensionMismatch,
    InvalidThreshold,
    SizeMismatch,
)
from .graphs import Graph, sample_adjacency, _sample_edges_from_positions
from .rng import derive_seed, entropy_seed, generator
from .spectral import Embedding, _embed_matrix, ase, noise_constant

#: Most powerful valid theoretical threshold: the region is {t >= C}, C > 1.
DEFAULT_THRESHOLD = 1.0 + 1e-9


class TestKind(str, Enum):
    """Which null hypothesis a statistic targets."""

    __test__ = False  # not a pytest class

    IDENTITY = "identity"
    SCALING = "scaling"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class TestResult:
    """Outcome of a two-sample test.

    ``statistic`` is stored as exactly ``numerator / denominator``.
    ``p_value`` is present iff the method involved resampling; fragments
    produced by the ``statistic_*`` functions have no method yet.
    """

    __test__ = False  # not a pytest class

    kind: TestKind
    statistic: float
    numerator: float
    denominator: float
    dim: int
    method: str | None = None
    p_value: float | None = None
    rejected: bool | None = None
    replicates: np.ndarray | None = None
    bs: int | None = None
    blocks: int | None = None
    seed: int | None = None
    threshold: float | None = None
    alpha: float | None = None
    elapsed_ms: float | None = None

    def to_dict(self) -> dict:
        """The documented JSON schema of a test result."""
        return {
            "kind": self.kind.value,
            "statistic": self.statistic,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "p_value": self.p_value,
            "method": self.method,
            "rejected": self.rejected,
            "d": self.dim,
            "bs": self.bs,
            "R": self.blocks,
            "seed": self.seed,
            "elapsed_ms": self.elapsed_ms,
        }


def _check_same_shape(emb_a: Embedding, emb_b: Embedding):
    if emb_a.positions.shape != emb_b.positions.shape:
        raise DimensionMismatch(
            f"embeddings have shapes {emb_a.positions.shape} and "
            f"{emb_b.positions.shape}"
        )


def _gamma_scale(emb: Embedding) -> float:
    """sqrt(d / gamma2) from an embedding's source diagnostics."""
    gamma2 = emb.diagnostics.gamma2
    if gamma2 <= 0.0:
        raise DegenerateGamma(f"gamma2 = {gamma2:.3g} is not positive")
    return math.sqrt(emb.d / gamma2)


def _fragment(kind: TestKind, numerator: float, denominator: float, dim: int) -> TestResult:
    return TestResult(
        kind=kind,
        statistic=numerator / denominator,
        numerator=numerator,
        denominator=denominator,
        dim=dim,
    )


def statistic_identity(emb_a: Embedding, emb_b: Embedding) -> TestResult:
    """Statistic for equality up to an orthogonal transformation:
    aligned distance over sqrt(d/gamma2(A)) + sqrt(d/gamma2(B))."""
    _check_same_shape(emb_a, emb_b)
    numerator = procrustes_distance(emb_a.positions, emb_b.positions)
    denominator = _gamma_scale(emb_a) + _gamma_scale(emb_b)
    return _fragment(TestKind.IDENTITY, numerator, denominator, emb_a.d)


def statistic_scaling(emb_a: Embedding, emb_b: Embedding, *,
                      denominator: str = "gamma") -> TestResult:
    """Statistic for equality up to scaling: embeddings are normalized to
    unit Frobenius norm before alignment.

    ``denominator="noise"`` replaces each sqrt(d/gamma2) scale with the
    noise constant of the estimated positions (the sharper plug-in used
    for small dense graphs).
    """
    _check_same_shape(emb_a, emb_b)
    norm_a = float(np.linalg.norm(emb_a.positions))
    norm_b = float(np.linalg.norm(emb_b.positions))
    numerator = procrustes_distance(
        frobenius_normalize(emb_a.positions), frobenius_normalize(emb_b.positions)
    )
    if denominator == "noise":
        scale_a = noise_constant(emb_a.positions)
        scale_b = noise_constant(emb_b.positions)
    elif denominator == "gamma":
        scale_a = _gamma_scale(emb_a)
        scale_b = _gamma_scale(emb_b)
    else:
        raise ValueError(f"unknown denominator kind {denominator!r}")
    value = 2.0 * scale_a / norm_a + 2.0 * scale_b / norm_b
    return _fragment(TestKind.SCALING, numerator, value, emb_a.d)


def statistic_diagonal(emb_a: Embedding, emb_b: Embedding) -> TestResult:
    """Statistic for equality up to a positive diagonal transformation:
    rows are projected onto the unit sphere before alignment, and each
    scale is inflated by 1 / (smallest row norm)."""
    _check_same_shape(emb_a, emb_b)
    proj_a, norms_a = sphere_project(emb_a.positions)
    proj_b, norms_b = sphere_project(emb_b.positions)
    numerator = procrustes_distance(proj_a, proj_b)
    denominator = (
        2.0 * _gamma_scale(emb_a) / norms_a.min()
        + 2.0 * _gamma_scale(emb_b) / norms_b.min()
    )
    return _fragment(TestKind.DIAGONAL, numerator, denominator, emb_a.d)


_STATISTICS = {
    TestKind.IDENTITY: statistic_identity,
    TestKind.SCALING: statistic_scaling,
    TestKind.DIAGONAL: statistic_diagonal,
}


def compute_statistic(kind: TestKind, emb_a: Embedding, emb_b: Embedding, *,
                      denominator: str = "gamma") -> TestResult:
    """Dispatch to the statistic for ``kind``."""
    kind = TestKind(kind)
    if kind is TestKind.SCALING:
        return statistic_scaling(emb_a, emb_b, denominator=denominator)
    return _STATISTICS[kind](emb_a, emb_b)


def theoretical_decision(result: TestResult,
                         threshold: float = DEFAULT_THRESHOLD) -> TestResult:
    """Decide via the closed rejection region {t >= threshold}.

    Any threshold > 1 gives an asymptotically valid test; the default sits
    just above the infimum.
    """
    if threshold <= 1.0:
        raise InvalidThreshold(f"threshold must exceed 1, got {threshold}")
    return replace(
        result,
        method="theoretical",
        rejected=bool(result.statistic >= threshold),
        threshold=threshold,
    )


class _BootstrapSide:
    """Per-side precomputation for resampling graphs from estimated
    positions: the clipped probability matrix and, when the wanted
    eigenvalues are separated from the spectral bulk, a warm-start
    subspace for the embedding solver."""

    def __init__(self, positions: np.ndarray, dim: int, kind: TestKind,
                 denominator: str):
        self.positions = np.asarray(positions, dtype=np.float64)
        self.n = self.positions.shape[0]
        self.dim = dim
        self.kind = kind
        self.denominator = denominator
        self.dense = self.n <= DENSE_SOLVER_LIMIT
        self.hint = None
        self.probabilities = None
        if self.dense:
            self.probabilities = np.clip(self.positions @ self.positions.T, 0.0, 1.0)
            np.fill_diagonal(self.probabilities, 0.0)
            if kind is TestKind.IDENTITY:
                u, s, _ = np.linalg.svd(self.positions, full_matrices=False)
                max_expected_degree = self.probabilities.sum(axis=1).max()
                bulk = 2.0 * math.sqrt(max(max_expected_degree, 1.0))
                if s.size >= dim and s[dim - 1] ** 2 >= 3.0 * bulk:
                    self.hint = u[:, :dim]

    def _sample(self, rng: np.random.Generator):
        if self.dense:
            return sample_adjacency(self.probabilities, rng)
        edges = _sample_edges_from_positions(self.positions, rng, clip=True)
        return Graph(self.n, edges).sparse_adjacency()

    # Resampled statistics tolerate looser eigensolves: sigma errors around
    # 1e-9 move them by parts in 1e-10 while p-values resolve at 1/bs.
    _RESAMPLE_TOL = 1e-6

    def _embed(self, adjacency):
        if self.kind is TestKind.IDENTITY:
            positions, _, _ = _embed_matrix(
                adjacency, self.dim, want_diagnostics=False, hint=self.hint,
                tol=self._RESAMPLE_TOL,
            )
            return positions
        positions, spectrum, diag = _embed_matrix(
            adjacency, self.dim, tol=self._RESAMPLE_TOL
        )
        return Embedding(positions=positions, spectrum=spectrum, diagnostics=diag)

    def statistic(self, rep_seed: int) -> float:
        rng = generator(rep_seed)
        first = self._embed(self._sample(rng))
        second = self._embed(self._sample(rng))
        if self.kind is TestKind.IDENTITY:
            return procrustes_distance(first, second)
        return compute_statistic(
            self.kind, first, second, denominator=self.denominator
        ).statistic


def _bootstrap_distribution(positions, observed: float, bs: int, kind: TestKind,
                            dim: int, seed: int, denominator: str = "gamma"):
    if bs < 1:
        raise ValueError("bootstrap sample count must be at least 1")
    positions = np.asarray(positions, dtype=np.float64)
    if dim is None:
        dim = positions.shape[1]
    side = _BootstrapSide(positions, dim, TestKind(kind), denominator)
    values = np.empty(bs)
    for b in range(bs):
        values[b] = side.statistic(derive_seed(seed, b))
    count = int(np.count_nonzero(values >= observed))
    p = min(1.0, (count + 0.5) / bs)
    return p, values


def bootstrap_pvalue(positions, observed: float, bs: int, kind=TestKind.IDENTITY,
                     dim: int | None = None, seed: int = 0, *,
                     denominator: str = "gamma") -> float:
    """Parametric bootstrap p-value for an observed statistic.

    Resamples ``bs`` pairs of graphs from the estimated positions (inner
    products clipped to [0, 1]), recomputes the statistic for each pair,
    and returns the continuity-corrected upper-tail frequency
    ``(#{T_b >= observed} + 0.5) / bs`` clamped to 1.

    For the identity kind the resampled statistic is the raw aligned
    distance between the two bootstrap embeddings; for scaling and
    diagonal kinds it is the full normalized statistic.
    """
    p, _ = _bootstrap_distribution(
        positions, observed, bs, TestKind(kind), dim, seed, denominator
    )
    return p


def chi2_upper_tail(x: float, df: int) -> float:
    """Upper-tail probability of a chi-squared variable with even df.

    Uses the closed-form Poisson sum
    P(X >= x) = exp(-x/2) * sum_{j < df/2} (x/2)^j / j!, evaluated in log
    space; absolute error is far below 1e-12 over the usual range.
    """
    if df <= 0 or df % 2 != 0:
        raise ValueError(f"df must be a positive even integer, got {df}")
    if x < 0:
        raise ValueError("x must be nonnegative")
    half = 0.5 * x
    if half == 0.0:
        return 1.0
    j = np.arange(df // 2)
    log_terms = -half + j * math.log(half) - gammaln(j + 1)
    peak = log_terms.max()
    if peak == -math.inf:
        return 0.0
    value = math.exp(peak) * float(np.exp(log_terms - peak).sum())
    return min(1.0, max(0.0, value))


def fisher_statistic(p_values) -> float:
    """Fisher's combination statistic 2 * sum(log(1/p_r)); chi-squared with
    2R degrees of freedom under the null of independent uniform p-values."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        raise ValueError("need at least one p-value")
    if p.min() <= 0.0 or p.max() > 1.0:
        raise ValueError("p-values must lie in (0, 1]")
    return float(-2.0 * np.log(p).sum())


def two_sample_test(graph_a: Graph, graph_b: Graph, kind=TestKind.IDENTITY,
                    dim: int = 2, method: str = "theoretical", *,
                    bs: int = 200, blocks: int | None = None,
                    alpha: float = 0.05, threshold: float = DEFAULT_THRESHOLD,
                    denominator: str = "gamma",
                    seed: int | None = None) -> TestResult:
    """Run a two-sample latent position test on two aligned graphs.

    Parameters
    ----------
    graph_a, graph_b : Graph
        Graphs on the same vertex set (positional vertex correspondence).
    kind : TestKind or str
        Null hypothesis: "identity", "scaling" or "diagonal".
    dim : int
        Embedding dimension (assumed given).
    method : str
        "theoretical" (reject when the statistic reaches ``threshold``),
        "bootstrap" (parametric bootstrap from each side's estimated
        positions; the reported p-value is the maximum of the two sides),
        or "subgraph" (identity kind only; see
        :func:`subgraph_bootstrap`).
    bs : int
        Bootstrap sample count for the resampling methods.
    blocks : int
        Partition block count, required for the subgraph method.
    alpha : float
        Level used to set ``rejected`` for resampling methods.
    threshold : float
        Theoretical rejection threshold, must exceed 1.
    denominator : str
        "gamma" or "noise"; see :func:`statistic_scaling`.
    seed : int, optional
        Master seed (drawn from OS entropy when omitted and recorded in
        the result).
    """
    start = time.perf_counter()
    kind = TestKind(kind)
    if graph_a.n != graph_b.n:
        raise SizeMismatch(f"graphs have {graph_a.n} and {graph_b.n} vertices")
    if method == "subgraph":
        if kind is not TestKind.IDENTITY:
            raise ValueError("the subgraph method supports only the identity kind")
        if blocks is None:
            raise ValueError("the subgraph method requires a block count")
        return subgraph_bootstrap(
            graph_a, graph_b, dim=dim, blocks=blocks, bs=bs, seed=seed, alpha=alpha
        )

    emb_a = ase(graph_a, dim)
    emb_b = ase(graph_b, dim)
    fragment = compute_statistic(kind, emb_a, emb_b, denominator=denominator)

    if method == "theoretical":
        result = theoretical_decision(fragment, threshold)
    elif method == "bootstrap":
        if seed is None:
            seed = entropy_seed()
        observed = fragment.numerator if kind is TestKind.IDENTITY else fragment.statistic
        p_a, t_a = _bootstrap_distribution(
            emb_a.positions, observed, bs, kind, dim, derive_seed(seed, 0), denominator
        )
        p_b, t_b = _bootstrap_distribution(
            emb_b.positions, observed, bs, kind, dim, derive_seed(seed, 1), denominator
        )
        p = max(p_a, p_b)
        result = replace(
            fragment,
            method="bootstrap",
            p_value=p,
            rejected=bool(p <= alpha),
            replicates=np.concatenate([t_a, t_b]),
            bs=bs,
            seed=seed,
            alpha=alpha,
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return replace(result, elapsed_ms=(time.perf_counter() - start) * 1e3)


def subgraph_bootstrap(graph_a: Graph, graph_b: Graph, dim: int, blocks: int,
                       bs: int, seed: int | None = None,
                       alpha: float = 0.05) -> TestResult:
    """Identity test for large graphs via disjoint induced blocks.

    Embeds both full graphs once, partitions the vertices into ``blocks``
    near-equal blocks (seeded uniform shuffle, then contiguous slices),
    bootstraps each block's aligned distance on its own rows, and combines
    each side's block p-values with Fisher's method against a chi-squared
    upper tail with 2 * blocks degrees of freedom.  The reported p-value
    is the maximum over the two sides.
    """
    start = time.perf_counter()
    if graph_a.n != graph_b.n:
        raise SizeMismatch(f"graphs have {graph_a.n} and {graph_b.n} vertices")
    n = graph_a.n
    if blocks < 1:
        raise ValueError("block count must be at least 1")
    if n // blocks < dim + 2:
        raise BlockTooSmall(
            f"blocks of about {n // blocks} vertices cannot support "
            f"dimension {dim} (need at least {dim + 2})"
        )
    if seed is None:
        seed = entropy_seed()

    emb_a = ase(graph_a, dim)
    emb_b = ase(graph_b, dim)
    fragment = statistic_identity(emb_a, emb_b)

    order = generator(derive_seed(seed, 0)).permutation(n)
    base, extra = divmod(n, blocks)
    p_side_a, p_side_b = [], []
    offset = 0
    for r in range(blocks):
        size = base + (1 if r < extra else 0)
        members = order[offset : offset + size]
        offset += size
        rows_a = emb_a.positions[members]
        rows_b = emb_b.positions[members]
        observed = procrustes_distance(rows_a, rows_b)
        p_a, _ = _bootstrap_distribution(
            rows_a, observed, bs, TestKind.IDENTITY, dim, derive_seed(seed, 2 * r + 1)
        )
        p_b, _ = _bootstrap_distribution(
            rows_b, observed, bs, TestKind.IDENTITY, dim, derive_seed(seed, 2 * r + 2)
        )
        p_side_a.append(p_a)
        p_side_b.append(p_b)

    combined_a = chi2_upper_tail(fisher_statistic(p_side_a), 2 * blocks)
    combined_b = chi2_upper_tail(fisher_statistic(p_side_b), 2 * blocks)
    p = max(combined_a, combined_b)
    return replace(
        fragment,
        method="subgraph",
        p_value=p,
        rejected=bool(p <= alpha),
        bs=bs,
        blocks=blocks,
        seed=seed,
        alpha=alpha,
        elapsed_ms=(time.perf_counter() - start) * 1e3,
    )


def baseline_frobenius(graph_a: Graph, graph_b: Graph) -> float:
    """Frobenius norm of the adjacency difference,
    sqrt(2 * #{pairs whose edge indicators differ}).

    Included only as a comparison baseline: against alternatives whose
    probability matrix averages to 1/2 it is pure noise (the squared value
    is Binomial(n choose 2, 1/2) regardless of the other graph), so it is
    not consistent over a large class of alternatives.
    """
    if graph_a.n != graph_b.n:
        raise SizeMismatch(f"graphs have {graph_a.n} and {graph_b.n} vertices")
    differing = np.setxor1d(
        graph_a.edge_keys(), graph_b.edge_keys(), assume_unique=True
    ).size
    return math.sqrt(2.0 * differing)


class LatentPositionTest(BaseEstimator):
    """Scikit-learn style wrapper around :func:`two_sample_test`.

    Fit on a pair of graphs (or adjacency matrices): ``fit((A, B))``.

    Parameters mirror :func:`two_sample_test`; ``dim=None`` selects the
    embedding dimension automatically on each graph (profile-likelihood
    elbow of the top ``max_dim`` singular values) and uses the larger.

    Attributes
    ----------
    result_ : TestResult
    statistic_, numerator_, denominator_ : float
    p_value_ : float or None
    rejected_ : bool or None
    dim_ : int
    """

    def __init__(self, kind="identity", dim: int | None = None,
                 method: str = "bootstrap", bs: int = 200,
                 blocks: int | None = None, alpha: float = 0.05,
                 threshold: float = DEFAULT_THRESHOLD,
                 denominator: str = "gamma", seed: int | None = None,
                 max_dim: int = 20):
        self.kind = kind
        self.dim = dim
        self.method = method
        self.bs = bs
        self.blocks = blocks
        self.alpha = alpha
        self.threshold = threshold
        self.denominator = denominator
        self.seed = seed
        self.max_dim = max_dim

    @staticmethod
    def _as_graph(obj) -> Graph:
        return obj if isinstance(obj, Graph) else Graph.from_adjacency(obj)

    def fit(self, X, y=None):
        """Run the test on ``X = (graph_a, graph_b)``."""
        if len(X) != 2:
            raise ValueError("expected a pair (graph_a, graph_b)")
        graph_a = self._as_graph(X[0])
        graph_b = self._as_graph(X[1])
        dim = self.dim
        if dim is None:
            from .spectral import AdjacencySpectralEmbedding

            picker = AdjacencySpectralEmbedding(dim=None, max_dim=self.max_dim)
            dim = max(
                picker.fit(graph_a).dim_,
                picker.fit(graph_b).dim_,
            )
        self.result_ = two_sample_test(
            graph_a,
            graph_b,
            kind=self.kind,
            dim=dim,
            method=self.method,
            bs=self.bs,
            blocks=self.blocks,
            alpha=self.alpha,
            threshold=self.threshold,
            denominator=self.denominator,
            seed=self.seed,
        )
        self.dim_ = dim
        self.statistic_ = self.result_.statistic
        self.numerator_ = self.result_.numerator
        self.denominator_ = self.result_.denominator
        self.p_value_ = self.result_.p_value
        self.rejected_ = self.result_.rejected
        return self
