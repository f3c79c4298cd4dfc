"""Adjacency spectral embedding and spectral diagnostics.

The embedding of a symmetric matrix A into R^d takes the d eigenpairs of
largest eigenvalue magnitude (the spectrum of |A|) and returns
U |S|^(1/2).  For an adjacency matrix this estimates the latent positions
of the generating random dot product graph, up to an orthogonal
transformation.

The diagnostics delta (max row sum), gamma1 (minimum normalized top-d
eigengap) and gamma2 (normalized d-th gap) govern how accurate that
estimate is; ``noise_constant`` computes the limiting value of the
Frobenius estimation error for known latent positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._eigs import DENSE_SOLVER_LIMIT, fix_signs, top_abs_eigs
from .errors import DimensionTooLarge, RankDeficient, ZeroMatrix
from .graphs import Graph, LatentPositions

_BLOCK = 512


@dataclass(frozen=True)
class SpectralDiagnostics:
    """Spectral accuracy diagnostics of a symmetric nonnegative matrix.

    ``sigma`` holds the first d+1 singular values (descending); for a
    probability matrix ``delta`` is the maximum expected degree.  By
    construction gamma1 <= gamma2.
    """

    delta: float
    gamma1: float
    gamma2: float
    sigma: np.ndarray
    n: int
    d: int

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "sigma": [float(s) for s in self.sigma],
            "n": self.n,
            "d": self.d,
        }


@dataclass(frozen=True)
class Embedding:
    """A spectral embedding: positions U |S|^(1/2), the retained spectrum
    (eigenvalue magnitudes, descending), and diagnostics of the source
    matrix."""

    positions: np.ndarray
    spectrum: np.ndarray
    diagnostics: SpectralDiagnostics

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]


def _as_matrix(source):
    """Coerce a Graph or symmetric matrix to the form the solvers want."""
    if isinstance(source, Graph):
        if source.n <= DENSE_SOLVER_LIMIT:
            return source.dense_adjacency()
        return source.sparse_adjacency()
    if sp.issparse(source):
        return source.tocsr()
    arr = np.asarray(source, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square matrix or Graph")
    return arr


def _max_row_sum(matrix) -> float:
    if sp.issparse(matrix):
        return float(np.asarray(matrix.sum(axis=1)).ravel().max(initial=0.0))
    return float(matrix.sum(axis=1).max(initial=0.0))


def _gammas(sigma: np.ndarray, d: int, delta: float):
    gaps = sigma[:d] - sigma[1 : d + 1]
    return float(gaps.min() / delta), float(gaps[-1] / delta)


def _diagnostics_from_sigma(sigma: np.ndarray, d: int, delta: float, n: int) -> SpectralDiagnostics:
    if delta <= 0.0:
        raise ZeroMatrix("matrix has no nonzero entries (delta = 0)")
    padded = np.zeros(d + 1)
    padded[: sigma.size] = sigma[: d + 1]
    gamma1, gamma2 = _gammas(padded, d, delta)
    padded.setflags(write=False)
    return SpectralDiagnostics(delta=delta, gamma1=gamma1, gamma2=gamma2,
                               sigma=padded, n=n, d=d)


def _embed_matrix(matrix, dim: int, *, want_diagnostics: bool = True,
                  hint: np.ndarray | None = None, tol: float | None = None):
    """Shared embedding core.  Returns (positions, spectrum, diagnostics),
    with diagnostics None when not requested (saves one bulk eigenvalue)."""
    n = matrix.shape[0]
    if not 1 <= dim <= n:
        raise DimensionTooLarge(f"embedding dimension {dim} not in [1, {n}]")
    k = min(dim + 1, n) if want_diagnostics else dim
    solver_args = {} if tol is None else {"tol": tol}
    values, vectors = top_abs_eigs(matrix, k, hint=hint, **solver_args)
    spectrum = np.abs(values[:dim])
    if spectrum[0] <= 0.0:
        raise ZeroMatrix("cannot embed an all-zero matrix (empty graph)")
    if spectrum[-1] <= n * np.finfo(np.float64).eps * spectrum[0]:
        raise DimensionTooLarge(
            f"matrix rank is below the requested dimension {dim}"
        )
    positions = fix_signs(vectors[:, :dim]) * np.sqrt(spectrum)
    diagnostics = None
    if want_diagnostics:
        diagnostics = _diagnostics_from_sigma(
            np.abs(values), dim, _max_row_sum(matrix), n
        )
    spectrum.setflags(write=False)
    positions.setflags(write=False)
    return positions, spectrum, diagnostics


def ase(source, dim: int) -> Embedding:
    """Adjacency spectral embedding of a graph (or symmetric matrix).

    Eigenpairs are ranked by eigenvalue magnitude, so a large-magnitude
    negative eigenvalue can enter the top d.  The output is deterministic:
    each eigenvector's largest-magnitude entry is made positive.

    Parameters
    ----------
    source : Graph, ndarray or sparse matrix
        The graph to embed, or a symmetric matrix (e.g. an edge
        probability matrix) for the matrix-input variant.
    dim : int
        Embedding dimension, ``1 <= dim <= n``.

    Returns
    -------
    Embedding
        Positions, retained spectrum, and diagnostics of the source.
    """
    matrix = _as_matrix(source)
    positions, spectrum, diag = _embed_matrix(matrix, dim, want_diagnostics=True)
    return Embedding(positions=positions, spectrum=spectrum, diagnostics=diag)


def diagnostics(source, dim: int) -> SpectralDiagnostics:
    """Spectral diagnostics of a symmetric nonnegative matrix (or graph).

    delta is the maximum row sum; gamma1 the minimum of the first d
    normalized singular-value gaps; gamma2 the normalized d-th gap.
    Raises :class:`ZeroMatrix` when the matrix is identically zero.
    """
    matrix = _as_matrix(source)
    n = matrix.shape[0]
    if not 1 <= dim <= n:
        raise DimensionTooLarge(f"dimension {dim} not in [1, {n}]")
    minimum = matrix.data.min(initial=0.0) if sp.issparse(matrix) else matrix.min(initial=0.0)
    if minimum < -1e-12:
        raise ValueError("diagnostics require a nonnegative matrix")
    k = min(dim + 1, n)
    if sp.issparse(matrix) or n > DENSE_SOLVER_LIMIT:
        values, _ = top_abs_eigs(matrix, k)
        sigma = np.abs(values)
    else:
        sigma = np.sort(np.abs(np.linalg.eigvalsh(matrix)))[::-1][:k]
    return _diagnostics_from_sigma(sigma, dim, _max_row_sum(matrix), n)


def noise_constant(positions, *, clip: bool = True) -> float:
    """Limiting Frobenius error of the spectral embedding for given latent
    positions.

    For P = X X^T with top-d eigendecomposition U S U^T and
    D_ii = sum_{k != i} P_ik (1 - P_ik), returns
    sqrt(tr S^(-1/2) U^T D U S^(-1/2)).  Inner products outside [0, 1]
    (possible for estimated positions) are clipped before entering D.

    Raises :class:`RankDeficient` when the d-th eigenvalue of P is at or
    below 1e-12.
    """
    x = positions.matrix if isinstance(positions, LatentPositions) else np.asarray(positions, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("latent positions must be 2-D")
    n, d = x.shape
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    eigenvalues = s**2
    if eigenvalues.size < d or eigenvalues[-1] <= 1e-12:
        raise RankDeficient(
            f"d-th eigenvalue of the probability matrix is "
            f"{eigenvalues[-1] if eigenvalues.size else 0.0:.3g} <= 1e-12"
        )
    variance_row_sums = np.empty(n)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        probs = x[start:stop] @ x.T
        if clip:
            np.clip(probs, 0.0, 1.0, out=probs)
        rows = np.arange(start, stop)
        probs[rows - start, rows] = 0.0  # k != i
        variance_row_sums[start:stop] = (probs * (1.0 - probs)).sum(axis=1)
    weights = (u**2).T @ variance_row_sums  # (U^T D U)_jj
    return float(np.sqrt((weights / eigenvalues).sum()))


def dimension_select(values, max_dim: int | None = None) -> int:
    """Pick an embedding dimension from a scree of decreasing positive
    values.

    Fits, for every split point q, a two-piece Gaussian model (separate
    means, one pooled maximum-likelihood variance) and returns the split
    maximizing the profile log-likelihood.
    """
    scree = np.asarray(values, dtype=np.float64)
    if scree.ndim != 1 or scree.size < 2:
        raise ValueError("need at least two scree values")
    if scree.min() <= 0.0:
        raise ValueError("scree values must be positive")
    p = scree.size
    limit = p - 1 if max_dim is None else min(max_dim, p - 1)
    cum = np.cumsum(scree)
    cumsq = np.cumsum(scree**2)
    total, total_sq = cum[-1], cumsq[-1]
    splits = np.arange(1, limit + 1)
    ss_head = cumsq[splits - 1] - cum[splits - 1] ** 2 / splits
    tail_n = p - splits
    ss_tail = (total_sq - cumsq[splits - 1]) - (total - cum[splits - 1]) ** 2 / tail_n
    pooled = np.maximum(ss_head + ss_tail, 0.0) / p
    log_likelihood = -0.5 * p * np.log(np.maximum(pooled, 1e-300))
    return int(splits[np.argmax(log_likelihood)])


@dataclass(frozen=True)
class AssumptionCheck:
    """Report on the eigengap and density conditions an embedding-based
    test relies on.  Both checks are advisory: callers may proceed with
    warnings when they fail."""

    gamma1_ok: bool
    delta_ok: bool
    gamma1_margin: float
    delta_margin: float
    gamma1_floor: float
    delta_threshold: float
    n: int
    d: int

    @property
    def ok(self) -> bool:
        return self.gamma1_ok and self.delta_ok

    def to_dict(self) -> dict:
        return {
            "gamma1_ok": self.gamma1_ok,
            "delta_ok": self.delta_ok,
            "gamma1_margin": self.gamma1_margin,
            "delta_margin": self.delta_margin,
            "gamma1_floor": self.gamma1_floor,
            "delta_threshold": self.delta_threshold,
            "n": self.n,
            "d": self.d,
        }


def check_assumption1(diag: SpectralDiagnostics, n: int | None = None, *,
                      gamma1_floor: float = 0.01,
                      delta_exponent: float = 0.01) -> AssumptionCheck:
    """Check that gamma1 is bounded away from zero and that delta exceeds
    (log n)^(2 + delta_exponent).

    Adjacency-based diagnostics are consistent estimates of the
    probability-matrix quantities, so the check may be run on either.
    """
    if n is None:
        n = diag.n
    threshold = float(np.log(n) ** (2.0 + delta_exponent)) if n > 1 else 0.0
    return AssumptionCheck(
        gamma1_ok=diag.gamma1 >= gamma1_floor,
        delta_ok=diag.delta > threshold,
        gamma1_margin=diag.gamma1 - gamma1_floor,
        delta_margin=diag.delta - threshold,
        gamma1_floor=gamma1_floor,
        delta_threshold=threshold,
        n=n,
        d=diag.d,
    )


class AdjacencySpectralEmbedding(BaseEstimator):
    """Scikit-learn style transformer computing the adjacency spectral
    embedding of a single graph.

    Parameters
    ----------
    dim : int or None
        Embedding dimension.  ``None`` selects it automatically from the
        scree of the top ``max_dim`` singular values via the two-piece
        Gaussian profile likelihood.
    max_dim : int
        Scree length used for automatic selection.

    Attributes
    ----------
    embedding_ : ndarray of shape (n, dim_)
        Estimated latent positions.
    spectrum_ : ndarray
        Retained eigenvalue magnitudes, descending.
    diagnostics_ : SpectralDiagnostics
        Diagnostics of the embedded matrix.
    dim_ : int
        The dimension actually used.
    """

    def __init__(self, dim: int | None = None, max_dim: int = 20):
        self.dim = dim
        self.max_dim = max_dim

    def fit(self, X, y=None):
        matrix = _as_matrix(X)
        dim = self.dim
        if dim is None:
            k = min(matrix.shape[0], self.max_dim + 1)
            if k < 2:
                dim = 1
            else:
                values, _ = top_abs_eigs(matrix, k)
                sigma = np.abs(values)
                sigma = sigma[sigma > 0.0]
                dim = 1 if sigma.size < 2 else dimension_select(sigma)
        positions, spectrum, diag = _embed_matrix(matrix, dim, want_diagnostics=True)
        self.embedding_ = positions
        self.spectrum_ = spectrum
        self.diagnostics_ = diag
        self.dim_ = dim
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_

    def transform(self, X=None):
        """Return the fitted embedding (the method is transductive: it
        cannot embed unseen graphs)."""
        if not hasattr(self, "embedding_"):
            raise NotFittedError("call fit before transform")
        return self.embedding_
