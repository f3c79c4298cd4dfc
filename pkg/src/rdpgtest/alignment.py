"""Orthogonal alignment of embeddings.

Latent positions are identifiable only up to right-multiplication by an
orthogonal matrix, so comparisons minimize over that group: the
orthogonal Procrustes problem min_W ||X W - Y||_F, solved exactly by the
singular value decomposition of X^T Y.  Reflections are allowed (the
minimum is over the full orthogonal group, not just rotations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ShapeMismatch, ZeroMatrix, ZeroRow


@dataclass(frozen=True)
class ProcrustesSolution:
    """An orthogonal matrix ``rotation`` achieving ``distance`` =
    min_W ||X W - Y||_F.  Non-unique when X^T Y has repeated singular
    values; any minimizer is returned."""

    rotation: np.ndarray
    distance: float


def orthogonal_procrustes(x, y) -> ProcrustesSolution:
    """Solve min over orthogonal W of ||x W - y||_F.

    With the SVD x^T y = U S V^T, the minimizer is W = U V^T.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape != y.shape:
        raise ShapeMismatch(f"shapes {x.shape} and {y.shape} do not match")
    u, _, vt = scipy.linalg.svd(x.T @ y)
    rotation = u @ vt
    distance = float(np.linalg.norm(x @ rotation - y))
    return ProcrustesSolution(rotation=rotation, distance=distance)


def procrustes_distance(x, y) -> float:
    """The aligned Frobenius distance min_W ||x W - y||_F."""
    return orthogonal_procrustes(x, y).distance


def sphere_project(z, *, tol: float = 1e-10):
    """Project each row of ``z`` onto the unit sphere.

    Returns ``(projected, row_norms)``.  Raises :class:`ZeroRow` naming
    the first row whose norm is at or below ``tol``; callers relying on
    angular geometry must not silently perturb near-zero rows.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError("expected a 2-D array of row vectors")
    norms = np.linalg.norm(z, axis=1)
    small = np.flatnonzero(norms <= tol)
    if small.size:
        index = int(small[0])
        raise ZeroRow(index, norm=float(norms[index]))
    return z / norms[:, None], norms


def frobenius_normalize(z) -> np.ndarray:
    """Scale a matrix to unit Frobenius norm."""
    z = np.asarray(z, dtype=np.float64)
    norm = np.linalg.norm(z)
    if norm <= 0.0:
        raise ZeroMatrix("cannot normalize an all-zero matrix")
    return z / norm
