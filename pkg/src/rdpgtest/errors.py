"""Exception types raised by the library.

Every error derives from :class:`RdpgTestError` so callers can catch the
whole family at once (the CLI maps them to exit code 1).
"""


class RdpgTestError(Exception):
    """Base class for all library errors."""


class InvalidLatentPositions(RdpgTestError):
    """Latent positions whose pairwise inner products leave [0, 1]."""


class NotPositiveSemidefinite(RdpgTestError):
    """A block probability matrix with a negative eigenvalue cannot be
    represented by inner products of real latent vectors."""


class ParseError(RdpgTestError):
    """Malformed input file.  Carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VertexOutOfRange(RdpgTestError):
    """Edge references a vertex label outside [0, n)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionTooLarge(RdpgTestError):
    """Requested embedding dimension exceeds the matrix size or rank."""


class EigSolverFailure(RdpgTestError):
    """The iterative eigensolver did not converge."""


class ZeroMatrix(RdpgTestError):
    """An operation that needs a nonzero matrix received an all-zero one."""


class RankDeficient(RdpgTestError):
    """The probability matrix has (numerically) fewer than d positive
    eigenvalues."""


class ShapeMismatch(RdpgTestError):
    """Two matrices that must share a shape do not."""


class DimensionMismatch(RdpgTestError):
    """Two embeddings that must share (n, d) do not."""


class SizeMismatch(RdpgTestError):
    """Two graphs that must share a vertex count do not."""


class VertexSetMismatch(RdpgTestError):
    """Two graph files that must describe the same labelled vertex set
    do not."""


class DegenerateGamma(RdpgTestError):
    """The d-th spectral gap of an adjacency matrix is not positive, so the
    test statistic denominator is undefined."""


class ZeroRow(RdpgTestError):
    """A row of an embedding has (numerically) zero norm, so it cannot be
    projected onto the unit sphere.  Carries the offending vertex index."""

    def __init__(self, index, norm=None):
        self.index = index
        detail = f" (norm {norm:.3g})" if norm is not None else ""
        super().__init__(f"row {index} has zero norm{detail}")


class InvalidThreshold(RdpgTestError):
    """Theoretical rejection thresholds must exceed 1."""


class BlockTooSmall(RdpgTestError):
    """A vertex partition block is too small to embed at the requested
    dimension."""
