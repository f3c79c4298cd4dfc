"""Edge-list and latent-position file formats.

Edge list: UTF-8 text, one edge per line as two whitespace-separated
0-based vertex labels.  ``#`` starts a comment line; an optional header
line ``%n=<count>`` fixes the vertex count (otherwise n is one more than
the largest label seen).  Duplicate edge lines collapse to a single edge
and are counted.

Latent CSV: no header, n rows of d comma-separated decimal fields.
Both writers round-trip exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, VertexOutOfRange
from .graphs import Graph, LatentPositions


@dataclass(frozen=True)
class EdgeListResult:
    """A parsed edge list: the graph plus the number of duplicate edge
    lines that were collapsed."""

    graph: Graph
    duplicates: int


def read_edge_list(path) -> EdgeListResult:
    """Parse an edge-list file.

    Raises :class:`ParseError` (with the offending 1-based line number)
    for malformed lines or self-loops, and :class:`VertexOutOfRange` for
    labels that are negative or conflict with a ``%n=`` header.
    """
    declared_n = None
    pairs = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("%"):
            if not line.startswith("%n="):
                raise ParseError(f"unknown directive {line!r}", line=lineno)
            try:
                value = int(line[3:])
            except ValueError:
                raise ParseError(f"bad vertex count in {line!r}", line=lineno) from None
            if value < 0:
                raise ParseError("vertex count must be nonnegative", line=lineno)
            if declared_n is not None and value != declared_n:
                raise ParseError("conflicting %n= headers", line=lineno)
            declared_n = value
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected two vertex labels, got {line!r}", line=lineno)
        try:
            i, j = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"non-integer vertex label in {line!r}", line=lineno) from None
        if i < 0 or j < 0:
            raise VertexOutOfRange(f"negative vertex label in {line!r}", line=lineno)
        if declared_n is not None and (i >= declared_n or j >= declared_n):
            raise VertexOutOfRange(
                f"vertex label {max(i, j)} >= declared n={declared_n}", line=lineno
            )
        if i == j:
            raise ParseError(f"self-loop at vertex {i}", line=lineno)
        pairs.append((min(i, j), max(i, j)))

    n = declared_n
    if n is None:
        n = 1 + max((j for _, j in pairs), default=-1)
    unique = sorted(set(pairs))
    graph = Graph(n, np.asarray(unique, dtype=np.int64).reshape(-1, 2))
    return EdgeListResult(graph=graph, duplicates=len(pairs) - len(unique))


def write_edge_list(graph: Graph, path) -> None:
    """Write a graph in the edge-list format (deterministic byte output)."""
    lines = [f"%n={graph.n}"]
    lines.extend(f"{i} {j}" for i, j in graph.edges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_latent_csv(path) -> LatentPositions:
    """Parse a latent-position CSV (no header, comma-separated floats).

    The result is not validated as an RDPG parameter; call
    :meth:`LatentPositions.validate` if that is required.
    """
    rows = []
    width = None
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(
                f"expected {width} fields, got {len(fields)}", line=lineno
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", line=lineno) from None
    if not rows:
        raise ParseError("empty latent CSV", line=1)
    return LatentPositions(np.asarray(rows, dtype=np.float64))


def write_latent_csv(positions, path) -> None:
    """Write latent positions as CSV with full float64 round-trip
    precision."""
    matrix = positions.matrix if isinstance(positions, LatentPositions) else np.asarray(positions)
    lines = [",".join(f"{v:.17g}" for v in row) for row in matrix]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
