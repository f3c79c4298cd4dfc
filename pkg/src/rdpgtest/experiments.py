"""Monte Carlo power studies for the two-sample tests.

Four built-in scenarios:

* ``table1`` — identity test between a two-block SBM and a
  diagonally-shifted copy, over a grid of sizes and shifts,
* ``table2`` — the same models under the scaling test,
* ``community`` — identity test detecting a small community emerging in
  an 800-vertex two-block graph,
* ``dcsbm`` — diagonal test on degree-corrected blockmodels, comparing a
  diagonally-equivalent pair (null) and a genuinely different pair
  (alternative).

Every cell of every grid is exactly reproducible from (scenario, master
seed): replicate seeds derive from the cell parameters and replicate
index, never from scheduling order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed

from .errors import VertexSetMismatch
from .graph_io import read_edge_list
from .graphs import dcsbm_latent_positions, sample_assignments, sample_rdpg, sbm_latent_positions
from .rng import derive_seed, generator
from .spectral import ase
from .testing import (
    DEFAULT_THRESHOLD,
    TestKind,
    TestResult,
    _bootstrap_distribution,
    compute_statistic,
    two_sample_test,
)

#: Two-block base model for the power tables; the shifted variant adds
#: epsilon to the within-block probability.
TABLE_BASE_BLOCKS = np.array([[0.5, 0.2], [0.2, 0.5]])
TABLE_PI = (0.4, 0.6)

#: Community scenario: 800 vertices, two blocks of 400 before the change.
COMMUNITY_N = 800
COMMUNITY_BEFORE = np.array([[0.34, 0.25], [0.25, 0.25]])
COMMUNITY_AFTER = np.array(
    [[0.34, 0.25, 0.16], [0.25, 0.25, 0.25], [0.16, 0.25, 0.34]]
)

#: Degree-corrected scenario matrices.  DCSBM_DIAGONAL equals
#: diag(1.2, 0.8) @ DCSBM_BASE @ diag(1.2, 0.8), so the (base, diagonal)
#: pair satisfies the diagonal null; (base, distinct) does not.
DCSBM_BASE = np.array([[0.5, 0.2], [0.2, 0.5]])
DCSBM_DISTINCT = np.array([[0.7, 0.2], [0.2, 0.7]])
DCSBM_DIAGONAL = np.array([[0.72, 0.192], [0.192, 0.32]])
DCSBM_CORRECTION_RANGE = (0.2, 1.0)

_SCENARIO_DEFAULTS = {
    "table1": {"ns": (100, 200, 500, 1000), "epsilons": (0.0, 0.05, 0.1, 0.2)},
    "table2": {"ns": (100, 200, 500, 1000), "epsilons": (0.0, 0.1, 0.2, 0.4)},
    "community": {"ns": (COMMUNITY_N,), "epsilons": (0, 4, 8, 12, 16)},
    "dcsbm": {"ns": (200, 4000), "epsilons": (0.0, 1.0)},
}


def shifted_blocks(epsilon: float) -> np.ndarray:
    """The table scenarios' alternative: base blocks with the within-block
    probability raised by epsilon."""
    return TABLE_BASE_BLOCKS + epsilon * np.eye(2)


def community_sizes(n3: int) -> tuple[int, int, int]:
    """Block sizes after a community of size ``n3`` emerges: the new block
    draws n3/2 vertices from each original block, keeping n = 800."""
    if n3 < 0 or n3 % 2 != 0:
        raise ValueError(f"community size must be a nonnegative even integer, got {n3}")
    half = n3 // 2
    if half > COMMUNITY_N // 2:
        raise ValueError("community larger than the graph")
    return (COMMUNITY_N // 2 - half, COMMUNITY_N // 2 - half, n3)


@dataclass(frozen=True)
class ScenarioConfig:
    """Settings for one scenario run.

    ``epsilons`` holds the scenario's sweep parameter: the probability
    shift for the tables, the community size for ``community``, and the
    pair selector (0 = diagonally-equivalent null, 1 = distinct
    alternative) for ``dcsbm``.  ``None`` fields take scenario defaults.
    """

    scenario: str
    ns: tuple[int, ...] | None = None
    epsilons: tuple[float, ...] | None = None
    replicates: int = 200
    bs: int = 100
    alpha: float = 0.05
    seed: int = 0
    methods: tuple[str, ...] = ("bootstrap", "theoretical")
    dim: int | None = None
    pi: tuple[float, ...] = TABLE_PI
    n_jobs: int = 1

    def __post_init__(self):
        if self.scenario not in ("table1", "table2", "community", "dcsbm", "custom"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    def resolved(self, field: str):
        value = getattr(self, field)
        if value is not None:
            return value
        return _SCENARIO_DEFAULTS.get(self.scenario, {}).get(field)


@dataclass(frozen=True)
class PowerCell:
    """One grid cell: the rejection frequency of a method at (n, epsilon),
    with its Monte Carlo standard error sqrt(p (1 - p) / replicates)."""

    n: int
    epsilon: float
    method: str
    power: float
    replicates: int
    se: float
    rejections: int


@dataclass(frozen=True)
class StatisticSample:
    """One observed statistic value, for density plots."""

    scenario: str
    param: str
    replicate: int
    statistic: float


class ScenarioRun(NamedTuple):
    cells: list[PowerCell]
    samples: list[StatisticSample]


def _make_cell(n, epsilon, method, flags, replicates) -> PowerCell:
    rejections = int(np.count_nonzero(flags))
    power = rejections / replicates
    return PowerCell(
        n=int(n),
        epsilon=float(epsilon),
        method=method,
        power=power,
        replicates=replicates,
        se=float(np.sqrt(power * (1.0 - power) / replicates)),
        rejections=rejections,
    )


def _epsilon_key(value: float) -> int:
    return int(round(float(value) * 1_000_000))


def _map_replicates(fn, seeds, n_jobs: int):
    if n_jobs == 1:
        return [fn(s) for s in seeds]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(s) for s in seeds)


def _paired_test_replicate(positions_a, positions_b, kind, dim, bs, alpha,
                           methods, rep_seed, denominator="gamma"):
    """Sample one graph from each latent matrix and test; returns the
    per-method rejection flags plus the observed normalized statistic."""
    graph_a = sample_rdpg(positions_a, derive_seed(rep_seed, 1))
    graph_b = sample_rdpg(positions_b, derive_seed(rep_seed, 2))
    emb_a = ase(graph_a, dim)
    emb_b = ase(graph_b, dim)
    fragment = compute_statistic(kind, emb_a, emb_b, denominator=denominator)
    decisions = {}
    if "theoretical" in methods:
        decisions["theoretical"] = bool(fragment.statistic >= DEFAULT_THRESHOLD)
    if "bootstrap" in methods:
        observed = fragment.numerator if kind is TestKind.IDENTITY else fragment.statistic
        p_a, _ = _bootstrap_distribution(
            emb_a.positions, observed, bs, kind, dim, derive_seed(rep_seed, 3), denominator
        )
        p_b, _ = _bootstrap_distribution(
            emb_b.positions, observed, bs, kind, dim, derive_seed(rep_seed, 4), denominator
        )
        decisions["bootstrap"] = bool(max(p_a, p_b) <= alpha)
    return decisions, fragment.statistic


def _run_table(config: ScenarioConfig, kind: TestKind) -> ScenarioRun:
    ns = config.resolved("ns")
    epsilons = config.resolved("epsilons")
    dim = config.dim if config.dim is not None else 2
    pi = np.asarray(config.pi, dtype=np.float64)
    cells: list[PowerCell] = []
    samples: list[StatisticSample] = []

    def replicate(rep_seed, n, eps):
        assignments = sample_assignments(pi, n, derive_seed(rep_seed, 0))
        x = sbm_latent_positions(TABLE_BASE_BLOCKS, assignments)
        y = sbm_latent_positions(shifted_blocks(eps), assignments)
        return _paired_test_replicate(
            x, y, kind, dim, config.bs, config.alpha, config.methods, rep_seed
        )

    for n in ns:
        for eps in epsilons:
            cell_seed = derive_seed(config.seed, int(n), _epsilon_key(eps))
            seeds = [derive_seed(cell_seed, r) for r in range(config.replicates)]
            results = _map_replicates(
                lambda s, n=n, eps=eps: replicate(s, n, eps), seeds, config.n_jobs
            )
            for method in config.methods:
                flags = [decisions[method] for decisions, _ in results]
                cells.append(_make_cell(n, eps, method, flags, config.replicates))
            samples.extend(
                StatisticSample(config.scenario, f"n={n},eps={eps:g}", r, stat)
                for r, (_, stat) in enumerate(results)
            )
    return ScenarioRun(cells, samples)


def run_table1(config: ScenarioConfig) -> ScenarioRun:
    """Identity-test power grid over (n, epsilon)."""
    return _run_table(config, TestKind.IDENTITY)


def run_table2(config: ScenarioConfig) -> ScenarioRun:
    """Scaling-test power grid over (n, epsilon)."""
    return _run_table(config, TestKind.SCALING)


def _community_latents(n3: int):
    """Latent positions before and after a community of size n3 appears.

    Vertex alignment: the community takes the last n3/2 vertices of each
    original block."""
    sizes = community_sizes(n3)
    half = COMMUNITY_N // 2
    labels_before = np.repeat([0, 1], half)
    labels_after = np.concatenate([
        np.zeros(sizes[0], dtype=np.int64),
        np.full(n3 // 2, 2, dtype=np.int64),
        np.ones(sizes[1], dtype=np.int64),
        np.full(n3 - n3 // 2, 2, dtype=np.int64),
    ])
    before = sbm_latent_positions(COMMUNITY_BEFORE, labels_before)
    after_blocks = COMMUNITY_AFTER if n3 > 0 else COMMUNITY_BEFORE
    after_labels = labels_after if n3 > 0 else labels_before
    after = sbm_latent_positions(after_blocks, after_labels)
    return before, after


def run_community(config: ScenarioConfig) -> ScenarioRun:
    """Power of the identity test against an emerging community, plus the
    raw statistic samples for density plots.

    Embeds at dimension 3 once a third block exists (2 for the null case),
    unless the config pins a dimension.
    """
    n3_values = config.resolved("epsilons")
    cells: list[PowerCell] = []
    samples: list[StatisticSample] = []
    for n3 in n3_values:
        n3 = int(n3)
        before, after = _community_latents(n3)
        dim = config.dim if config.dim is not None else (3 if n3 > 0 else 2)

        def replicate(rep_seed, before=before, after=after, dim=dim):
            return _paired_test_replicate(
                before, after, TestKind.IDENTITY, dim, config.bs,
                config.alpha, ("bootstrap",), rep_seed,
            )

        cell_seed = derive_seed(config.seed, COMMUNITY_N, _epsilon_key(n3))
        seeds = [derive_seed(cell_seed, r) for r in range(config.replicates)]
        results = _map_replicates(replicate, seeds, config.n_jobs)
        flags = [decisions["bootstrap"] for decisions, _ in results]
        cells.append(_make_cell(COMMUNITY_N, n3, "bootstrap", flags, config.replicates))
        samples.extend(
            StatisticSample("community", f"n3={n3}", r, stat)
            for r, (_, stat) in enumerate(results)
        )
    return ScenarioRun(cells, samples)


def run_dcsbm(config: ScenarioConfig) -> ScenarioRun:
    """Diagonal-test power on degree-corrected blockmodels.

    The sweep parameter selects the pair: 0 tests the base model against
    its diagonally-transformed twin (a true null), 1 against the distinct
    model (an alternative).  Degree corrections are drawn i.i.d. uniform
    on [0.2, 1], independently for each graph.
    """
    ns = config.resolved("ns")
    pair_flags = config.resolved("epsilons")
    dim = config.dim if config.dim is not None else 2
    pi = np.asarray(config.pi, dtype=np.float64)
    low, high = DCSBM_CORRECTION_RANGE
    cells: list[PowerCell] = []
    samples: list[StatisticSample] = []

    def replicate(rep_seed, n, alternative):
        assignments = sample_assignments(pi, n, derive_seed(rep_seed, 0))
        c_a = generator(derive_seed(rep_seed, 5)).uniform(low, high, size=n)
        c_b = generator(derive_seed(rep_seed, 6)).uniform(low, high, size=n)
        x = dcsbm_latent_positions(DCSBM_BASE, assignments, c_a)
        other = DCSBM_DISTINCT if alternative else DCSBM_DIAGONAL
        y = dcsbm_latent_positions(other, assignments, c_b)
        return _paired_test_replicate(
            x, y, TestKind.DIAGONAL, dim, config.bs, config.alpha,
            ("bootstrap",), rep_seed,
        )

    for n in ns:
        for pair in pair_flags:
            alternative = bool(round(float(pair)))
            cell_seed = derive_seed(config.seed, int(n), _epsilon_key(pair))
            seeds = [derive_seed(cell_seed, r) for r in range(config.replicates)]
            results = _map_replicates(
                lambda s, n=n, alt=alternative: replicate(s, n, alt),
                seeds, config.n_jobs,
            )
            flags = [decisions["bootstrap"] for decisions, _ in results]
            cells.append(_make_cell(n, pair, "bootstrap", flags, config.replicates))
            label = "alternative" if alternative else "null"
            samples.extend(
                StatisticSample("dcsbm", f"n={n},{label}", r, stat)
                for r, (_, stat) in enumerate(results)
            )
    return ScenarioRun(cells, samples)


_SCENARIO_RUNNERS = {
    "table1": run_table1,
    "table2": run_table2,
    "community": run_community,
    "dcsbm": run_dcsbm,
}


def run_scenario(config: ScenarioConfig) -> ScenarioRun:
    """Dispatch a named scenario."""
    try:
        runner = _SCENARIO_RUNNERS[config.scenario]
    except KeyError:
        raise ValueError(f"no runner for scenario {config.scenario!r}") from None
    return runner(config)


class CelegansResult(NamedTuple):
    result: TestResult
    edges_a: int
    edges_b: int


def run_celegans(chem_path, gap_path, dim: int = 6, bs: int = 1000,
                 seed: int = 0) -> CelegansResult:
    """Scaling test between two connectomes on one labelled neuron set.

    Densities differ by a scale factor, so the appropriate null is
    equality up to scaling; the denominator uses the noise-constant
    plug-in.  Raises :class:`VertexSetMismatch` when the files disagree
    on the vertex count.
    """
    graph_a = read_edge_list(chem_path).graph
    graph_b = read_edge_list(gap_path).graph
    if graph_a.n != graph_b.n:
        raise VertexSetMismatch(
            f"files describe {graph_a.n} and {graph_b.n} vertices"
        )
    result = two_sample_test(
        graph_a, graph_b, kind=TestKind.SCALING, dim=dim, method="bootstrap",
        bs=bs, denominator="noise", seed=seed,
    )
    return CelegansResult(result, graph_a.edge_count, graph_b.edge_count)


def write_power_csv(cells, path) -> None:
    """Write a power grid as CSV: n,epsilon,method,power,replicates,se."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "epsilon", "method", "power", "replicates", "se"])
        for cell in cells:
            writer.writerow([
                cell.n,
                f"{cell.epsilon:g}",
                cell.method,
                f"{cell.power:.10g}",
                cell.replicates,
                f"{cell.se:.10g}",
            ])


def write_samples_csv(samples, path) -> None:
    """Write statistic samples as CSV: scenario,param,replicate,statistic."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["scenario", "param", "replicate", "statistic"])
        for s in samples:
            writer.writerow([s.scenario, s.param, s.replicate, f"{s.statistic:.17g}"])
