import math

import numpy as np
import pytest

from rdpgtest import (
    AdjacencySpectralEmbedding,
    DimensionTooLarge,
    Graph,
    RankDeficient,
    SpectralDiagnostics,
    ZeroMatrix,
    ase,
    check_assumption1,
    derive_seed,
    diagnostics,
    dimension_select,
    noise_constant,
    procrustes_distance,
    sample_rdpg,
)
from rdpgtest.spectral import _embed_matrix

from conftest import two_block_latents


def complete_graph(n):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Graph(n, np.asarray(pairs))


class TestAse:
    def test_complete_graph_rank_one(self):
        emb = ase(complete_graph(4), 1)
        # top eigenvalue 3 with eigenvector (1,1,1,1)/2
        assert np.allclose(emb.spectrum, [3.0], atol=1e-10)
        assert np.allclose(np.square(emb.positions).sum(axis=1), 0.75, atol=1e-8)
        assert np.allclose(emb.positions, emb.positions[0], atol=1e-8)

    def test_full_rank_psd_matrix_reconstructs(self):
        x = np.eye(4) * 0.4 + 0.1
        p = x @ x.T
        emb = ase(p, 4)
        assert np.linalg.norm(emb.positions @ emb.positions.T - p) < 1e-8

    def test_probability_matrix_recovers_latents(self):
        x = two_block_latents(80, seed=1)
        emb = ase(x.probability_matrix(), 2)
        assert procrustes_distance(emb.positions, x.matrix) < 1e-6

    def test_column_norms_match_spectrum(self):
        g = sample_rdpg(two_block_latents(120, seed=2), 3)
        emb = ase(g, 2)
        assert np.allclose(
            np.square(emb.positions).sum(axis=0), emb.spectrum, atol=1e-8
        )
        assert emb.spectrum[0] > emb.spectrum[1] > 0

    def test_negative_eigenvalue_can_enter(self):
        # A single edge has eigenvalues (1, -1): both enter at dim 2.
        emb = ase(Graph(2, np.array([[0, 1]])), 2)
        assert np.allclose(emb.spectrum, [1.0, 1.0], atol=1e-12)

    def test_dimension_bounds(self):
        g = complete_graph(4)
        with pytest.raises(DimensionTooLarge):
            ase(g, 5)
        with pytest.raises(DimensionTooLarge):
            ase(g, 0)

    def test_rank_deficit_rejected(self):
        # K4 has eigenvalues (3, -1, -1, -1): requesting 4 is fine, but a
        # star graph K_{1,3} has rank 2, so dim 3 hits a zero eigenvalue.
        star = Graph(4, np.array([[0, 1], [0, 2], [0, 3]]))
        with pytest.raises(DimensionTooLarge):
            ase(star, 3)

    def test_empty_graph_rejected(self):
        with pytest.raises(ZeroMatrix):
            ase(Graph(5), 1)

    def test_sign_convention_deterministic(self):
        g = sample_rdpg(two_block_latents(90, seed=3), 4)
        a = ase(g, 2).positions
        b = ase(g, 2).positions
        assert np.array_equal(a, b)
        # the largest-|entry| element of each underlying eigenvector is >= 0
        for j in range(2):
            col = a[:, j]
            assert col[np.argmax(np.abs(col))] >= 0

    def test_permutation_equivariance(self):
        g = sample_rdpg(two_block_latents(70, seed=4), 5)
        perm = np.random.default_rng(0).permutation(70)
        emb = ase(g, 2)
        emb_perm = ase(g.relabel(perm), 2)
        # vertex i of g is vertex perm[i] of the relabeled graph; rows
        # correspond and columns may flip sign only
        original = emb.positions
        relabeled = emb_perm.positions[perm]
        for j in range(2):
            col_match = np.allclose(original[:, j], relabeled[:, j], atol=1e-8)
            col_flip = np.allclose(original[:, j], -relabeled[:, j], atol=1e-8)
            assert col_match or col_flip

    def test_solver_paths_agree(self):
        # Dense eigh, Lanczos, and the warm-started subspace path must
        # agree well below 1e-6.
        from rdpgtest._eigs import _dense_top, _lanczos_top, _subspace_top, _guarded_hint

        x = two_block_latents(600, seed=5)
        g = sample_rdpg(x, 8)
        a = g.dense_adjacency()

        dense_vals, dense_vecs = _dense_top(a, 3)
        lanczos_vals, lanczos_vecs = _lanczos_top(a, 3)
        assert np.allclose(dense_vals, lanczos_vals, atol=1e-8)

        sparse_vals, _ = _lanczos_top(g.sparse_adjacency(), 3)
        assert np.allclose(sparse_vals, dense_vals, atol=1e-8)

        u = np.linalg.svd(x.matrix, full_matrices=False)[0]
        hinted = _subspace_top(a, 2, _guarded_hint(u, 2))
        assert hinted is not None
        hint_vals, hint_vecs = hinted
        assert np.allclose(hint_vals, dense_vals[:2], atol=1e-8)
        for j in range(2):
            overlap = abs(hint_vecs[:, j] @ dense_vecs[:, j])
            assert overlap > 1.0 - 1e-10

        # the public embedding agrees across the dense and sparse inputs
        full_pos, full_spec, _ = _embed_matrix(a, 2)
        sparse_pos, sparse_spec, _ = _embed_matrix(g.sparse_adjacency(), 2)
        assert np.allclose(sparse_spec, full_spec, atol=1e-6)
        assert np.allclose(sparse_pos, full_pos, atol=1e-6)


class TestDiagnostics:
    def test_four_vertex_er_probability_matrix(self):
        m = 0.5 * (np.ones((4, 4)) - np.eye(4))
        diag = diagnostics(m, 1)
        assert abs(diag.delta - 1.5) < 1e-12
        assert np.allclose(diag.sigma, [1.5, 0.5], atol=1e-12)
        assert abs(diag.gamma1 - 2.0 / 3.0) < 1e-12
        assert abs(diag.gamma2 - 2.0 / 3.0) < 1e-12

    def test_gamma1_le_gamma2(self):
        for seed in range(5):
            g = sample_rdpg(two_block_latents(150, seed=seed), seed)
            diag = diagnostics(g, 2)
            assert diag.gamma1 <= diag.gamma2 + 1e-15

    def test_matches_independent_dense_eigensolver(self):
        tau = np.repeat([0, 1], 50)
        p = two_block_latents(100, assignments=tau).probability_matrix()
        diag = diagnostics(p, 2)
        # independent oracle: full singular value decomposition
        sigma = np.linalg.svd(p, compute_uv=False)
        delta = p.sum(axis=1).max()
        assert abs(diag.delta - delta) < 1e-10
        assert np.allclose(diag.sigma, sigma[:3], atol=1e-10)
        assert abs(diag.gamma1 - (sigma[:2] - sigma[1:3]).min() / delta) < 1e-10
        assert abs(diag.gamma2 - (sigma[1] - sigma[2]) / delta) < 1e-10

    def test_zero_matrix_rejected(self):
        with pytest.raises(ZeroMatrix):
            diagnostics(np.zeros((3, 3)), 1)

    def test_dimension_equal_n_pads_sigma(self):
        m = 0.5 * (np.ones((3, 3)) - np.eye(3))
        diag = diagnostics(m, 3)
        assert diag.sigma.size == 4 and diag.sigma[-1] == 0.0

    def test_json_dict_keys(self):
        diag = diagnostics(0.5 * (np.ones((4, 4)) - np.eye(4)), 1)
        payload = diag.to_dict()
        assert set(payload) == {"delta", "gamma1", "gamma2", "sigma", "n", "d"}
        assert payload["n"] == 4 and payload["d"] == 1


class TestNoiseConstant:
    def test_rank_one_closed_form(self):
        # All rows equal with squared norm p: the exact value is
        # sqrt((n-1) p (1-p) / (n p)).
        n, p = 50, 0.3
        x = np.full((n, 1), math.sqrt(p))
        expected = math.sqrt((n - 1) * p * (1 - p) / (n * p))
        assert abs(noise_constant(x) - expected) < 1e-12

    def test_matches_trace_formula_via_eigendecomposition(self):
        # Independent evaluation through the eigendecomposition of P.
        x = two_block_latents(60, seed=7).matrix
        p = x @ x.T
        values, vectors = np.linalg.eigh(p)
        order = np.argsort(values)[::-1][:2]
        s, u = values[order], vectors[:, order]
        hollow = p.copy()
        np.fill_diagonal(hollow, 0.0)
        d = (hollow * (1.0 - hollow)).sum(axis=1)
        scaled = u / np.sqrt(s)  # U S^(-1/2)
        expected = math.sqrt(np.trace(scaled.T @ (d[:, None] * scaled)))
        assert abs(noise_constant(x) - expected) < 1e-10

    def test_upper_bound_by_gamma(self):
        for seed in range(10):
            x = two_block_latents(80, seed=seed)
            p = x.probability_matrix()
            diag = diagnostics(p, 2)
            bound = math.sqrt(2.0 / diag.gamma2)
            assert noise_constant(x) <= bound + 1e-10

    def test_zero_positions_rejected(self):
        with pytest.raises(RankDeficient):
            noise_constant(np.zeros((10, 2)))

    def test_estimated_positions_are_clipped(self):
        # Products slightly above 1 must not produce a NaN.
        wobble = np.where(np.arange(20) % 2, 0.01, -0.01)
        x = np.column_stack([np.full(20, 1.00001), wobble])
        assert (x @ x.T).max() > 1.0
        value = noise_constant(x)
        assert np.isfinite(value) and value >= 0.0


class TestDimensionSelect:
    @staticmethod
    def oracle(values):
        # Brute-force two-piece Gaussian profile likelihood (scipy path).
        from scipy.stats import norm

        values = np.asarray(values, dtype=float)
        best, best_ll = None, -np.inf
        for q in range(1, values.size):
            head, tail = values[:q], values[q:]
            var = (np.sum((head - head.mean()) ** 2) + np.sum((tail - tail.mean()) ** 2)) / values.size
            sd = math.sqrt(max(var, 1e-300))
            ll = norm.logpdf(head, head.mean(), sd).sum() + norm.logpdf(tail, tail.mean(), sd).sum()
            if ll > best_ll:
                best, best_ll = q, ll
        return best

    def test_two_cluster_scree(self):
        scree = [100.0, 99.0, 1.0, 0.9, 0.8]
        assert self.oracle(scree) == 2
        assert dimension_select(scree) == 2

    def test_monotone_scree_matches_oracle(self):
        scree = [5.0, 4.0, 3.0, 2.0, 1.0]
        assert dimension_select(scree) == self.oracle(scree)

    def test_length_two(self):
        assert dimension_select([10.0, 2.0]) == 1

    def test_random_screes_match_oracle(self, rng):
        for _ in range(50):
            scree = np.sort(rng.uniform(0.1, 50.0, size=rng.integers(2, 12)))[::-1]
            assert dimension_select(scree) == self.oracle(scree)

    def test_max_dim_caps_choice(self):
        scree = [100.0, 99.0, 98.0, 1.0]
        assert dimension_select(scree) == 3
        assert dimension_select(scree, max_dim=2) <= 2

    def test_rejects_short_or_nonpositive(self):
        with pytest.raises(ValueError):
            dimension_select([3.0])
        with pytest.raises(ValueError):
            dimension_select([3.0, -1.0])


class TestAssumptionCheck:
    def test_dense_er_passes(self):
        n = 1000
        m = 0.5 * (np.ones((n, n)) - np.eye(n))
        report = check_assumption1(diagnostics(m, 1))
        assert report.delta_ok and report.gamma1_ok and report.ok
        assert abs(report.delta_margin - (499.5 - math.log(n) ** 2.01)) < 1e-9

    def test_zero_delta_fails(self):
        empty = SpectralDiagnostics(
            delta=0.0, gamma1=0.0, gamma2=0.0, sigma=np.zeros(2), n=10, d=1
        )
        report = check_assumption1(empty)
        assert not report.delta_ok and not report.ok

    def test_repeated_top_eigenvalue_flags_gamma1(self):
        # two disconnected equal cliques: sigma1 == sigma2 so gamma1 = 0
        b = np.array([[0.8, 0.0], [0.0, 0.8]])
        tau = np.repeat([0, 1], 10)
        p = (b[np.ix_(tau, tau)]).astype(float)
        np.fill_diagonal(p, 0.8)
        report = check_assumption1(diagnostics(p, 2))
        assert not report.gamma1_ok


class TestEstimator:
    def test_fit_sets_attributes(self):
        g = sample_rdpg(two_block_latents(150, seed=9), 1)
        model = AdjacencySpectralEmbedding(dim=2)
        out = model.fit_transform(g)
        assert out.shape == (150, 2)
        assert model.dim_ == 2
        assert model.diagnostics_.n == 150
        assert np.array_equal(model.transform(), out)

    def test_auto_dimension_finds_two_blocks(self):
        # Two structural eigenvalues of similar size, far above the bulk:
        # the elbow is unambiguous.
        from rdpgtest import sbm_latent_positions

        b = np.array([[0.6, 0.1], [0.1, 0.6]])
        x = sbm_latent_positions(b, np.repeat([0, 1], 200))
        g = sample_rdpg(x, 2)
        model = AdjacencySpectralEmbedding(dim=None, max_dim=8).fit(g)
        assert model.dim_ == 2

    def test_get_params_round_trip(self):
        model = AdjacencySpectralEmbedding(dim=3, max_dim=12)
        params = model.get_params()
        assert params == {"dim": 3, "max_dim": 12}
        clone = AdjacencySpectralEmbedding(**params)
        assert clone.get_params() == params

    def test_transform_before_fit_raises(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            AdjacencySpectralEmbedding(dim=2).transform()


@pytest.mark.slow
def test_adjacency_diagnostics_track_probability_matrix():
    # delta, gamma1, gamma2 computed from a sampled adjacency stay within
    # 10% of the probability-matrix values in at least 95% of replicates.
    n, replicates = 2000, 100
    x = two_block_latents(n, seed=21)
    p = x.probability_matrix()
    np.fill_diagonal(p, 0.0)
    reference = diagnostics(p, 2)
    hits = np.zeros(3, dtype=int)
    for r in range(replicates):
        g = sample_rdpg(x, derive_seed(9000, r))
        observed = diagnostics(g.sparse_adjacency(), 2)
        ratios = np.array([
            observed.delta / reference.delta,
            observed.gamma1 / reference.gamma1,
            observed.gamma2 / reference.gamma2,
        ])
        hits += (np.abs(ratios - 1.0) <= 0.1)
    assert np.all(hits >= 0.95 * replicates), hits.tolist()
