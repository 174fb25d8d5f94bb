"""Tests for GSO construction, random graphs, perturbations and signals."""

import numpy as np
import numpy.testing as npt
import pytest

import oracles
from rgfi.graphs import (
    Gso,
    GsoFamily,
    GraphFilter,
    InputDist,
    PerturbationKind,
    PerturbationSpec,
    build_filter,
    commutator_norm,
    generate_er,
    generate_small_world,
    nerr,
    perturb,
    sample_covariance,
    spectral_decomp,
    synthesize_signals,
)

# ---------------------------- Gso type ---------------------------- #


class TestGso:
    def test_adjacency_accepts_valid(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        g = Gso(a)
        assert g.n == 2
        assert g.family is GsoFamily.ADJACENCY

    def test_adjacency_rejects_diagonal(self):
        a = np.array([[0.5, 1.0], [1.0, 0.0]])
        with pytest.raises(ValueError, match="zero diagonal"):
            Gso(a)

    def test_adjacency_rejects_negative(self):
        a = np.array([[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(ValueError, match="nonnegative"):
            Gso(a)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError, match="square"):
            Gso(np.zeros((2, 3)))

    def test_laplacian_row_sums(self):
        lap = np.array([[1.0, -1.0], [-1.0, 1.0]])
        g = Gso(lap, GsoFamily.COMBINATORIAL_LAPLACIAN)
        assert g.n == 2
        bad = np.array([[2.0, -1.0], [-1.0, 1.0]])
        with pytest.raises(ValueError, match="sum to zero"):
            Gso(bad, GsoFamily.COMBINATORIAL_LAPLACIAN)

    def test_laplacian_rejects_positive_offdiag(self):
        bad = np.array([[-1.0, 1.0], [1.0, -1.0]])
        with pytest.raises(ValueError, match="nonpositive"):
            Gso(bad, GsoFamily.COMBINATORIAL_LAPLACIAN)

    def test_symmetry_flag_enforced(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError, match="symmetric"):
            Gso(a, symmetric=True)
        Gso(a, symmetric=False)  # fine when declared directed

    def test_matrix_is_frozen(self):
        g = generate_er(8, 0.4, seed=0)
        assert not g.matrix.flags.writeable
        with pytest.raises(ValueError):
            g.matrix[0, 1] = 7.0


# ------------------------- random graphs ------------------------- #


class TestGenerators:
    def test_er_basic_invariants(self):
        for seed in range(10):
            g = generate_er(20, 0.2, seed=seed)
            a = g.matrix
            npt.assert_array_equal(a, a.T)
            assert np.all(np.diag(a) == 0.0)
            assert np.all(a.sum(axis=1) > 0)  # no isolated nodes
            assert set(np.unique(a)).issubset({0.0, 1.0})

    def test_er_determinism(self):
        a = generate_er(15, 0.3, seed=7).matrix
        b = generate_er(15, 0.3, seed=7).matrix
        npt.assert_array_equal(a, b)
        c = generate_er(15, 0.3, seed=8).matrix
        assert not np.array_equal(a, c)

    def test_er_density_tracks_p(self):
        n = 60
        dense = generate_er(n, 0.7, seed=1).matrix
        sparse = generate_er(n, 0.15, seed=1).matrix
        assert dense.sum() > sparse.sum()

    def test_er_directed(self):
        g = generate_er(12, 0.4, symmetric=False, seed=3)
        assert not g.symmetric
        assert np.all(np.diag(g.matrix) == 0.0)

    def test_er_gives_up_on_hopeless_p(self):
        with pytest.raises(RuntimeError, match="increase p"):
            generate_er(40, 0.001, seed=0)

    def test_small_world_ring_with_no_rewiring(self):
        n, k = 10, 4
        g = generate_small_world(n, k, 0.0, seed=0)
        expected = np.zeros((n, n))
        for j in range(1, k // 2 + 1):
            for i in range(n):
                expected[i, (i + j) % n] = expected[(i + j) % n, i] = 1.0
        npt.assert_array_equal(g.matrix, expected)

    def test_small_world_preserves_edge_count(self):
        n, k = 20, 4
        for seed in range(5):
            g = generate_small_world(n, k, 0.3, seed=seed)
            assert g.matrix.sum() == n * k  # each undirected edge counted twice
            npt.assert_array_equal(g.matrix, g.matrix.T)

    def test_small_world_validates_k(self):
        with pytest.raises(ValueError):
            generate_small_world(10, 3, 0.1)
        with pytest.raises(ValueError):
            generate_small_world(10, 10, 0.1)


# -------------------------- perturbation ------------------------- #


def _edge_count(a):
    return int(np.count_nonzero(np.triu(a, 1)))


class TestPerturb:
    def test_create_adds_budget_links(self):
        g = generate_er(20, 0.2, seed=4)
        before = _edge_count(g.matrix)
        spec = PerturbationSpec(PerturbationKind.CREATE, ratio=0.2, seed=0)
        pert = perturb(g, spec)
        assert _edge_count(pert.matrix) == before + int(round(0.2 * before))
        # existing links untouched
        mask = g.matrix != 0.0
        npt.assert_array_equal(pert.matrix[mask], g.matrix[mask])

    def test_destroy_removes_budget_links(self):
        g = generate_er(20, 0.3, seed=5)
        before = _edge_count(g.matrix)
        pert = perturb(g, PerturbationSpec(PerturbationKind.DESTROY, ratio=0.25, seed=1))
        assert _edge_count(pert.matrix) == before - int(round(0.25 * before))
        # no new links appear
        assert np.all((pert.matrix != 0.0) <= (g.matrix != 0.0))

    def test_create_destroy_splits_budget(self):
        g = generate_er(20, 0.25, seed=6)
        before = _edge_count(g.matrix)
        budget = int(round(0.2 * before))
        pert = perturb(g, PerturbationSpec(PerturbationKind.CREATE_DESTROY, ratio=0.2, seed=2))
        created = _edge_count(np.where(g.matrix == 0.0, pert.matrix, 0.0))
        destroyed = before - _edge_count(np.where(g.matrix != 0.0, pert.matrix, 0.0))
        assert created == budget // 2
        assert destroyed == budget - budget // 2

    def test_weight_noise_clips_at_zero(self):
        g = generate_er(20, 0.3, seed=7)
        spec = PerturbationSpec(PerturbationKind.WEIGHT_NOISE, ratio=1.0, weight_sigma=5.0, seed=3)
        pert = perturb(g, spec)
        assert np.all(pert.matrix >= 0.0)
        npt.assert_array_equal(pert.matrix, pert.matrix.T)
        # topology can only lose links under clipping, never gain
        assert np.all((pert.matrix != 0.0) <= (g.matrix != 0.0))

    def test_mixed_touches_topology_and_weights(self):
        g = generate_er(20, 0.3, seed=8)
        spec = PerturbationSpec(PerturbationKind.MIXED, ratio=0.2, weight_sigma=0.3, seed=4)
        pert = perturb(g, spec)
        surviving = (g.matrix != 0.0) & (pert.matrix != 0.0)
        changed = surviving & (g.matrix != pert.matrix)
        assert changed.any()  # weight noise hit the survivors
        assert not np.array_equal(pert.matrix != 0.0, g.matrix != 0.0)

    def test_deterministic_given_seed(self):
        g = generate_er(15, 0.3, seed=9)
        spec = PerturbationSpec(PerturbationKind.CREATE_DESTROY, ratio=0.3, seed=11)
        npt.assert_array_equal(perturb(g, spec).matrix, perturb(g, spec).matrix)

    def test_create_fails_on_complete_graph(self):
        n = 6
        a = np.ones((n, n)) - np.eye(n)
        g = Gso(a)
        with pytest.raises(ValueError, match="creation"):
            perturb(g, PerturbationSpec(PerturbationKind.CREATE, ratio=0.5, seed=0))

    def test_spec_validates_ratio(self):
        with pytest.raises(ValueError):
            PerturbationSpec(PerturbationKind.CREATE, ratio=1.5)
        with pytest.raises(ValueError):
            PerturbationSpec(PerturbationKind.WEIGHT_NOISE, weight_sigma=-0.1)

    def test_laplacian_not_supported(self):
        lap = np.array([[1.0, -1.0], [-1.0, 1.0]])
        g = Gso(lap, GsoFamily.COMBINATORIAL_LAPLACIAN)
        with pytest.raises(ValueError, match="adjacency"):
            perturb(g, PerturbationSpec(PerturbationKind.CREATE, ratio=0.5, seed=0))


# ----------------------- filters and signals ---------------------- #


class TestFiltersSignals:
    def test_build_filter_matches_explicit_powers(self):
        rng = np.random.default_rng(0)
        for seed in range(8):
            g = generate_er(12, 0.3, seed=seed)
            h = rng.standard_normal(5)
            built = build_filter(g, h).matrix
            npt.assert_allclose(built, oracles.filter_by_powers(g.matrix, h), atol=1e-10)

    def test_filter_needs_some_representation(self):
        with pytest.raises(ValueError):
            GraphFilter()

    def test_validate_against_catches_mismatch(self):
        g = generate_er(10, 0.3, seed=1)
        h = np.array([1.0, 0.5])
        filt = build_filter(g, h)
        assert filt.validate_against(g) < 1e-12
        broken = GraphFilter(coeffs=h, matrix=filt.matrix + 1.0)
        with pytest.raises(ValueError, match="disagree"):
            broken.validate_against(g)

    def test_noiseless_signals_are_exact(self):
        g = generate_er(10, 0.3, seed=2)
        filt = build_filter(g, np.array([1.0, 0.8, 0.3]))
        sig = synthesize_signals(filt, 25, noise_power=0.0, seed=0)
        npt.assert_allclose(sig.y, filt.matrix @ sig.x, atol=1e-12)

    def test_noise_power_ratio_is_exact(self):
        """The realized ||W||^2 / ||HX||^2 equals the requested power."""
        g = generate_er(10, 0.3, seed=3)
        filt = build_filter(g, np.array([1.0, 0.5]))
        for power in (0.01, 0.05, 0.5):
            sig = synthesize_signals(filt, 40, noise_power=power, seed=1)
            w = sig.y - filt.matrix @ sig.x
            ratio = np.linalg.norm(w) ** 2 / np.linalg.norm(filt.matrix @ sig.x) ** 2
            npt.assert_allclose(ratio, power, rtol=1e-10)

    def test_signals_deterministic(self):
        g = generate_er(8, 0.4, seed=4)
        filt = build_filter(g, np.array([0.2, 1.0]))
        a = synthesize_signals(filt, 5, 0.1, InputDist.GAUSSIAN_WHITE, seed=9)
        b = synthesize_signals(filt, 5, 0.1, InputDist.GAUSSIAN_WHITE, seed=9)
        npt.assert_array_equal(a.x, b.x)
        npt.assert_array_equal(a.y, b.y)

    def test_signalset_shape_check(self):
        from rgfi.graphs import SignalSet

        with pytest.raises(ValueError, match="share dimensions"):
            SignalSet(x=np.zeros((3, 4)), y=np.zeros((3, 5)))


# ---------------------- spectral decomposition -------------------- #


class TestSpectral:
    def test_symmetric_reconstruction(self):
        g = generate_er(15, 0.3, seed=5)
        dec = spectral_decomp(g)
        recon = (dec.eigvecs * dec.eigvals) @ dec.inv_eigvecs
        npt.assert_allclose(recon, g.matrix, atol=1e-10)

    def test_directed_reconstruction(self):
        g = generate_er(12, 0.4, symmetric=False, seed=6)
        dec = spectral_decomp(g)
        recon = (dec.eigvecs * dec.eigvals) @ dec.inv_eigvecs
        npt.assert_allclose(recon.real, g.matrix, atol=1e-8)

    def test_defective_matrix_raises(self):
        # a Jordan block has no eigenbasis
        jordan = np.array([[0.0, 1.0], [0.0, 0.0]])
        g = Gso(jordan, symmetric=False)
        with pytest.raises(np.linalg.LinAlgError):
            spectral_decomp(g)

    def test_vandermonde(self):
        g = generate_er(6, 0.5, seed=7)
        dec = spectral_decomp(g)
        psi = dec.vandermonde(3)
        assert psi.shape == (6, 3)
        npt.assert_allclose(psi[:, 0], np.ones(6))
        npt.assert_allclose(psi[:, 2], dec.eigvals**2)


# ------------------------------ metrics --------------------------- #


class TestMetrics:
    def test_nerr_known_value(self):
        truth = np.array([[3.0, 0.0], [0.0, 4.0]])
        est = truth + np.array([[1.0, 0.0], [0.0, 0.0]])
        # ||diff||^2 = 1, ||truth||^2 = 25
        npt.assert_allclose(nerr(est, truth), 1.0 / 25.0)
        assert nerr(truth, truth) == 0.0

    def test_nerr_errors(self):
        with pytest.raises(ValueError, match="shape"):
            nerr(np.zeros((2, 2)), np.zeros((3, 3)))
        with pytest.raises(ValueError, match="zero-norm"):
            nerr(np.ones((2, 2)), np.zeros((2, 2)))

    def test_commutator_norm(self):
        g = generate_er(9, 0.3, seed=8)
        s = g.matrix
        assert commutator_norm(s, s @ s) < 1e-10  # powers commute
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        b = np.array([[1.0, 0.0], [0.0, 2.0]])
        npt.assert_allclose(commutator_norm(a, b), np.linalg.norm(a @ b - b @ a))

    def test_sample_covariance(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal((4, 30))
        npt.assert_allclose(sample_covariance(x), x @ x.T / 30.0)
