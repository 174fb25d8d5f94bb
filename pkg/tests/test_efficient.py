"""Reduced-complexity solver: gradients, sparse columns, scalar updates."""

import dataclasses

import numpy as np
import numpy.testing as npt
import pytest

import oracles
from rgfi.config import EfficientConfig, SolverConfig
from rgfi.efficient import (
    auto_step_size,
    build_sigma_columns,
    coord_update,
    denoise_coord_descent,
    efficient_rfi,
    filter_step_gd,
    grad_f1,
)
from rgfi.graphs import generate_er, nerr
from rgfi.kernels import surrogate_objective
from rgfi.solver import mm_weights, rfi_alternating, rfi_step1


def _f1(h, s, x, y, gamma):
    return np.linalg.norm(y - h @ x) ** 2 + gamma * np.linalg.norm(s @ h - h @ s) ** 2


# ------------------------------ gradient --------------------------- #


class TestGradient:
    def test_matches_central_differences(self):
        """Analytic gradient against finite differences, entry by entry."""
        n, m = 6, 10
        for seed in range(10):
            rng = np.random.default_rng(seed)
            s = oracles.random_adjacency(rng, n)
            x = rng.standard_normal((n, m))
            y = rng.standard_normal((n, m))
            h = rng.standard_normal((n, n))
            gamma = float(rng.uniform(0.5, 20.0))
            g = grad_f1(h, s, x, y, gamma)
            g_fd = oracles.central_diff_grad(lambda hh: _f1(hh, s, x, y, gamma), h)
            scale = max(np.max(np.abs(g_fd)), 1.0)
            assert np.max(np.abs(g - g_fd)) / scale < 1e-5

    def test_zero_at_unregularized_optimum(self):
        rng = np.random.default_rng(42)
        n, m = 5, 20
        x = rng.standard_normal((n, m))
        h_true = rng.standard_normal((n, n))
        y = h_true @ x
        s = oracles.random_adjacency(rng, n)
        assert np.max(np.abs(grad_f1(h_true, s, x, y, 0.0))) < 1e-10


class TestFilterStepGd:
    def test_auto_step_never_increases(self):
        rng = np.random.default_rng(1)
        n, m = 6, 12
        s = oracles.random_adjacency(rng, n)
        x = rng.standard_normal((n, m))
        y = rng.standard_normal((n, m))
        h0 = np.zeros((n, n))
        f_prev = _f1(h0, s, x, y, 5.0)
        h = h0
        for _ in range(10):
            h = filter_step_gd(h, s, x, y, 5.0, tau_max=1)
            f_cur = _f1(h, s, x, y, 5.0)
            assert f_cur <= f_prev + 1e-12
            f_prev = f_cur

    def test_converges_to_exact_step(self):
        rng = np.random.default_rng(2)
        n, m = 5, 12
        s = oracles.random_adjacency(rng, n)
        x = rng.standard_normal((n, m))
        y = rng.standard_normal((n, m))
        gamma = 2.0
        h_exact = rfi_step1(x, y, s, gamma)
        h_gd = filter_step_gd(np.zeros((n, n)), s, x, y, gamma, tau_max=5000)
        f_gap = _f1(h_gd, s, x, y, gamma) - _f1(h_exact, s, x, y, gamma)
        assert f_gap >= -1e-9  # the exact step is the minimizer
        assert f_gap / _f1(h_exact, s, x, y, gamma) < 1e-6

    def test_bad_user_step_recovers(self):
        # a divergent step size gets halved instead of blowing up
        rng = np.random.default_rng(3)
        n, m = 5, 10
        s = oracles.random_adjacency(rng, n)
        x = rng.standard_normal((n, m))
        y = rng.standard_normal((n, m))
        good = auto_step_size(s, x, 1.0)
        h = filter_step_gd(np.zeros((n, n)), s, x, y, 1.0, mu=200.0 * good, tau_max=300)
        assert np.all(np.isfinite(h))

    def test_step_size_positive(self):
        rng = np.random.default_rng(4)
        s = oracles.random_adjacency(rng, 6)
        x = rng.standard_normal((6, 8))
        assert auto_step_size(s, x, 10.0) > 0.0


# -------------------------- sparse columns ------------------------- #


class TestSigmaColumns:
    def test_columns_match_commutator_map(self):
        """Column (i, j) must equal vec(E_ij H - H E_ij)."""
        rng = np.random.default_rng(5)
        n = 5
        h = rng.standard_normal((n, n))
        cols = build_sigma_columns(h)
        for k in range(cols.idx_i.size):
            i, j = cols.idx_i[k], cols.idx_j[k]
            e = np.zeros((n, n))
            e[i, j] = 1.0
            expected = (e @ h - h @ e).ravel(order="F")
            npt.assert_allclose(cols.column(k), expected, atol=1e-12)

    def test_col_sq_consistent(self):
        rng = np.random.default_rng(6)
        h = rng.standard_normal((4, 4))
        cols = build_sigma_columns(h)
        dense = cols.to_dense()
        npt.assert_allclose(cols.col_sq, (dense**2).sum(axis=0), atol=1e-12)


# --------------------------- scalar update ------------------------- #


class TestCoordUpdate:
    def _objective(self, s, s_bar_l, sigma_l, r_l, omega_l, omega_bar_l, lam, beta, gamma):
        return (
            lam * omega_bar_l * abs(s - s_bar_l)
            + beta * omega_l * s
            + gamma * np.linalg.norm(sigma_l * s + r_l) ** 2
        )

    def test_matches_grid_search(self):
        rng = np.random.default_rng(7)
        for case in range(20):
            d = 6
            sigma_l = rng.standard_normal(d)
            r_l = rng.standard_normal(d)
            s_bar_l = float(rng.uniform(0.0, 2.0))
            omega_l = float(rng.uniform(0.1, 5.0))
            omega_bar_l = float(rng.uniform(0.1, 5.0))
            lam, beta, gamma = 0.4, 0.15, float(rng.uniform(0.5, 5.0))
            s_star = coord_update(s_bar_l, sigma_l, r_l, omega_l, omega_bar_l, lam, beta, gamma)

            def f(s):
                return self._objective(
                    s, s_bar_l, sigma_l, r_l, omega_l, omega_bar_l, lam, beta, gamma
                )

            s_grid = oracles.scalar_grid_min(f, 0.0, s_bar_l + 5.0)
            assert f(s_star) <= f(s_grid) + 1e-9, f"case {case}: {f(s_star)} vs {f(s_grid)}"

    def test_dead_zone_returns_s_bar(self):
        # huge proximity weight keeps the coordinate pinned at the observation
        sigma_l = np.array([1.0, -0.5])
        r_l = np.array([0.1, 0.2])
        s = coord_update(0.7, sigma_l, r_l, 1.0, 1.0, 1e6, 0.0, 1.0)
        assert s == 0.7

    def test_degenerate_quadratic(self):
        zero = np.zeros(3)
        assert coord_update(0.9, zero, zero, 1.0, 1.0, 2.0, 1.0, 1.0) == 0.9
        assert coord_update(0.9, zero, zero, 5.0, 1.0, 0.1, 1.0, 1.0) == 0.0

    def test_projection_at_zero(self):
        # strong sparsity pressure with no proximity -> clamps to 0
        sigma_l = np.array([1.0])
        r_l = np.array([5.0])
        s = coord_update(0.3, sigma_l, r_l, 1.0, 0.0, 0.0, 10.0, 1.0)
        assert s == 0.0


# ----------------------- fixed-budget denoising -------------------- #


class TestDenoiseCoordDescent:
    def test_agrees_with_reference_kernel(self):
        rng = np.random.default_rng(8)
        n = 6
        s_bar = oracles.random_adjacency(rng, n)
        h = rng.standard_normal((n, n))
        cfg = EfficientConfig(tau_max2=500)
        weights = mm_weights(s_bar, s_bar, cfg.delta1, cfg.delta2)
        g, sweeps = denoise_coord_descent(h, s_bar, s_bar, weights, cfg, gamma=20.0)
        assert sweeps <= 500
        f = surrogate_objective(
            g.matrix, s_bar, [(20.0, h)], cfg.lam * weights[0], cfg.beta * weights[1]
        )
        f0 = surrogate_objective(
            s_bar, s_bar, [(20.0, h)], cfg.lam * weights[0], cfg.beta * weights[1]
        )
        assert f <= f0


class TestEfficientRfi:
    def test_tracks_exact_solver(self):
        """Large inner budgets reproduce the exact alternating solver."""
        scfg = SolverConfig(t_max=8)
        fields = {f.name: getattr(scfg, f.name) for f in dataclasses.fields(SolverConfig)}
        ecfg = EfficientConfig(**fields, tau_max1=800, tau_max2=800)
        for seed in range(3):
            g = generate_er(10, 0.3, seed=seed)
            rng = np.random.default_rng(seed + 100)
            from rgfi.graphs import build_filter, synthesize_signals

            coeffs = rng.standard_normal(3)
            # unit average gain, the regime the default penalties are tuned for
            coeffs *= np.sqrt(10) / np.linalg.norm(build_filter(g, coeffs).matrix)
            filt = build_filter(g, coeffs)
            sig = synthesize_signals(filt, 30, 0.05, seed=seed + 200)
            from rgfi.graphs import PerturbationKind, PerturbationSpec, perturb

            s_bar = perturb(
                g, PerturbationSpec(PerturbationKind.CREATE_DESTROY, 0.1, seed=seed + 300)
            )
            r1 = rfi_alternating(sig.x, sig.y, s_bar, scfg, order=3)
            r2 = efficient_rfi(sig.x, sig.y, s_bar, ecfg, order=3)
            dh = abs(nerr(r1.H_hat, filt.matrix) - nerr(r2.H_hat, filt.matrix))
            ds = abs(nerr(r1.S_hat.matrix, g.matrix) - nerr(r2.S_hat.matrix, g.matrix))
            assert dh < 5e-3 and ds < 5e-3, f"seed {seed}: dh={dh:.2e} ds={ds:.2e}"

    def test_phase_rows_recorded(self):
        g = generate_er(8, 0.4, seed=30)
        rng = np.random.default_rng(31)
        x = rng.standard_normal((8, 15))
        y = rng.standard_normal((8, 15))
        cfg = EfficientConfig(t_max=2, tau_max1=5, tau_max2=5)
        res = efficient_rfi(x, y, g, cfg, order=3)
        phases = [row[1] for row in res.trace.phase_rows]
        assert phases == ["filter", "denoise", "filter", "denoise"]

    def test_symmetry_mismatch_rejected(self):
        g = generate_er(6, 0.5, symmetric=False, seed=32)
        x = np.zeros((6, 3))
        with pytest.raises(ValueError, match="symmetric"):
            efficient_rfi(x, x, g, EfficientConfig())
