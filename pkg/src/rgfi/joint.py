"""Joint identification of several filters on one graph, and AR dynamics.

The joint solver shares a single denoised graph across K filters; the
AR solver treats the K lag matrices of an autoregressive network
process as filters on the common (perturbed) graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .config import _OUTER_STOP_REL, SolverConfig
from .graphs import Gso, GsoFamily
from .kernels import denoise_quadratic
from .solver import RunReport, _alternating, mm_weights, rfi_step1


@dataclass(frozen=True)
class MultiSignalSet:
    """K input/output pairs sharing one graph.

    Parameters
    ----------
    pairs : list of (X_k, Y_k)
        Signal matrices, all with the same node count; column counts
        may differ per pair.
    alpha : array_like, optional
        Positive confidence weights of the data terms (default all 1).
    """

    pairs: list
    alpha: np.ndarray | None = None

    def __post_init__(self):
        assert len(self.pairs) >= 1
        n = self.pairs[0][0].shape[0]
        for x, y in self.pairs:
            if x.shape != y.shape or x.shape[0] != n:
                raise ValueError("all signal pairs must share the node dimension")
        alpha = np.ones(len(self.pairs)) if self.alpha is None else np.asarray(self.alpha, float)
        if alpha.shape != (len(self.pairs),) or np.any(alpha <= 0.0):
            raise ValueError("alpha must hold one positive weight per pair")
        object.__setattr__(self, "alpha", alpha)

    @property
    def k(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ArSeries:
    """An observed autoregressive series of graph signals.

    ys[t] is the N x M_t signal matrix at time t (chronological order);
    xs optionally holds exogenous inputs of the same shapes. memory is
    the AR order K; the series must be longer than K.
    """

    ys: list
    memory: int
    xs: list | None = None

    def __post_init__(self):
        assert self.memory >= 1
        if len(self.ys) <= self.memory:
            raise ValueError(f"need more than memory={self.memory} samples, got {len(self.ys)}")
        n = self.ys[0].shape[0]
        for y in self.ys:
            if y.shape[0] != n:
                raise ValueError("inconsistent node count across the series")
        if self.xs is not None:
            if len(self.xs) != len(self.ys):
                raise ValueError("exogenous inputs must align with the observations")
            for x, y in zip(self.xs, self.ys):
                if x.shape != y.shape:
                    raise ValueError("exogenous inputs must match observation shapes")


@dataclass
class JointResult:
    """Output of a joint (or AR) robust identification run."""

    H_hats: list
    S_hat: Gso
    trace: RunReport
    converged: bool = False


def joint_rfi(multi: MultiSignalSet, s_bar: Gso, config: SolverConfig | None = None) -> JointResult:
    """Jointly identify K filters and denoise their shared graph.

    Each filter step solves its own regularized LS problem (they are
    independent given the graph); the denoising step couples all
    filters through the summed commutator quadratic. With K = 1 this
    reduces exactly to rfi_alternating.
    """
    config = SolverConfig() if config is None else config
    hs, s_hat, report, converged = _alternating(multi.pairs, list(multi.alpha), s_bar, config)
    return JointResult(H_hats=hs, S_hat=s_hat, trace=report, converged=converged)


# ---------------------------------------------------------------- #
#                        autoregressive solver                     #
# ---------------------------------------------------------------- #


def _ar_stacks(series: ArSeries, hs, skip: int | None = None, use_new=None):
    """Regressor/target stacks for the lag-`skip` filter update.

    The target at time t removes the contributions of every other lag:
    Gauss-Seidel passes `use_new` (already-updated filters) for lower
    lags and the previous iterates for higher ones.
    """
    k = series.memory
    xs_cols = []
    res_cols = []
    for t in range(k, len(series.ys)):
        target = series.ys[t].astype(float, copy=True)
        if series.xs is not None:
            target -= series.xs[t]
        for lag in range(1, k + 1):
            if lag == skip:
                continue
            h_lag = use_new[lag - 1] if (use_new is not None and lag < skip) else hs[lag - 1]
            if h_lag is not None:
                target -= h_lag @ series.ys[t - lag]
        if skip is not None:
            xs_cols.append(series.ys[t - skip])
        res_cols.append(target)
    x_stack = np.hstack(xs_cols) if xs_cols else None
    y_stack = np.hstack(res_cols)
    return x_stack, y_stack


def _ar_objective(series: ArSeries, hs, s, s_bar, cfg, gamma, extra_quads=()):
    k = series.memory
    total = 0.0
    for t in range(k, len(series.ys)):
        pred = sum(hs[lag - 1] @ series.ys[t - lag] for lag in range(1, k + 1))
        if series.xs is not None:
            pred = pred + series.xs[t]
        total += np.linalg.norm(series.ys[t] - pred) ** 2
    for h in hs:
        total += gamma * np.linalg.norm(s @ h - h @ s) ** 2
    total += cfg.lam * np.sum(np.log(np.abs(s - s_bar) + cfg.delta1))
    total += cfg.beta * np.sum(np.log(np.abs(s) + cfg.delta2))
    for w, c in extra_quads:
        total += w * np.linalg.norm(s @ c - c @ s) ** 2
    return float(total)


def ar_rfi(
    series: ArSeries,
    s_bar: Gso,
    config: SolverConfig | None = None,
    jacobi: bool = False,
) -> JointResult:
    """Fit K lag filters of an AR graph process while denoising the graph.

    Alternates (a) per-lag regularized LS updates of the filters, each
    conditioning on the other lags' current estimates (cyclically by
    default; `jacobi` freezes all of them at the previous iterate), and
    (b) the shared graph-denoising step. Missing exogenous inputs are
    simply dropped from the residuals.
    """
    config = SolverConfig() if config is None else config
    if config.symmetric and not s_bar.symmetric:
        raise ValueError("config requests a symmetric structural set but Sbar is not symmetric")
    if GsoFamily(config.family) is not GsoFamily.ADJACENCY:
        raise ValueError("graph denoising optimizes adjacency-family sets only")
    k = series.memory
    s_bar_mat = s_bar.matrix
    s = s_bar_mat.copy()
    hs = [np.zeros_like(s_bar_mat) for _ in range(k)]
    ones = np.ones_like(s_bar_mat)
    report = RunReport()
    prev_obj = None
    converged = False
    for t in range(config.t_max):
        gamma_t = config.gamma(t)
        tic = perf_counter()
        new_hs = [None] * k
        for lag in range(1, k + 1):
            x_stack, y_stack = _ar_stacks(
                series, hs, skip=lag, use_new=None if jacobi else new_hs
            )
            new_hs[lag - 1] = rfi_step1(x_stack, y_stack, s, gamma_t)
        hs = new_hs
        t_mid = perf_counter()
        if config.reweight:
            omega_bar, omega = mm_weights(s, s_bar_mat, config.delta1, config.delta2)
        else:
            omega_bar, omega = ones, ones
        quads = [(gamma_t, h) for h in hs]
        s, _ = denoise_quadratic(
            s,
            s_bar_mat,
            quads,
            config.lam * omega_bar,
            config.beta * omega,
            config.symmetric,
            config.inner_max,
            obj_rel_tol=config.inner_tol,
        )
        t_end = perf_counter()
        obj = _ar_objective(series, hs, s, s_bar_mat, config, gamma_t)
        report.rows.append((t, obj, (t_mid - tic) * 1e3, (t_end - t_mid) * 1e3))
        if (
            prev_obj is not None
            and config.gamma(t - 1) == gamma_t
            and abs(prev_obj - obj) <= _OUTER_STOP_REL * max(abs(prev_obj), 1e-12)
        ):
            converged = True
            break
        prev_obj = obj
    s_hat = Gso(s, GsoFamily(config.family), config.symmetric)
    return JointResult(H_hats=hs, S_hat=s_hat, trace=report, converged=converged)


def ar_predict(
    filters: list,
    history: list,
    steps: int = 1,
    exogenous: list | None = None,
) -> list:
    """Roll an AR model forward.

    Args:
        filters: lag matrices [H_1, ..., H_K] (H_1 multiplies the most
            recent sample).
        history: chronological list of at least K signal matrices; the
            last entry is the most recent observation.
        steps: prediction horizon; predictions are fed back for
            multi-step forecasts.
        exogenous: optional per-step exogenous inputs.

    Returns:
        List of `steps` predicted signal matrices.
    """
    k = len(filters)
    assert len(history) >= k, "history must cover the AR memory"
    if exogenous is not None:
        assert len(exogenous) == steps
    buf = [np.asarray(h, dtype=float) for h in history]
    out = []
    for step in range(steps):
        pred = sum(filters[lag - 1] @ buf[-lag] for lag in range(1, k + 1))
        if exogenous is not None:
            pred = pred + exogenous[step]
        out.append(pred)
        buf.append(pred)
    return out
