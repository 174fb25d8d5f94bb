"""Config-driven experiment harness with CSV emission.

Synthetic sweeps (filter order, perturbation type, baselines, runtime,
joint filters, AR forecasting), sensor-network ingestion with k-NN
graph construction, and forecasting baselines. Results are long-format
CSV rows (method, grid_value, seed, metric, value); wall-clock figures
go to a separate timing CSV because they are not reproducible byte for
byte.
"""

from __future__ import annotations

import csv
import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

import numpy as np
import pandas as pd

from .config import EfficientConfig, SolverConfig, coerce_value, parse_kv_lines
from .efficient import efficient_rfi
from .graphs import (
    Gso,
    GsoFamily,
    PerturbationKind,
    PerturbationSpec,
    build_filter,
    generate_er,
    generate_small_world,
    nerr,
    perturb,
    synthesize_signals,
)
from .joint import ArSeries, MultiSignalSet, ar_predict, ar_rfi, joint_rfi
from .solver import fi_closed_form, rfi_alternating, rfi_alternating_stationary

EXPERIMENT_IDS = (
    "filter_order",
    "perturbation_type",
    "baseline_compare",
    "efficiency",
    "joint_k",
    "ar_forecast",
)

_SIMPLE_METHODS = (
    "FI",
    "RFI",
    "RFI-l1",
    "RFI-st",
    "RFI-J",
    "Eff-RFI",
    "LS",
    "LS-GF",
    "Copy-Prev-Day",
    "LS-Eval",
)
_AR_METHOD = re.compile(r"^AR(\d+)-RFI$")

_EARTH_RADIUS_KM = 6371.0088


def _known_method(name: str) -> bool:
    return name in _SIMPLE_METHODS or _AR_METHOD.match(name) is not None


# ---------------------------------------------------------------- #
#                        experiment config                         #
# ---------------------------------------------------------------- #


@dataclass
class ExperimentConfig:
    """One experiment: a sweep grid, methods to run, and shared knobs.

    Solver hyperparameters live in the nested configs; per-method
    overrides (``<method>.<field>`` keys in config files) are stored as
    raw strings and applied when the method runs.
    """

    experiment: str
    grid: list
    methods: list
    realizations: int = 64
    base_seed: int = 0
    n: int = 20
    er_p: float = 0.2
    graph: str = "er"
    sw_k: int = 4
    sw_rewire: float = 0.1
    m: int = 50
    noise: float = 0.05
    order: int = 4
    perturbation: str = "create_destroy"
    ratio: float = 0.1
    weight_sigma: float = 0.1
    ar_memory: int = 3
    t_steps: int = 120
    tts: float = 0.5
    target_radius: float = 0.75
    out_dir: str = "results"
    solver: SolverConfig = field(default_factory=SolverConfig)
    efficient: EfficientConfig = field(default_factory=EfficientConfig)
    method_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENT_IDS}")
        if self.realizations < 1:
            raise ValueError("realizations must be at least 1")
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        for m in self.methods:
            if not _known_method(m):
                raise ValueError(f"unknown method id {m!r}")
        if self.graph not in ("er", "small_world"):
            raise ValueError(f"unknown graph family {self.graph!r}")
        PerturbationKind(self.perturbation)
        if not 0.0 < self.tts < 1.0:
            raise ValueError("tts must be a fraction in (0, 1)")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = parse_kv_lines(fh)
        own_fields = {f.name: f for f in dataclasses.fields(cls)}
        solver_kv: dict[str, str] = {}
        efficient_kv: dict[str, str] = {}
        overrides: dict[str, dict[str, str]] = {}
        kwargs: dict = {}
        for key, val in raw.items():
            if "." in key:
                head, sub = key.split(".", 1)
                if head == "solver":
                    solver_kv[sub] = val
                elif head == "efficient":
                    efficient_kv[sub] = val
                elif _known_method(head):
                    overrides.setdefault(head, {})[sub] = val
                else:
                    raise ValueError(f"unknown config section {head!r} in key {key!r}")
                continue
            if key not in own_fields or key in ("solver", "efficient", "method_overrides"):
                raise ValueError(f"unknown config key {key!r}")
            if key == "grid":
                kwargs[key] = [_parse_number(tok) for tok in _split_list(val)]
            elif key == "methods":
                kwargs[key] = _split_list(val)
            else:
                kwargs[key] = coerce_value(val, own_fields[key].type)
        kwargs["solver"] = _build_config(SolverConfig, solver_kv)
        # the efficient solver inherits the solver section, then applies its own
        kwargs["efficient"] = _build_config(EfficientConfig, {**solver_kv, **efficient_kv})
        kwargs["method_overrides"] = overrides
        return cls(**kwargs)


def _split_list(raw: str) -> list[str]:
    toks = [t.strip() for t in raw.split(",")]
    return [t for t in toks if t]


def _parse_number(tok: str):
    return int(tok) if re.fullmatch(r"[+-]?\d+", tok) else float(tok)


def _build_config(cls, kv: dict[str, str]):
    fmap = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, val in kv.items():
        if key not in fmap:
            raise ValueError(f"unknown solver config key {key!r} for {cls.__name__}")
        kwargs[key] = coerce_value(val, fmap[key].type)
    return cls(**kwargs)


def _method_config(cfg: ExperimentConfig, method: str):
    base = cfg.efficient if method == "Eff-RFI" else cfg.solver
    over = cfg.method_overrides.get(method, {})
    if not over:
        return base
    fmap = {f.name: f for f in dataclasses.fields(base)}
    kwargs = {name: getattr(base, name) for name in fmap}
    for key, val in over.items():
        if key not in fmap:
            raise ValueError(f"unknown override key {key!r} for method {method!r}")
        kwargs[key] = coerce_value(val, fmap[key].type)
    return type(base)(**kwargs)


# ---------------------------------------------------------------- #
#                      synthetic data recipes                      #
# ---------------------------------------------------------------- #


def _sub_seeds(entropy, count):
    rng = np.random.default_rng(entropy)
    return [int(v) for v in rng.integers(2**63, size=count)]


def _make_graph(cfg: ExperimentConfig, n: int, seed: int) -> Gso:
    if cfg.graph == "small_world":
        return generate_small_world(n, cfg.sw_k, cfg.sw_rewire, seed=seed)
    return generate_er(n, cfg.er_p, seed=seed)


def draw_filter_coeffs(gso: Gso, order: int, rng) -> np.ndarray:
    """Random Gaussian coefficients scaled to unit average signal gain.

    The scaling fixes ||H||_F = sqrt(N), i.e., E||Hx||^2 = E||x||^2 for
    white x. Normalizing the filter matrix (rather than the coefficient
    vector) keeps the signal energy and the commutator scale comparable
    across filter orders, so one set of solver hyperparameters serves
    every sweep point.
    """
    g = rng.standard_normal(order)
    h_mat = build_filter(gso, g).matrix
    scale = np.linalg.norm(h_mat)
    assert scale > 0.0
    return g * np.sqrt(gso.n) / scale


def _filter_instance(cfg: ExperimentConfig, entropy, order: int, n: int | None = None):
    """Graph, true filter, and signals from one deterministic entropy key."""
    n = cfg.n if n is None else n
    gseed, fseed, sseed = _sub_seeds(entropy, 3)
    gso = _make_graph(cfg, n, gseed)
    coeffs = draw_filter_coeffs(gso, order, np.random.default_rng(fseed))
    filt = build_filter(gso, coeffs)
    sig = synthesize_signals(filt, cfg.m, cfg.noise, seed=sseed)
    return gso, filt, sig


def _perturbed(cfg: ExperimentConfig, gso: Gso, kind: str, ratio: float, entropy) -> Gso:
    (pseed,) = _sub_seeds(entropy, 1)
    spec = PerturbationSpec(PerturbationKind(kind), ratio, cfg.weight_sigma, seed=pseed)
    return perturb(gso, spec)


# ---------------------------------------------------------------- #
#                      method dispatch (filters)                   #
# ---------------------------------------------------------------- #


def _run_filter_method(method, sig, s_bar, gso, filt, order, cfg):
    """Run one identification method; returns (metrics dict, wall_ms)."""
    scfg = _method_config(cfg, method)
    h_true = filt.matrix
    tic = perf_counter()
    s_hat = None
    if method == "FI":
        h_coef = fi_closed_form(sig.x, sig.y, s_bar, order)
        h_est = build_filter(s_bar, h_coef).matrix
    elif method == "RFI":
        res = rfi_alternating(sig.x, sig.y, s_bar, scfg, order=order)
        h_est, s_hat, h_coef = res.H_hat, res.S_hat, res.h_hat
    elif method == "RFI-l1":
        res = rfi_alternating(
            sig.x, sig.y, s_bar, dataclasses.replace(scfg, reweight=False), order=order
        )
        h_est, s_hat, h_coef = res.H_hat, res.S_hat, res.h_hat
    elif method == "RFI-st":
        c_x = np.eye(s_bar.n)
        c_y = h_true @ h_true.T
        res = rfi_alternating_stationary(
            sig.x, sig.y, s_bar, scfg, c_x=c_x, c_y=c_y, order=order
        )
        h_est, s_hat, h_coef = res.H_hat, res.S_hat, res.h_hat
    elif method == "Eff-RFI":
        res = efficient_rfi(sig.x, sig.y, s_bar, scfg, order=order)
        h_est, s_hat, h_coef = res.H_hat, res.S_hat, res.h_hat
    else:
        raise ValueError(f"method {method!r} is not an identification method")
    wall_ms = (perf_counter() - tic) * 1e3
    metrics = {"nerr_H": nerr(h_est, h_true), "nerr_h": nerr(h_coef, filt.coeffs)}
    if s_hat is not None:
        metrics["nerr_S"] = nerr(s_hat.matrix, gso.matrix)
    return metrics, wall_ms


# ---------------------------------------------------------------- #
#                      individual experiments                      #
# ---------------------------------------------------------------- #


def _exp_filter_order(cfg, seed, rows, times):
    for g_idx, g in enumerate(cfg.grid):
        order = int(g)
        gso, filt, sig = _filter_instance(cfg, [seed, g_idx, 11], order)
        s_bar = _perturbed(cfg, gso, cfg.perturbation, cfg.ratio, [seed, g_idx, 13])
        for method in cfg.methods:
            metrics, wall = _run_filter_method(method, sig, s_bar, gso, filt, order, cfg)
            for name, val in metrics.items():
                rows.append((method, g, seed, name, val))
            times.append((method, g, seed, "wall_ms", wall))


def _exp_perturbation_type(cfg, seed, rows, times):
    gso, filt, sig = _filter_instance(cfg, [seed, 11], cfg.order)
    kinds = (
        PerturbationKind.CREATE,
        PerturbationKind.DESTROY,
        PerturbationKind.CREATE_DESTROY,
    )
    for g_idx, ratio in enumerate(cfg.grid):
        for k_idx, kind in enumerate(kinds):
            s_bar = _perturbed(cfg, gso, kind.value, float(ratio), [seed, g_idx, k_idx, 13])
            rows.append(("Sbar", ratio, seed, f"nerr_S_{kind.value}", nerr(s_bar.matrix, gso.matrix)))
            for method in cfg.methods:
                metrics, wall = _run_filter_method(
                    method, sig, s_bar, gso, filt, cfg.order, cfg
                )
                for name, val in metrics.items():
                    rows.append((method, ratio, seed, f"{name}_{kind.value}", val))
                times.append((method, ratio, seed, f"wall_ms_{kind.value}", wall))


def _exp_baseline_compare(cfg, seed, rows, times):
    gso, filt, sig = _filter_instance(cfg, [seed, 11], cfg.order)
    for g_idx, ratio in enumerate(cfg.grid):
        s_bar = _perturbed(cfg, gso, cfg.perturbation, float(ratio), [seed, g_idx, 13])
        rows.append(("Sbar", ratio, seed, "nerr_S", nerr(s_bar.matrix, gso.matrix)))
        for method in cfg.methods:
            metrics, wall = _run_filter_method(method, sig, s_bar, gso, filt, cfg.order, cfg)
            for name, val in metrics.items():
                rows.append((method, ratio, seed, name, val))
            times.append((method, ratio, seed, "wall_ms", wall))


def _exp_efficiency(cfg, seed, rows, times):
    for g_idx, g in enumerate(cfg.grid):
        n = int(g)
        gso, filt, sig = _filter_instance(cfg, [seed, g_idx, 11], cfg.order, n=n)
        s_bar = _perturbed(cfg, gso, cfg.perturbation, cfg.ratio, [seed, g_idx, 13])
        for method in cfg.methods:
            metrics, wall = _run_filter_method(method, sig, s_bar, gso, filt, cfg.order, cfg)
            for name, val in metrics.items():
                rows.append((method, n, seed, name, val))
            times.append((method, n, seed, "wall_ms", wall))


def _exp_joint_k(cfg, seed, rows, times):
    k_max = int(max(cfg.grid))
    (gseed,) = _sub_seeds([seed, 11], 1)
    gso = _make_graph(cfg, cfg.n, gseed)
    s_bar = _perturbed(cfg, gso, cfg.perturbation, cfg.ratio, [seed, 13])
    filts, sigs = [], []
    for k_idx in range(k_max):
        fseed, sseed = _sub_seeds([seed, k_idx, 17], 2)
        coeffs = draw_filter_coeffs(gso, cfg.order, np.random.default_rng(fseed))
        filt = build_filter(gso, coeffs)
        filts.append(filt)
        sigs.append(synthesize_signals(filt, cfg.m, cfg.noise, seed=sseed))
    # separate estimation of filter i never sees the other pairs, so the
    # k_max single-filter runs are shared across the whole grid
    sep_errs, sep_ms = [], []
    if "RFI" in cfg.methods:
        scfg = _method_config(cfg, "RFI")
        for i in range(k_max):
            tic = perf_counter()
            r = rfi_alternating(sigs[i].x, sigs[i].y, s_bar, scfg, order=cfg.order)
            sep_ms.append((perf_counter() - tic) * 1e3)
            sep_errs.append(nerr(r.H_hat, filts[i].matrix))
    for g in cfg.grid:
        k = int(g)
        for method in cfg.methods:
            if method == "RFI-J":
                scfg = _method_config(cfg, method)
                pairs = [(sigs[i].x, sigs[i].y) for i in range(k)]
                tic = perf_counter()
                res = joint_rfi(MultiSignalSet(pairs=pairs), s_bar, scfg)
                times.append((method, k, seed, "wall_ms", (perf_counter() - tic) * 1e3))
                errs = [nerr(h, f.matrix) for h, f in zip(res.H_hats, filts)]
                rows.append((method, k, seed, "nerr_S", nerr(res.S_hat.matrix, gso.matrix)))
            elif method == "RFI":
                errs = sep_errs[:k]
                times.append((method, k, seed, "wall_ms", float(sum(sep_ms[:k]))))
            else:
                raise ValueError(f"method {method!r} not supported by the joint_k experiment")
            rows.append((method, k, seed, "nerr_H_mean", float(np.mean(errs))))


# ------------------------- AR forecasting ------------------------- #


def _draw_ar_filters(cfg: ExperimentConfig, gso: Gso, memory: int, rng) -> list:
    """Random lag filters rescaled to a stable joint spectral radius.

    Scaling lag k by alpha^k scales every root of the characteristic
    polynomial by alpha, so the companion radius lands exactly on
    target_radius.
    """
    hs = [build_filter(gso, draw_filter_coeffs(gso, cfg.order, rng)).matrix for _ in range(memory)]
    n = gso.n
    comp = np.zeros((memory * n, memory * n))
    for k, h in enumerate(hs):
        comp[:n, k * n : (k + 1) * n] = h
    if memory > 1:
        comp[n:, : (memory - 1) * n] = np.eye((memory - 1) * n)
    rad = float(np.max(np.abs(np.linalg.eigvals(comp))))
    alpha = cfg.target_radius / max(rad, 1e-12)
    return [alpha ** (k + 1) * h for k, h in enumerate(hs)]


def _simulate_ar(cfg: ExperimentConfig, filters, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    memory = len(filters)
    ys = [rng.standard_normal((n, 1)) for _ in range(memory)]
    for _ in range(cfg.t_steps - memory):
        nxt = sum(filters[k] @ ys[-1 - k] for k in range(memory))
        nxt = nxt + cfg.noise * rng.standard_normal((n, 1))
        ys.append(nxt)
    return np.hstack(ys).T  # (t_steps, n)


def _fit_dense_ls(values: np.ndarray, memory: int) -> list:
    """Unconstrained least-squares lag matrices on a (T, N) series."""
    t_len, n = values.shape
    assert t_len > memory, "series shorter than the AR memory"
    zs = []
    ys = []
    for t in range(memory, t_len):
        zs.append(np.concatenate([values[t - k] for k in range(1, memory + 1)]))
        ys.append(values[t])
    z = np.asarray(zs)  # (samples, memory*n)
    y = np.asarray(ys)  # (samples, n)
    b, *_ = np.linalg.lstsq(z, y, rcond=None)
    big = b.T  # (n, memory*n)
    return [big[:, k * n : (k + 1) * n] for k in range(memory)]


def _fit_forecaster(method, train, s_bar, memory, order, scfg):
    """Returns the lag-matrix list for one forecasting method."""
    ys_list = [row[:, None] for row in train]
    if method in ("LS", "LS-Eval"):
        return _fit_dense_ls(train, memory)
    if method == "LS-GF":
        x = train[:-1].T
        y = train[1:].T
        h = fi_closed_form(x, y, s_bar, order)
        return [build_filter(s_bar, h).matrix]
    if method == "RFI":
        res = ar_rfi(ArSeries(ys=ys_list, memory=1), s_bar, scfg)
        return res.H_hats
    ar = _AR_METHOD.match(method)
    if ar:
        res = ar_rfi(ArSeries(ys=ys_list, memory=int(ar.group(1))), s_bar, scfg)
        return res.H_hats
    raise ValueError(f"method {method!r} is not a forecasting method")


def _forecast_error(method, filters, values, split, horizon) -> float:
    """Mean per-step normalized error over the evaluation range."""
    t_len = values.shape[0]
    memory = 1 if method == "Copy-Prev-Day" else len(filters)
    start = max(split, memory + horizon - 1)
    errs = []
    for t in range(start, t_len):
        if method == "Copy-Prev-Day":
            pred = values[t - horizon]
        else:
            hist = [values[i][:, None] for i in range(t - horizon - memory + 1, t - horizon + 1)]
            pred = ar_predict(filters, hist, steps=horizon)[-1][:, 0]
        errs.append(nerr(pred, values[t]))
    assert errs, "evaluation range is empty; lower tts or horizon"
    return float(np.mean(errs))


def forecast_experiment(
    values: np.ndarray,
    s_bar: Gso,
    memory: int,
    tts: float,
    horizon: int,
    methods,
    config: SolverConfig | None = None,
    order: int = 5,
) -> dict:
    """Chronological train/eval forecasting comparison on one series.

    Args:
        values: (T, N) series, one row per time step.
        s_bar: observed graph used by the graph-aware methods.
        memory: AR memory of the AR(K) methods (K in the method token
            overrides this per method).
        tts: train fraction; the first floor(tts*T) rows form the train
            set, the rest are evaluated.
        horizon: steps ahead; multi-step forecasts recurse.
        methods: forecasting method tokens.
        config: solver hyperparameters of the RFI-based methods.
        order: filter order of LS-GF.

    Returns:
        Dict method -> mean per-step normalized squared error.
    """
    values = np.asarray(values, dtype=float)
    assert values.ndim == 2, "values must be (time, nodes)"
    config = SolverConfig() if config is None else config
    t_len = values.shape[0]
    split = int(np.floor(tts * t_len))
    if split <= memory or split >= t_len:
        raise ValueError(f"tts={tts} leaves no usable train/eval split for T={t_len}")
    out = {}
    for method in methods:
        if not _known_method(method):
            raise ValueError(f"unknown method id {method!r}")
        if method == "Copy-Prev-Day":
            out[method] = _forecast_error(method, [], values, split, horizon)
            continue
        fit_rows = values[split:] if method == "LS-Eval" else values[:split]
        filters = _fit_forecaster(method, fit_rows, s_bar, memory, order, config)
        out[method] = _forecast_error(method, filters, values, split, horizon)
    return out


def _exp_ar_forecast(cfg, seed, rows, times):
    (gseed,) = _sub_seeds([seed, 11], 1)
    gso = _make_graph(cfg, cfg.n, gseed)
    s_bar = _perturbed(cfg, gso, cfg.perturbation, cfg.ratio, [seed, 13])
    (fseed, dseed) = _sub_seeds([seed, 17], 2)
    filters = _draw_ar_filters(cfg, gso, cfg.ar_memory, np.random.default_rng(fseed))
    values = _simulate_ar(cfg, filters, cfg.n, dseed)
    split = int(np.floor(cfg.tts * cfg.t_steps))
    fitted = {}
    for method in cfg.methods:
        if method == "Copy-Prev-Day":
            fitted[method] = []
            continue
        scfg = _method_config(cfg, method)
        fit_rows = values[split:] if method == "LS-Eval" else values[:split]
        tic = perf_counter()
        fitted[method] = _fit_forecaster(method, fit_rows, s_bar, cfg.ar_memory, cfg.order, scfg)
        times.append((method, 0, seed, "fit_wall_ms", (perf_counter() - tic) * 1e3))
    for g in cfg.grid:
        horizon = int(g)
        for method in cfg.methods:
            err = _forecast_error(method, fitted[method], values, split, horizon)
            rows.append((method, horizon, seed, "ferr", err))


_RUNNERS = {
    "filter_order": _exp_filter_order,
    "perturbation_type": _exp_perturbation_type,
    "baseline_compare": _exp_baseline_compare,
    "efficiency": _exp_efficiency,
    "joint_k": _exp_joint_k,
    "ar_forecast": _exp_ar_forecast,
}


# ---------------------------------------------------------------- #
#                         harness + CSV io                         #
# ---------------------------------------------------------------- #


def _fmt(v) -> str:
    return f"{float(v):.12g}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _sorted_long(rows):
    key = lambda r: (r[0], float(r[1]), int(r[2]), r[3])
    return [
        (m, _fmt(g), str(s), metric, _fmt(v)) for m, g, s, metric, v in sorted(rows, key=key)
    ]


def _summarize(rows):
    groups: dict = {}
    for m, g, s, metric, v in rows:
        groups.setdefault((m, float(g), metric), []).append(v)
    out = []
    for (m, g, metric), vals in sorted(groups.items()):
        out.append((m, _fmt(g), metric, _fmt(np.median(vals)), str(len(vals))))
    return out


def run_experiment(
    config: ExperimentConfig,
    out_dir=None,
    fast: bool = False,
    base_seed: int | None = None,
) -> dict:
    """Run every (grid point, realization, method) cell and write CSVs.

    Realizations run sequentially with seed = base_seed + index, so any
    prefix of the seed range is reproducible independently of the rest.
    Returns the paths of the written files.
    """
    runner = _RUNNERS[config.experiment]
    seed0 = config.base_seed if base_seed is None else base_seed
    n_real = min(config.realizations, 32) if fast else config.realizations
    rows: list = []
    times: list = []
    for i in range(n_real):
        runner(config, seed0 + i, rows, times)
    out = Path(config.out_dir if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = ("method", "grid_value", "seed", "metric", "value")
    paths = {
        "results": out / "results.csv",
        "summary": out / "summary.csv",
        "timing": out / "timing.csv",
    }
    _write_csv(paths["results"], header, _sorted_long(rows))
    _write_csv(
        paths["summary"],
        ("method", "grid_value", "metric", "median", "realizations"),
        _summarize(rows),
    )
    _write_csv(paths["timing"], header, _sorted_long(times))
    return paths


# ---------------------------------------------------------------- #
#                      sensor-network ingestion                    #
# ---------------------------------------------------------------- #


@dataclass
class StationDataset:
    """A gap-free, time-aligned panel of sensor measurements."""

    ids: list
    lat: np.ndarray
    lon: np.ndarray
    values: np.ndarray  # (time, station)
    times: list
    units: str = ""

    def __post_init__(self):
        n = len(self.ids)
        if self.lat.shape != (n,) or self.lon.shape != (n,):
            raise ValueError("coordinate arrays must have one entry per station")
        if self.values.ndim != 2 or self.values.shape[1] != n:
            raise ValueError("values must be (time, station)")
        if len(self.times) != self.values.shape[0]:
            raise ValueError("times must align with the value rows")
        if np.isnan(self.values).any():
            raise ValueError("dataset contains missing values after ingestion")

    @property
    def n(self) -> int:
        return len(self.ids)


def great_circle_km(lat1, lon1, lat2, lon2) -> float:
    """Haversine distance in kilometers."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dp = p2 - p1
    dl = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dp / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2.0) ** 2
    return float(2.0 * _EARTH_RADIUS_KM * np.arcsin(np.sqrt(a)))


def knn_graph(stations: StationDataset, k: int) -> Gso:
    """Binary k-nearest-neighbor graph on great-circle distance.

    Each station links to its k nearest; the direction is then dropped
    (union symmetrization), so degrees can exceed k. Ties break on the
    lower station index.
    """
    n = stations.n
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n_stations, got k={k}, n={n}")
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = great_circle_km(stations.lat[i], stations.lon[i], stations.lat[j], stations.lon[j])
            dist[i, j] = dist[j, i] = d
    np.fill_diagonal(dist, np.inf)
    adj = np.zeros((n, n))
    for i in range(n):
        nearest = np.argsort(dist[i], kind="stable")[:k]
        adj[i, nearest] = 1.0
    adj = np.maximum(adj, adj.T)
    return Gso(adj, GsoFamily.ADJACENCY, symmetric=True)


def ingest_station_csv(
    path,
    value_column: str = "value",
    interpolate: bool = True,
    min_measurements: int = 1,
    normalize: bool = False,
) -> StationDataset:
    """Load a station/date/value CSV into an aligned, gap-free panel.

    Expected columns: station, date, lat, lon, <value_column>, and an
    optional units column. Interior gaps are filled by linear
    interpolation; leading/trailing gaps by nearest-value extension.
    Stations with fewer than min_measurements raw values are dropped;
    an empty result raises.
    """
    df = pd.read_csv(path)
    required = {"station", "date", "lat", "lon", value_column}
    missing = required - set(df.columns)
    if missing:
        raise ValueError(f"input CSV lacks columns: {sorted(missing)}")
    counts = df.dropna(subset=[value_column]).groupby("station")[value_column].count()
    keep = sorted(counts[counts >= min_measurements].index)
    if not keep:
        raise ValueError(f"no station has at least {min_measurements} measurements")
    df = df[df["station"].isin(keep)]
    panel = df.pivot_table(index="date", columns="station", values=value_column, aggfunc="mean")
    panel = panel.sort_index().reindex(columns=keep)
    if interpolate:
        panel = panel.interpolate(method="linear", limit_area="inside", axis=0)
        panel = panel.ffill(axis=0).bfill(axis=0)
    if panel.isna().any().any():
        raise ValueError("missing values remain; rerun with interpolate=True")
    coords = df.drop_duplicates("station").set_index("station")
    lat = np.array([float(coords.loc[s, "lat"]) for s in keep])
    lon = np.array([float(coords.loc[s, "lon"]) for s in keep])
    values = panel.to_numpy(dtype=float)
    if normalize:
        norms = np.linalg.norm(values, axis=0)
        if np.any(norms == 0.0):
            raise ValueError("cannot unit-normalize an all-zero station series")
        values = values / norms
    units = str(df["units"].iloc[0]) if "units" in df.columns else ""
    return StationDataset(
        ids=[str(s) for s in keep],
        lat=lat,
        lon=lon,
        values=values,
        times=[str(t) for t in panel.index],
        units=units,
    )
