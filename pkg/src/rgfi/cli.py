"""Command-line entry points.

Failures print a one-line JSON object {"error": ..., "message": ...}
to stderr and exit nonzero, so scripted callers can branch on them.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .config import SolverConfig
from .experiments import (
    ExperimentConfig,
    forecast_experiment,
    ingest_station_csv,
    knn_graph,
    run_experiment,
)
from .fileio import load_graph, load_signals, save_dense
from .solver import rfi_alternating


def _fail(exc: Exception):
    click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}), err=True)
    sys.exit(2)


@click.group()
def main():
    """Robust graph-filter identification and graph denoising."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--fast", is_flag=True, help="Cap realizations at 32.")
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Override the base seed.")
def run(config_path, fast, out_dir, seed):
    """Run a sweep experiment described by a config file."""
    try:
        cfg = ExperimentConfig.from_file(config_path)
        paths = run_experiment(cfg, out_dir=out_dir, fast=fast, base_seed=seed)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(exc)
    for name in ("results", "summary", "timing"):
        click.echo(f"{name}: {paths[name]}")


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--x", "x_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--y", "y_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--order", type=int, default=None, help="Filter order for coefficient recovery.")
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False))
def denoise(graph_path, x_path, y_path, config_path, order, out_dir):
    """Identify a filter and denoise the graph from observed signals."""
    try:
        s_bar = load_graph(graph_path)
        x = load_signals(x_path)
        y = load_signals(y_path)
        cfg = SolverConfig() if config_path is None else SolverConfig.from_file(config_path)
        res = rfi_alternating(x, y, s_bar, cfg, order=order)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_dense(res.S_hat, out / "s_hat.csv")
        save_dense(res.H_hat, out / "h_hat_matrix.csv")
        save_dense(res.h_hat[:, None], out / "h_hat_coeffs.csv")
        res.trace.to_csv(out / "trace.csv")
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(exc)
    click.echo(
        json.dumps(
            {
                "converged": res.converged,
                "final_objective": res.trace.final_objective,
                "outputs": [str(out / f) for f in ("s_hat.csv", "h_hat_matrix.csv", "h_hat_coeffs.csv", "trace.csv")],
            }
        )
    )


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", "memory", required=True, type=int, help="AR memory.")
@click.option("--tts", required=True, type=float, help="Train fraction.")
@click.option("--horizon", required=True, type=int)
@click.option("--value-column", default="value", show_default=True)
@click.option("--knn", default=5, show_default=True, help="Neighbors of the station graph.")
@click.option("--min-measurements", default=1, show_default=True)
@click.option("--normalize/--no-normalize", default=True, show_default=True)
@click.option("--methods", default=None, help="Comma-separated method ids.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--order", type=int, default=5, show_default=True, help="Filter order of LS-GF.")
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False))
def forecast(
    data_path,
    memory,
    tts,
    horizon,
    value_column,
    knn,
    min_measurements,
    normalize,
    methods,
    config_path,
    order,
    out_dir,
):
    """Forecast station measurements with graph-aware AR baselines."""
    try:
        dataset = ingest_station_csv(
            data_path,
            value_column=value_column,
            min_measurements=min_measurements,
            normalize=normalize,
        )
        s_bar = knn_graph(dataset, knn)
        if methods is None:
            method_list = [f"AR{memory}-RFI", "RFI", "LS", "LS-GF", "Copy-Prev-Day", "LS-Eval"]
        else:
            method_list = [m.strip() for m in methods.split(",") if m.strip()]
        cfg = SolverConfig() if config_path is None else SolverConfig.from_file(config_path)
        errors = forecast_experiment(
            dataset.values, s_bar, memory, tts, horizon, method_list, config=cfg, order=order
        )
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "forecast.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "ferr"])
            for name in sorted(errors):
                writer.writerow([name, f"{errors[name]:.12g}"])
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(exc)
    click.echo(json.dumps({"stations": dataset.n, "results": str(path), **{k: errors[k] for k in sorted(errors)}}))


if __name__ == "__main__":
    main()
