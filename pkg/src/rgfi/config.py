"""Solver configuration objects and their flat key = value file format.

Config files are plain text, one `key = value` per line, `#` comments
allowed. Keys match the dataclass field names exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .graphs import GsoFamily

_OUTER_STOP_REL = 1e-6  # early-stop threshold on relative objective change


@dataclass
class SolverConfig:
    """Hyperparameters of the robust identification solvers.

    Attributes:
        lam: weight on the (reweighted) proximity term to the observed graph.
        beta: weight on the (reweighted) sparsity term.
        gamma0: initial commutativity weight.
        gamma_growth: geometric growth factor of the commutativity weight
            per outer iteration (1 keeps it fixed).
        gamma_max: cap of the commutativity weight schedule.
        delta1, delta2: offsets of the logarithmic penalties (must be > 0).
        t_max: outer alternating iterations.
        inner_tol: relative objective-change tolerance of the denoising
            coordinate descent.
        inner_max: sweep cap of the denoising coordinate descent.
        rho_x, rho_y: penalty weights of the input/output covariance
            commutation terms used by the stationarity-aware variant.
        rho_h: optional weight of the output-covariance commutation
            penalty added to the filter step (0 disables it).
        family: structural family of the optimized graph ("adjacency").
        symmetric: optimize over symmetric matrices (paired entries).
        reweight: use majorization-minimization reweighting; False keeps
            plain l1 weights.
    """

    lam: float = 1e-3
    beta: float = 1e-4
    gamma0: float = 1.0
    gamma_growth: float = 2.0
    gamma_max: float = 1e4
    delta1: float = 1e-3
    delta2: float = 1e-3
    t_max: int = 20
    inner_tol: float = 1e-9
    inner_max: int = 200
    rho_x: float = 1.0
    rho_y: float = 1.0
    rho_h: float = 0.0
    family: str = "adjacency"
    symmetric: bool = True
    reweight: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("lam", "beta", "gamma0", "gamma_max", "rho_x", "rho_y", "rho_h"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.delta1 <= 0 or self.delta2 <= 0:
            raise ValueError("delta1 and delta2 must be positive")
        if self.t_max < 1:
            raise ValueError("t_max must be at least 1")
        if self.gamma_growth <= 0:
            raise ValueError("gamma_growth must be positive")
        if self.inner_max < 1:
            raise ValueError("inner_max must be at least 1")
        GsoFamily(self.family)  # raises on unknown family

    def gamma(self, t: int) -> float:
        """Commutativity weight at outer iteration t (geometric ramp, capped)."""
        return float(min(self.gamma0 * self.gamma_growth**t, self.gamma_max))

    # ------------------------- serialization ------------------------- #

    def to_file(self, path) -> None:
        with open(path, "w") as fh:
            for f in dataclasses.fields(self):
                fh.write(f"{f.name} = {_format_value(getattr(self, f.name))}\n")

    @classmethod
    def from_file(cls, path) -> "SolverConfig":
        return cls(**_read_kv(path, cls))


@dataclass
class EfficientConfig(SolverConfig):
    """SolverConfig plus the inner budgets of the reduced-complexity solver.

    Attributes:
        tau_max1: gradient-descent iterations of the filter step.
        tau_max2: coordinate-descent sweeps of the denoising step.
        mu: gradient step size, or "auto" for 1/L with L an upper bound
            on the curvature.
    """

    tau_max1: int = 100
    tau_max2: int = 100
    mu: float | str = "auto"

    def validate(self):
        super().validate()
        if self.tau_max1 < 1 or self.tau_max2 < 1:
            raise ValueError("tau_max1 and tau_max2 must be at least 1")
        if self.mu != "auto" and float(self.mu) <= 0:
            raise ValueError('mu must be positive or "auto"')


# ---------------------------------------------------------------- #
#                      flat key = value parsing                    #
# ---------------------------------------------------------------- #


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def parse_kv_lines(lines) -> dict[str, str]:
    """Parse `key = value` lines into a raw string dict."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def coerce_value(raw: str, target_type):
    """Convert a raw config string to the annotated field type."""
    if target_type is bool or target_type == "bool":
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"cannot parse boolean from {raw!r}")
    if target_type is int or target_type == "int":
        return int(raw)
    if target_type is float or target_type == "float":
        return float(raw)
    if raw.lower() == "auto":
        return "auto"
    # union fields (e.g. mu) and plain strings fall through here
    try:
        return float(raw) if ("float" in str(target_type)) else raw
    except ValueError:
        return raw


def _read_kv(path, cls) -> dict:
    with open(path) as fh:
        raw = parse_kv_lines(fh)
    field_map = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, val in raw.items():
        if key not in field_map:
            raise ValueError(f"unknown config key {key!r} for {cls.__name__}")
        kwargs[key] = coerce_value(val, field_map[key].type)
    return kwargs
