"""Scenario configuration: JSON <-> scheme and limit-law objects."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any

from . import distributions as dist
from . import index_laws as il
from . import nvm
from .scheme import (Alternating, Constant, DoubleArrayScheme, General, IndexRule, PowerLaw,
                     RateRule, Theorem4)

DEFAULT_SHAPES = {
    "normal": dist.Normal(0.0, 1.0),
    "uniform": dist.Uniform(-1.0, 1.0),
    "two_point": dist.TwoPoint(-1.0, 3.0, 0.75),
    "shifted_exponential": dist.ShiftedExponential(1.0, 0.0),
}

SCENARIO_FIELDS = {"name", "mode", "rho", "beta", "alpha", "variances", "shape", "index",
                   "limit", "n_grid", "replicates", "seed", "T", "T_sweep", "eps_sweep",
                   "tail_eps", "max_atoms"}


class ConfigError(ValueError):
    """Invalid scenario configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class Scenario:
    name: str
    scheme: DoubleArrayScheme
    limit: nvm.NVMixture
    n_grid: list
    replicates: int = 100_000
    seed: int = 42
    T: float = 5.0
    T_sweep: list = field(default_factory=lambda: [1.0, 5.0, 10.0])
    eps_sweep: list = field(default_factory=lambda: [0.01, 0.05, 0.1, 0.5])
    raw: dict = field(default_factory=dict, repr=False)


def _number(cfg: dict, key: str, where: str, default=None, positive=False) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"{where}.{key}", "missing required field")
        return default
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {val!r}")
    if positive and not val > 0:
        raise ConfigError(f"{where}.{key}", f"must be positive, got {val}")
    return float(val)


def _rate_rule(cfg: Any, where: str) -> RateRule:
    if isinstance(cfg, (int, float)) and not isinstance(cfg, bool):
        return RateRule(float(cfg))
    if not isinstance(cfg, dict):
        raise ConfigError(where, "expected {\"const\": a} or {\"const\": a, \"c\": c}")
    extra = set(cfg) - {"const", "c"}
    if extra:
        raise ConfigError(where, f"unknown fields {sorted(extra)}")
    return RateRule(_number(cfg, "const", where), _number(cfg, "c", where, default=0.0))


def _variances(cfg: Any) -> Constant | Alternating | PowerLaw:
    where = "variances"
    if not isinstance(cfg, dict):
        raise ConfigError(where, "expected an object with a 'pattern' field")
    pattern = cfg.get("pattern")
    try:
        if pattern == "constant":
            return Constant(_number(cfg, "sigma", where, default=1.0))
        if pattern == "alternating":
            return Alternating(_number(cfg, "a", where), _number(cfg, "b", where))
        if pattern == "power_law":
            return PowerLaw(_number(cfg, "sigma", where, default=1.0),
                            _number(cfg, "gamma", where))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(where, str(exc)) from None
    raise ConfigError(f"{where}.pattern",
                      f"expected constant, alternating or power_law, got {pattern!r}")


def _shape(cfg: Any) -> dist.SummandFamily:
    if isinstance(cfg, str):
        if cfg not in DEFAULT_SHAPES:
            raise ConfigError("shape", f"expected one of {sorted(DEFAULT_SHAPES)}, got {cfg!r}")
        return DEFAULT_SHAPES[cfg]
    if isinstance(cfg, dict):
        try:
            return dist.from_config(cfg)
        except ValueError as exc:
            raise ConfigError("shape", str(exc)) from None
    raise ConfigError("shape", "expected a family name or a family object")


def _index(cfg: Any) -> IndexRule:
    where = "index"
    if not isinstance(cfg, dict):
        raise ConfigError(where, "expected an object with an 'index' field")
    kind = cfg.get("index")
    scaled = "mean_per_n" in cfg
    try:
        if kind == "deterministic":
            if scaled:
                return IndexRule(kind, mean_per_n=_number(cfg, "mean_per_n", where, positive=True))
            k = _number(cfg, "k", where, positive=True)
            if k != int(k):
                raise ConfigError(f"{where}.k", "must be an integer")
            return IndexRule(kind, fixed=il.Deterministic(int(k)))
        if kind == "geometric":
            if scaled:
                return IndexRule(kind, mean_per_n=_number(cfg, "mean_per_n", where, positive=True))
            return IndexRule(kind, fixed=il.Geometric(_number(cfg, "p", where)))
        if kind == "mixed_poisson_gamma":
            r = _number(cfg, "r", where, positive=True)
            if scaled:
                return IndexRule(kind, mean_per_n=_number(cfg, "mean_per_n", where, positive=True),
                                 r=r)
            return IndexRule(kind, fixed=il.MixedPoissonGamma(r, _number(cfg, "mean", where)))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None
    raise ConfigError(f"{where}.index",
                      f"expected deterministic, geometric or mixed_poisson_gamma, got {kind!r}")


def scheme_from_config(cfg: dict) -> DoubleArrayScheme:
    mode_name = cfg.get("mode", "theorem4")
    if mode_name == "theorem4":
        mode = Theorem4()
    elif mode_name == "general":
        rho = _number(cfg, "rho", "scenario", default=1.0, positive=True)
        mode = General(rho, _rate_rule(cfg.get("beta", 0.0), "beta"))
    else:
        raise ConfigError("mode", f"expected theorem4 or general, got {mode_name!r}")
    kwargs = {}
    if "tail_eps" in cfg:
        eps = _number(cfg, "tail_eps", "scenario")
        if not 0 < eps <= 1e-6:
            raise ConfigError("tail_eps", "must lie in (0, 1e-6]")
        kwargs["tail_eps"] = eps
    if "max_atoms" in cfg:
        kwargs["max_atoms"] = int(_number(cfg, "max_atoms", "scenario", positive=True))
    for key in ("variances", "shape", "index"):
        if key not in cfg:
            raise ConfigError(key, "missing required field")
    return DoubleArrayScheme(
        shape=_shape(cfg["shape"]),
        variances=_variances(cfg["variances"]),
        index=_index(cfg["index"]),
        alpha=_rate_rule(cfg.get("alpha", 0.0), "alpha"),
        mode=mode,
        **kwargs,
    )


def _number_list(cfg: dict, key: str, default: list, positive=True) -> list:
    if key not in cfg:
        return list(default)
    vals = cfg[key]
    if not isinstance(vals, list) or not vals:
        raise ConfigError(key, "expected a nonempty list of numbers")
    for i, v in enumerate(vals):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (positive and not v > 0):
            raise ConfigError(f"{key}[{i}]", f"expected a positive number, got {v!r}")
    return [float(v) for v in vals]


def scenario_from_config(cfg: dict) -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigError("scenario", "expected a JSON object")
    unknown = set(cfg) - SCENARIO_FIELDS
    if unknown:
        raise ConfigError("scenario", f"unknown fields {sorted(unknown)}")
    scheme = scheme_from_config(cfg)
    if "limit" not in cfg:
        raise ConfigError("limit", "missing required field")
    try:
        limit = nvm.from_config(cfg["limit"])
    except (ValueError, TypeError) as exc:
        raise ConfigError("limit", str(exc)) from None
    grid = cfg.get("n_grid", [10, 100, 1000])
    if (not isinstance(grid, list) or not grid
            or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in grid)):
        raise ConfigError("n_grid", "expected a nonempty list of positive integers")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("n_grid", "must be strictly increasing")
    replicates = cfg.get("replicates", 100_000)
    if isinstance(replicates, bool) or not isinstance(replicates, int) or replicates < 1000:
        raise ConfigError("replicates", "expected an integer >= 1000")
    seed = cfg.get("seed", 42)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", "expected a nonnegative integer")
    T = _number(cfg, "T", "scenario", default=5.0, positive=True)
    return Scenario(
        name=str(cfg.get("name", "custom")),
        scheme=scheme,
        limit=limit,
        n_grid=list(grid),
        replicates=replicates,
        seed=seed,
        T=T,
        T_sweep=_number_list(cfg, "T_sweep", [1.0, 5.0, 10.0]),
        eps_sweep=_number_list(cfg, "eps_sweep", [0.01, 0.05, 0.1, 0.5]),
        raw=copy.deepcopy(cfg),
    )


PRESETS = {
    "classical": {
        "name": "classical",
        "mode": "theorem4",
        "alpha": {"const": 0.0},
        "variances": {"pattern": "constant", "sigma": 1.0},
        "shape": "normal",
        "index": {"index": "deterministic", "mean_per_n": 1.0},
        "limit": {"mixing": {"law": "dirac", "w": 1.0}, "alpha": 0.0, "beta": 0.0},
    },
    "geometric-laplace": {
        "name": "geometric-laplace",
        "mode": "theorem4",
        "alpha": {"const": 1.0},
        "variances": {"pattern": "constant", "sigma": 1.0},
        "shape": "normal",
        "index": {"index": "geometric", "mean_per_n": 1.0},
        "limit": {"mixing": {"law": "exponential", "rate": 1.0}, "alpha": 1.0, "beta": 0.0},
    },
    "mixed-poisson-vg": {
        "name": "mixed-poisson-vg",
        "mode": "theorem4",
        "alpha": {"const": 1.0},
        "variances": {"pattern": "constant", "sigma": 1.0},
        "shape": "uniform",
        "index": {"index": "mixed_poisson_gamma", "r": 2.0, "mean_per_n": 1.0},
        "limit": {"mixing": {"law": "gamma", "shape": 2.0, "rate": 2.0}, "alpha": 1.0,
                  "beta": 0.0},
    },
    "heterogeneous-laplace": {
        "name": "heterogeneous-laplace",
        "mode": "theorem4",
        "alpha": {"const": 1.0},
        "variances": {"pattern": "alternating", "a": 1.0, "b": 2.0},
        "shape": {"family": "two_point", "x1": -1.0, "x2": 3.0, "p": 0.75},
        "index": {"index": "geometric", "mean_per_n": 1.0},
        "limit": {"mixing": {"law": "exponential", "rate": 1.0}, "alpha": 1.0, "beta": 0.0},
    },
}

_PRESET_COMMON = {"n_grid": [10, 100, 1000], "replicates": 100_000, "seed": 42, "T": 5.0,
                  "T_sweep": [1.0, 5.0, 10.0], "eps_sweep": [0.01, 0.05, 0.1, 0.5]}


def preset_config(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return {**copy.deepcopy(PRESETS[name]), **copy.deepcopy(_PRESET_COMMON)}


def preset(name: str) -> Scenario:
    return scenario_from_config(preset_config(name))
