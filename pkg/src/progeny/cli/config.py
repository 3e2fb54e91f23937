"""Experiment configs: TOML manifests describing model, simulation,
sweep, outputs, and numeric overrides.

Example::

    [model]
    type = "model1"        # model1 | model2 | sir | linear | custom
    lambda = 1000.0
    mu = 1.0

    [sim]
    replicates = 5000
    master_seed = 42
    eps_list = [1, 2]
    grid = { start = 0.0, stop = 20.0, points = 101 }

    [sweep]
    parameter = "lambda"
    values = [200, 400, 600, 800, 1000]   # or spec = "200:1000:200"

    [outputs]
    directory = "out"
    csv = true
    svg = false
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError, ExprSyntaxError
from ..fluid import NumericOptions
from ..models import (
    SIR,
    Custom,
    LinearBDP,
    Model1,
    Model2,
    RateModel,
    custom_from_strings,
    validate,
)
from ..ssa import SimCaps

__all__ = ["ExperimentConfig", "SimSettings", "SweepSettings", "OutputSettings", "load_config"]

# TOML key -> dataclass field, per model type
_MODEL_FIELDS = {
    "model1": {"lambda": "lam", "mu": "mu"},
    "model2": {"lambda": "lam", "alpha": "alpha", "mu": "mu"},
    "sir": {"beta": "beta", "gamma": "gamma", "n_pop": "n_pop"},
    "linear": {"b": "b", "d": "d"},
}
_MODEL_TYPES = {
    "model1": Model1,
    "model2": Model2,
    "sir": SIR,
    "linear": LinearBDP,
}


@dataclass(frozen=True)
class SimSettings:
    replicates: int
    master_seed: int
    caps: SimCaps
    grid: np.ndarray | None
    eps_list: tuple[int, ...]


@dataclass(frozen=True)
class SweepSettings:
    parameter: str  # TOML-level name, e.g. "lambda"
    field: str  # dataclass field, e.g. "lam"
    values: tuple[float, ...]


@dataclass(frozen=True)
class OutputSettings:
    directory: Path
    csv: bool = True
    svg: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    model: RateModel
    sim: SimSettings
    sweep: SweepSettings | None
    outputs: OutputSettings
    numeric: NumericOptions

    def model_at(self, value: float) -> RateModel:
        """The model with the swept parameter replaced by `value`."""
        if self.sweep is None:
            raise ConfigError("config has no sweep block")
        kwargs = {self.sweep.field: value}
        if self.sweep.field == "n_pop":
            kwargs["n_pop"] = int(value)
        return dataclasses.replace(self.model, **kwargs)


def _build_model(block: dict, errors: list[str]) -> RateModel | None:
    mtype = block.get("type")
    if not isinstance(mtype, str) or mtype not in (*_MODEL_TYPES, "custom"):
        errors.append(
            f"[model] type must be one of {sorted((*_MODEL_TYPES, 'custom'))}, got {mtype!r}"
        )
        return None
    known = {"type"}
    if mtype == "custom":
        known |= {"b_expr", "d_expr", "x_max"}
        b, d = block.get("b_expr"), block.get("d_expr")
        if not isinstance(b, str) or not isinstance(d, str):
            errors.append("[model] custom requires string b_expr and d_expr")
            return None
        try:
            model = custom_from_strings(b, d, block.get("x_max"))
        except ExprSyntaxError as exc:
            errors.append(f"[model] expression error: {exc}")
            return None
    else:
        fields = _MODEL_FIELDS[mtype]
        known |= set(fields)
        kwargs = {}
        for key, field in fields.items():
            if key not in block:
                errors.append(f"[model] {mtype} requires key {key!r}")
                continue
            v = block[key]
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                errors.append(f"[model] {key} must be a number, got {v!r}")
                continue
            kwargs[field] = int(v) if field == "n_pop" else float(v)
        if len(kwargs) != len(fields):
            return None
        model = _MODEL_TYPES[mtype](**kwargs)
    for key in block:
        if key not in known:
            errors.append(f"[model] unknown key {key!r} for type {mtype!r}")
    return model


def _build_grid(spec, errors: list[str]) -> np.ndarray | None:
    if spec is None:
        return None
    if isinstance(spec, dict):
        try:
            start, stop, points = float(spec["start"]), float(spec["stop"]), int(spec["points"])
        except (KeyError, TypeError, ValueError):
            errors.append("[sim] grid dict needs numeric start, stop and integer points")
            return None
        if not (start >= 0 and stop > start and points >= 2):
            errors.append("[sim] grid needs start >= 0, stop > start, points >= 2")
            return None
        return np.linspace(start, stop, points)
    if isinstance(spec, list):
        try:
            g = np.asarray([float(v) for v in spec], dtype=np.float64)
        except (TypeError, ValueError):
            errors.append("[sim] grid list must contain numbers")
            return None
        if g.size and (g[0] < 0 or np.any(np.diff(g) <= 0)):
            errors.append("[sim] grid times must be non-negative and strictly increasing")
            return None
        return g
    errors.append(f"[sim] grid must be a list or {{start, stop, points}}, got {spec!r}")
    return None


def _parse_sweep_values(block: dict, errors: list[str]) -> tuple[float, ...]:
    if "values" in block and "spec" in block:
        errors.append("[sweep] give either values or spec, not both")
        return ()
    if "values" in block:
        vals = block["values"]
        if not isinstance(vals, list) or not vals:
            errors.append("[sweep] values must be a non-empty list")
            return ()
        try:
            return tuple(float(v) for v in vals)
        except (TypeError, ValueError):
            errors.append("[sweep] values must be numbers")
            return ()
    if "spec" in block:
        spec = block["spec"]
        parts = spec.split(":") if isinstance(spec, str) else []
        if len(parts) != 3:
            errors.append("[sweep] spec must look like 'start:stop:step'")
            return ()
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            errors.append(f"[sweep] non-numeric spec {spec!r}")
            return ()
        if step <= 0 or stop < start:
            errors.append("[sweep] spec needs step > 0 and stop >= start")
            return ()
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(n))
    errors.append("[sweep] requires values or spec")
    return ()


def load_config(path) -> ExperimentConfig:
    """Load and fully validate a TOML experiment config.

    All schema violations and model-validation violations are collected
    and reported together in the raised ConfigError.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error in {path}: {exc}") from exc

    errors: list[str] = []
    known_sections = {"model", "sim", "sweep", "outputs", "numeric"}
    for key in doc:
        if key not in known_sections:
            errors.append(f"unknown section [{key}]")

    model_block = doc.get("model")
    model = None
    if not isinstance(model_block, dict):
        errors.append("missing [model] section")
    else:
        model = _build_model(model_block, errors)
    if model is not None:
        errors.extend(f"[model] {v}" for v in validate(model))

    sim_block = doc.get("sim", {})
    if not isinstance(sim_block, dict):
        errors.append("[sim] must be a table")
        sim_block = {}
    replicates = sim_block.get("replicates", 1000)
    master_seed = sim_block.get("master_seed", 0)
    if not isinstance(replicates, int) or replicates < 1:
        errors.append(f"[sim] replicates must be a positive integer, got {replicates!r}")
        replicates = 1
    if not isinstance(master_seed, int):
        errors.append(f"[sim] master_seed must be an integer, got {master_seed!r}")
        master_seed = 0
    try:
        caps = SimCaps(
            max_events=int(sim_block.get("max_events", SimCaps.max_events)),
            max_time=float(sim_block.get("max_time", math.inf)),
            store_events=int(sim_block.get("store_events", SimCaps.store_events)),
        )
    except (TypeError, ValueError) as exc:
        errors.append(f"[sim] bad caps: {exc}")
        caps = SimCaps()
    grid = _build_grid(sim_block.get("grid"), errors)
    eps_raw = sim_block.get("eps_list", [1, 2])
    if (
        not isinstance(eps_raw, list)
        or any(not isinstance(e, int) or e < 1 for e in eps_raw)
    ):
        errors.append(f"[sim] eps_list must be a list of positive integers, got {eps_raw!r}")
        eps_raw = [1, 2]
    eps_list = tuple(sorted(set(eps_raw)))

    sweep = None
    if "sweep" in doc:
        sweep_block = doc["sweep"]
        if not isinstance(sweep_block, dict):
            errors.append("[sweep] must be a table")
        else:
            pname = sweep_block.get("parameter")
            values = _parse_sweep_values(sweep_block, errors)
            mtype = model_block.get("type") if isinstance(model_block, dict) else None
            fields = _MODEL_FIELDS.get(mtype, {})
            if not isinstance(pname, str) or pname not in fields:
                errors.append(
                    f"[sweep] parameter {pname!r} does not exist on model type {mtype!r}"
                    f" (choose from {sorted(fields)})"
                )
            elif values:
                sweep = SweepSettings(parameter=pname, field=fields[pname], values=values)

    out_block = doc.get("outputs", {})
    if not isinstance(out_block, dict):
        errors.append("[outputs] must be a table")
        out_block = {}
    outputs = OutputSettings(
        directory=Path(out_block.get("directory", "out")),
        csv=bool(out_block.get("csv", True)),
        svg=bool(out_block.get("svg", False)),
    )

    num_block = doc.get("numeric", {})
    if not isinstance(num_block, dict):
        errors.append("[numeric] must be a table")
        num_block = {}
    try:
        numeric = NumericOptions(
            **{
                k: (int(v) if k == "max_iters" else float(v))
                for k, v in num_block.items()
                if k in NumericOptions.__dataclass_fields__
            }
        )
    except ValueError as exc:
        errors.append(f"[numeric] {exc}")
        numeric = NumericOptions()
    for k in num_block:
        if k not in NumericOptions.__dataclass_fields__:
            errors.append(f"[numeric] unknown option {k!r}")

    if errors or model is None:
        raise ConfigError(
            f"invalid config {path}:\n" + "\n".join(f"  - {e}" for e in errors),
            violations=errors,
        )
    return ExperimentConfig(
        model=model,
        sim=SimSettings(
            replicates=replicates,
            master_seed=master_seed,
            caps=caps,
            grid=grid,
            eps_list=eps_list,
        ),
        sweep=sweep,
        outputs=outputs,
        numeric=numeric,
    )
