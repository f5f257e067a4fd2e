"""Experiment configuration: JSON schema validation, parsing and serialization.

The schema lives in ``schema/config.schema.json``.  Optional blocks that are
absent stay ``None`` so that ``config_to_dict(parse_config(d))`` reproduces
``d`` up to key order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema

from .algorithms import AlgorithmSpec, ChangeSchedule, StepSwitch
from .errors import ConfigError
from .noise import NoiseModel, noise_from_dict, noise_to_dict

SCHEMA_VERSION = 1


@lru_cache(maxsize=1)
def load_schema() -> dict:
    text = resources.files("gsphqc").joinpath("schema/config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class GraphSpec:
    source: str
    node_count: Optional[int] = None
    seed: Optional[int] = None
    lat_range: Optional[tuple] = None
    lon_range: Optional[tuple] = None
    path: Optional[str] = None
    snapshot: Optional[int] = None

    def box(self):
        return (tuple(self.lat_range or (-30.0, -5.0)), tuple(self.lon_range or (-60.0, -35.0)))


@dataclass(frozen=True)
class SamplingSpec:
    strategy: str
    seed: int


@dataclass(frozen=True)
class SignalSpec:
    amplitude: float
    seed: int


@dataclass(frozen=True)
class SweepSpec:
    algorithm: str
    tau: Optional[tuple] = None
    mu: Optional[tuple] = None


@dataclass(frozen=True)
class PredictSpec:
    iterations_per_step: int
    seed: int


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphSpec
    K: int
    theta: float
    F_count: int
    sample_count: int
    sampling: SamplingSpec
    noise: NoiseModel
    algorithms: list
    iterations: int
    trials: int
    output_dir: str
    signal: Optional[SignalSpec] = None
    workers: Optional[int] = None
    initial_estimate: Optional[tuple] = None
    change_schedule: Optional[ChangeSchedule] = None
    step_switch: Optional[StepSwitch] = None
    sweep: Optional[SweepSpec] = None
    predict: Optional[PredictSpec] = None
    base_dir: Optional[str] = field(default=None, compare=False)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() or self.base_dir is None else Path(self.base_dir) / p

    @property
    def data_path(self) -> Optional[Path]:
        return None if self.graph.path is None else self.resolve(self.graph.path)

    @property
    def output_path(self) -> Path:
        return self.resolve(self.output_dir)

    @property
    def worker_count(self) -> int:
        return self.workers or 1


def schema_errors(data) -> list:
    """Human-readable schema violations, empty when ``data`` conforms."""
    v = jsonschema.Draft202012Validator(load_schema())
    out = []
    for err in sorted(v.iter_errors(data), key=lambda e: list(e.absolute_path)):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        out.append(f"{where}: {err.message}")
    return out


def _opt_tuple(x):
    return None if x is None else tuple(x)


def parse_config(data: dict, base_dir=None) -> ExperimentConfig:
    """Validate ``data`` against the schema and cross-field rules."""
    errs = schema_errors(data)
    if errs:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errs))
    g = data["graph"]
    graph = GraphSpec(g["source"], g.get("node_count"), g.get("seed"), _opt_tuple(g.get("lat_range")),
                      _opt_tuple(g.get("lon_range")), g.get("path"), g.get("snapshot"))
    algos = [AlgorithmSpec(a["kind"], a["mu"], a.get("tau"), a.get("alpha"), a.get("lam"), a.get("name"))
             for a in data["algorithms"]]
    sw = data.get("sweep")
    cs, ss, pr, sig = (data.get(k) for k in ("change_schedule", "step_switch", "predict", "signal"))
    cfg = ExperimentConfig(
        graph=graph,
        K=data["K"],
        theta=float(data["theta"]),
        F_count=data["F_count"],
        sample_count=data["sample_count"],
        sampling=SamplingSpec(data["sampling"]["strategy"], data["sampling"]["seed"]),
        noise=noise_from_dict(data["noise"]),
        algorithms=algos,
        iterations=data["iterations"],
        trials=data["trials"],
        output_dir=data["output"]["dir"],
        signal=None if sig is None else SignalSpec(float(sig["amplitude"]), sig["seed"]),
        workers=data.get("workers"),
        initial_estimate=_opt_tuple(data.get("initial_estimate")),
        change_schedule=None if cs is None else ChangeSchedule(cs["iteration"], float(cs["factor"])),
        step_switch=None if ss is None else StepSwitch(ss["start"], float(ss["multiple"])),
        sweep=None if sw is None else SweepSpec(sw["algorithm"], _opt_tuple(sw.get("tau")), _opt_tuple(sw.get("mu"))),
        predict=None if pr is None else PredictSpec(pr["iterations_per_step"], pr["seed"]),
        base_dir=None if base_dir is None else str(base_dir),
    )
    _check_semantics(cfg)
    return cfg


def _check_semantics(cfg: ExperimentConfig) -> None:
    problems = []
    if cfg.F_count > cfg.sample_count:
        problems.append(f"F_count={cfg.F_count} exceeds sample_count={cfg.sample_count}")
    if cfg.graph.source == "synthetic":
        n = cfg.graph.node_count
        if cfg.signal is None:
            problems.append("a synthetic graph needs a 'signal' block")
        if cfg.sample_count > n:
            problems.append(f"sample_count={cfg.sample_count} exceeds node_count={n}")
        if cfg.K >= n:
            problems.append(f"K={cfg.K} must be smaller than node_count={n}")
        if cfg.initial_estimate is not None and len(cfg.initial_estimate) != n:
            problems.append(f"initial_estimate has {len(cfg.initial_estimate)} entries, expected {n}")
        for name, r in (("lat_range", cfg.graph.lat_range), ("lon_range", cfg.graph.lon_range)):
            lim = 90.0 if name == "lat_range" else 180.0
            if r is not None and not (-lim <= r[0] < r[1] <= lim):
                problems.append(f"{name} must be increasing within [-{lim:g}, {lim:g}]")
    names = [a.name for a in cfg.algorithms]
    if len(set(names)) != len(names):
        problems.append(f"algorithm names must be unique, got {names}")
    if cfg.change_schedule is not None and cfg.change_schedule.iteration >= cfg.iterations:
        problems.append("change_schedule.iteration must be < iterations")
    if cfg.step_switch is not None and cfg.step_switch.start >= cfg.iterations:
        problems.append("step_switch.start must be < iterations")
    if cfg.sweep is not None:
        match = [a for a in cfg.algorithms if a.name == cfg.sweep.algorithm]
        if not match:
            problems.append(f"sweep.algorithm {cfg.sweep.algorithm!r} is not a configured algorithm name")
        elif cfg.sweep.tau is not None and match[0].kind != "HQC":
            problems.append("a tau grid only applies to an HQC algorithm")
    if problems:
        raise ConfigError("invalid config:\n  " + "\n  ".join(problems))


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def config_to_dict(cfg: ExperimentConfig) -> dict:
    g = cfg.graph
    out = {
        "schema_version": SCHEMA_VERSION,
        "graph": _drop_none({"source": g.source, "node_count": g.node_count, "seed": g.seed,
                             "lat_range": None if g.lat_range is None else list(g.lat_range),
                             "lon_range": None if g.lon_range is None else list(g.lon_range),
                             "path": g.path, "snapshot": g.snapshot}),
        "K": cfg.K,
        "theta": cfg.theta,
        "F_count": cfg.F_count,
        "sample_count": cfg.sample_count,
        "sampling": {"strategy": cfg.sampling.strategy, "seed": cfg.sampling.seed},
        "noise": noise_to_dict(cfg.noise),
        "algorithms": [_drop_none({"kind": a.kind, "mu": a.mu, "tau": a.tau, "alpha": a.alpha,
                                   "lam": a.lam, "name": None if a.name == a.kind else a.name})
                       for a in cfg.algorithms],
        "iterations": cfg.iterations,
        "trials": cfg.trials,
        "output": {"dir": cfg.output_dir},
    }
    if cfg.signal is not None:
        out["signal"] = {"amplitude": cfg.signal.amplitude, "seed": cfg.signal.seed}
    if cfg.workers is not None:
        out["workers"] = cfg.workers
    if cfg.initial_estimate is not None:
        out["initial_estimate"] = list(cfg.initial_estimate)
    if cfg.change_schedule is not None:
        out["change_schedule"] = {"iteration": cfg.change_schedule.iteration, "factor": cfg.change_schedule.factor}
    if cfg.step_switch is not None:
        out["step_switch"] = {"start": cfg.step_switch.start, "multiple": cfg.step_switch.multiple}
    if cfg.sweep is not None:
        out["sweep"] = _drop_none({"algorithm": cfg.sweep.algorithm,
                                   "tau": None if cfg.sweep.tau is None else list(cfg.sweep.tau),
                                   "mu": None if cfg.sweep.mu is None else list(cfg.sweep.mu)})
    if cfg.predict is not None:
        out["predict"] = {"iterations_per_step": cfg.predict.iterations_per_step, "seed": cfg.predict.seed}
    return out


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return parse_config(data, base_dir=path.resolve().parent)


def dump_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n", encoding="utf-8")
