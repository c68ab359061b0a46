"""Scenario configuration: JSON schema, validation, and bundled setups.

A scenario file is a JSON object with the sections

    workspace  nx, ny, h, origin
    flow       v, lambda, effective_lambda (optional solver override)
    source     position, rate
    usv        start, speed
    sonde      threshold (or threshold_fraction auto-calibration),
               noise_std, sample_period, measure_mode
    planner    window_cells, sigma2_hit, sigma2_miss, detection_ceiling,
               prob_clip, local_radius_cells
    stopping   gamma, tau_m
    sim        dt, warmup_s, max_updates, max_sim_time_s
    seed       base RNG seed

Unknown keys are rejected so typos cannot silently fall back to defaults,
and every invariant violation is reported with its field path.
"""

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .field import FlowSpec, SourceSpec, max_stable_dt
from .grid import GridGeometry
from .planner import PlannerParams

MEASURE_MODES = ("on_arrival", "continuous")
_SCENARIO_DIR = Path(__file__).parent / "scenarios"
_MISSING = object()


class ScenarioError(ValueError):
    """Malformed or invalid scenario configuration."""


@dataclass(frozen=True)
class Scenario:
    geometry: GridGeometry
    flow: FlowSpec
    source: SourceSpec
    usv_start: tuple[float, float]
    usv_speed: float = 2.0
    effective_diffusivity_override: float | None = None
    sonde_threshold: float | None = None
    sonde_threshold_fraction: float = 0.01
    sonde_noise_std: float = 0.0
    sonde_sample_period: float = 1.0
    measure_mode: str = "on_arrival"
    planner: PlannerParams = PlannerParams()
    local_radius_cells: int = 5
    gamma: float = 0.99
    tau_m: float = 10.0
    dt: float = 1.0
    warmup_s: float = 300.0
    max_updates: int = 2000
    max_sim_time_s: float = 3600.0
    seed: int = 0
    source_sha256: str | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.geometry.contains(self.source.position):
            raise ScenarioError(
                f"source.position: {self.source.position} lies outside the workspace"
            )
        if not self.geometry.contains(self.usv_start):
            raise ScenarioError(f"usv.start: {self.usv_start} lies outside the workspace")
        if not self.usv_speed > 0:
            raise ScenarioError(f"usv.speed: must be positive, got {self.usv_speed}")
        if float(np.hypot(*self.flow.v)) == 0.0:
            raise ScenarioError("flow.v: tracking needs a nonzero wave velocity")
        if self.sonde_threshold is not None and not self.sonde_threshold > 0:
            raise ScenarioError("sonde.threshold: must be positive when given")
        if not 0 < self.sonde_threshold_fraction < 1:
            raise ScenarioError("sonde.threshold_fraction: must be in (0, 1)")
        if self.sonde_noise_std < 0:
            raise ScenarioError("sonde.noise_std: must be >= 0")
        if not self.sonde_sample_period > 0:
            raise ScenarioError("sonde.sample_period: must be positive")
        if self.measure_mode not in MEASURE_MODES:
            raise ScenarioError(
                f"sonde.measure_mode: expected one of {MEASURE_MODES}, got {self.measure_mode!r}"
            )
        if self.local_radius_cells < 0:
            raise ScenarioError("planner.local_radius_cells: must be >= 0")
        if not 0 < self.gamma < 1:
            raise ScenarioError(f"stopping.gamma: must be in (0, 1), got {self.gamma}")
        if not self.tau_m > 0:
            raise ScenarioError(f"stopping.tau_m: must be positive, got {self.tau_m}")
        if not self.dt > 0:
            raise ScenarioError(f"sim.dt: must be positive, got {self.dt}")
        bound = max_stable_dt(
            FlowSpec(self.flow.v, self.effective_diffusivity()), self.geometry, 1.0
        )
        if self.dt > bound * (1.0 + 1e-12):
            raise ScenarioError(f"sim.dt: {self.dt} exceeds the stability bound {bound:.6g}")
        if self.warmup_s < 0:
            raise ScenarioError("sim.warmup_s: must be >= 0")
        if self.max_updates < 0:
            raise ScenarioError("sim.max_updates: must be >= 0")
        if self.max_sim_time_s < 0:
            raise ScenarioError("sim.max_sim_time_s: must be >= 0")
        if self.effective_diffusivity_override is not None and self.effective_diffusivity_override < 0:
            raise ScenarioError("flow.effective_lambda: must be >= 0 when given")

    def effective_diffusivity(self) -> float:
        """Diffusivity the solver runs with (override wins over the molecular value)."""
        if self.effective_diffusivity_override is not None:
            return self.effective_diffusivity_override
        return self.flow.diffusivity

    def to_dict(self) -> dict:
        d = {
            "workspace": {
                "nx": self.geometry.nx,
                "ny": self.geometry.ny,
                "h": self.geometry.h,
                "origin": list(self.geometry.origin),
            },
            "flow": {"v": list(self.flow.v), "lambda": self.flow.diffusivity},
            "source": {"position": list(self.source.position), "rate": self.source.rate},
            "usv": {"start": list(self.usv_start), "speed": self.usv_speed},
            "sonde": {
                "threshold_fraction": self.sonde_threshold_fraction,
                "noise_std": self.sonde_noise_std,
                "sample_period": self.sonde_sample_period,
                "measure_mode": self.measure_mode,
            },
            "planner": {
                "window_cells": self.planner.window_cells,
                "sigma2_hit": self.planner.sigma2_hit,
                "sigma2_miss": self.planner.sigma2_miss,
                "detection_ceiling": self.planner.detection_ceiling,
                "prob_clip": self.planner.prob_clip,
                "local_radius_cells": self.local_radius_cells,
            },
            "stopping": {"gamma": self.gamma, "tau_m": self.tau_m},
            "sim": {
                "dt": self.dt,
                "warmup_s": self.warmup_s,
                "max_updates": self.max_updates,
                "max_sim_time_s": self.max_sim_time_s,
            },
            "seed": self.seed,
        }
        if self.effective_diffusivity_override is not None:
            d["flow"]["effective_lambda"] = self.effective_diffusivity_override
        if self.sonde_threshold is not None:
            d["sonde"]["threshold"] = self.sonde_threshold
        return d


def serialize_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario.to_dict(), indent=2) + "\n"


class _Section:
    """One schema section: tracks consumed keys and rejects unknown ones."""

    def __init__(self, name: str, data: dict):
        if not isinstance(data, dict):
            raise ScenarioError(f"{name}: expected an object, got {type(data).__name__}")
        self.name = name
        self.data = data
        self.seen: set[str] = set()

    def get(self, key, default=_MISSING):
        self.seen.add(key)
        if key in self.data:
            return self.data[key]
        if default is _MISSING:
            raise ScenarioError(f"{self.name}.{key}: required key missing")
        return default

    def finish(self):
        unknown = set(self.data) - self.seen
        if unknown:
            raise ScenarioError(f"{self.name}: unknown key(s) {sorted(unknown)}")


def _number(section, key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{section}.{key}: expected a number, got {value!r}")
    return float(value)


def _integer(section, key, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{section}.{key}: expected an integer, got {value!r}")
    return value


def _pair(section, key, value):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"{section}.{key}: expected a pair [x, y], got {value!r}")
    return (_number(section, key, value[0]), _number(section, key, value[1]))


def scenario_from_dict(data: dict, source_sha256: str | None = None) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError(f"scenario: expected a JSON object, got {type(data).__name__}")
    top = _Section("scenario", data)

    ws = _Section("workspace", top.get("workspace"))
    try:
        geometry = GridGeometry(
            nx=_integer("workspace", "nx", ws.get("nx")),
            ny=_integer("workspace", "ny", ws.get("ny")),
            h=_number("workspace", "h", ws.get("h")),
            origin=_pair("workspace", "origin", ws.get("origin", [0.0, 0.0])),
        )
    except ValueError as exc:
        raise ScenarioError(f"workspace: {exc}") from exc
    ws.finish()

    fl = _Section("flow", top.get("flow"))
    try:
        flow = FlowSpec(
            v=_pair("flow", "v", fl.get("v")),
            diffusivity=_number("flow", "lambda", fl.get("lambda", 4.9e-10)),
        )
    except ValueError as exc:
        raise ScenarioError(f"flow: {exc}") from exc
    eff = fl.get("effective_lambda", None)
    if eff is not None:
        eff = _number("flow", "effective_lambda", eff)
    fl.finish()

    src = _Section("source", top.get("source"))
    try:
        source = SourceSpec(
            position=_pair("source", "position", src.get("position")),
            rate=_number("source", "rate", src.get("rate")),
        )
    except ValueError as exc:
        raise ScenarioError(f"source: {exc}") from exc
    src.finish()

    usv = _Section("usv", top.get("usv"))
    usv_start = _pair("usv", "start", usv.get("start"))
    usv_speed = _number("usv", "speed", usv.get("speed", 2.0))
    usv.finish()

    sonde = _Section("sonde", top.get("sonde", {}))
    threshold = sonde.get("threshold", None)
    if threshold is not None:
        threshold = _number("sonde", "threshold", threshold)
    threshold_fraction = _number(
        "sonde", "threshold_fraction", sonde.get("threshold_fraction", 0.01)
    )
    noise_std = _number("sonde", "noise_std", sonde.get("noise_std", 0.0))
    sample_period = _number("sonde", "sample_period", sonde.get("sample_period", 1.0))
    measure_mode = sonde.get("measure_mode", "on_arrival")
    sonde.finish()

    pl = _Section("planner", top.get("planner", {}))
    try:
        planner = PlannerParams(
            window_cells=_integer("planner", "window_cells", pl.get("window_cells", 11)),
            sigma2_hit=_number("planner", "sigma2_hit", pl.get("sigma2_hit", 1.0)),
            sigma2_miss=_number("planner", "sigma2_miss", pl.get("sigma2_miss", 4.0)),
            detection_ceiling=_number(
                "planner", "detection_ceiling", pl.get("detection_ceiling", 1.0)
            ),
            prob_clip=_number("planner", "prob_clip", pl.get("prob_clip", 1e-6)),
        )
    except ValueError as exc:
        raise ScenarioError(f"planner: {exc}") from exc
    local_radius = _integer("planner", "local_radius_cells", pl.get("local_radius_cells", 5))
    pl.finish()

    stop = _Section("stopping", top.get("stopping", {}))
    gamma = _number("stopping", "gamma", stop.get("gamma", 0.99))
    tau_m = _number("stopping", "tau_m", stop.get("tau_m", 10.0))
    stop.finish()

    sim = _Section("sim", top.get("sim", {}))
    dt = _number("sim", "dt", sim.get("dt", 1.0))
    warmup_s = _number("sim", "warmup_s", sim.get("warmup_s", 300.0))
    max_updates = _integer("sim", "max_updates", sim.get("max_updates", 2000))
    max_sim_time_s = _number("sim", "max_sim_time_s", sim.get("max_sim_time_s", 3600.0))
    sim.finish()

    seed = _integer("scenario", "seed", top.get("seed", 0))
    top.finish()

    return Scenario(
        geometry=geometry,
        flow=flow,
        source=source,
        usv_start=usv_start,
        usv_speed=usv_speed,
        effective_diffusivity_override=eff,
        sonde_threshold=threshold,
        sonde_threshold_fraction=threshold_fraction,
        sonde_noise_std=noise_std,
        sonde_sample_period=sample_period,
        measure_mode=measure_mode,
        planner=planner,
        local_radius_cells=local_radius,
        gamma=gamma,
        tau_m=tau_m,
        dt=dt,
        warmup_s=warmup_s,
        max_updates=max_updates,
        max_sim_time_s=max_sim_time_s,
        seed=seed,
        source_sha256=source_sha256,
    )


def bundled_scenario_names() -> list[str]:
    return sorted(p.stem for p in _SCENARIO_DIR.glob("*.json"))


def resolve_scenario_path(name_or_path) -> Path:
    """Accept a filesystem path or the bare name of a bundled scenario."""
    path = Path(name_or_path)
    if path.exists():
        return path
    bundled = _SCENARIO_DIR / f"{path.name}.json"
    if bundled.exists():
        return bundled
    raise ScenarioError(
        f"scenario {name_or_path!r} is neither a file nor a bundled scenario "
        f"(bundled: {', '.join(bundled_scenario_names())})"
    )


def parse_scenario(name_or_path) -> Scenario:
    """Load and validate a scenario file; defaults fill absent optional keys."""
    path = resolve_scenario_path(name_or_path)
    raw = path.read_bytes()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    sha = hashlib.sha256(raw).hexdigest()
    try:
        return scenario_from_dict(data, source_sha256=sha)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    if seed == scenario.seed:
        return scenario
    return replace(scenario, seed=seed)
