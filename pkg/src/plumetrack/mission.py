"""Closed tracking loop with in-process action semantics.

A mission owns the warmed-up plume field, the vehicle, the grid belief and
the planner, and iterates measure, update, plan, navigate until the credible
interval termination test passes, a budget runs out, or the goal is
cancelled. Feedback is emitted exactly once per belief update. Cancellation
is a flag checked at update boundaries, safe to set from another thread.

Everything in the loop is deterministic for a fixed (scenario, seed): the
random generator is consumed only by sensor noise, which defaults to off.
"""

import enum
import logging
import threading
from dataclasses import dataclass, field as dc_field

import numpy as np

from .belief import (
    DegenerateUpdateError,
    MeasurementContext,
    bayes_update,
    detection_likelihood,
    miss_likelihood,
    point_estimate,
    uniform_belief,
)
from .field import FlowSpec, init_field, run_warmup, step as field_step
from .planner import score_candidates, select_waypoint
from .scenario import Scenario
from .uncertainty import sci_widths, termination_check
from .vehicle import SondeSpec, UsvState, advance_towards, take_reading

logger = logging.getLogger(__name__)


class MissionStatus(enum.Enum):
    SUCCEEDED = "succeeded"
    ABORTED = "aborted"
    CANCELED = "canceled"


@dataclass(frozen=True)
class MissionGoal:
    """Tracking request: the scenario plus stopping and budget parameters."""

    scenario: Scenario
    gamma: float
    tau_m: float
    max_updates: int
    max_sim_time_s: float

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not self.tau_m > 0:
            raise ValueError(f"tau_m must be positive, got {self.tau_m}")
        if self.max_updates < 0 or self.max_sim_time_s < 0:
            raise ValueError("budgets must be non-negative")

    @classmethod
    def for_scenario(cls, scenario: Scenario, **overrides) -> "MissionGoal":
        kwargs = {
            "gamma": scenario.gamma,
            "tau_m": scenario.tau_m,
            "max_updates": scenario.max_updates,
            "max_sim_time_s": scenario.max_sim_time_s,
        }
        kwargs.update(overrides)
        return cls(scenario=scenario, **kwargs)


@dataclass(frozen=True)
class MissionFeedback:
    step: int
    sim_time_s: float
    estimate: tuple[float, float]
    sci_m: tuple[float, float]
    usv_position: tuple[float, float]
    last_z: int


@dataclass(frozen=True)
class TrackResult:
    status: MissionStatus
    estimate: tuple[float, float]
    sci_m: tuple[float, float]
    error_m: float
    updates: int
    sim_time_s: float


@dataclass
class MissionLog:
    """Per-run artifact rows, appended as the loop progresses."""

    trajectory: list = dc_field(default_factory=list)
    uncertainty: list = dc_field(default_factory=list)
    trace: list = dc_field(default_factory=list)
    feedbacks: list = dc_field(default_factory=list)
    degenerate_updates: int = 0


class Mission:
    """One tracking mission; run synchronously or via start()/result().

    The constructor performs the plume warmup and sonde calibration, so the
    object is ready to answer field and belief queries before the loop runs.
    """

    def __init__(self, goal: MissionGoal, rng=None, feedback=None, collect_trace=False):
        self.goal = goal
        sc = goal.scenario
        self._rng = rng if rng is not None else np.random.default_rng(sc.seed)
        self._feedback_cb = feedback
        self._collect_trace = collect_trace
        self._cancel = threading.Event()
        self._done = threading.Event()
        self._thread: threading.Thread | None = None
        self._result: TrackResult | None = None
        self.log = MissionLog()

        self.geometry = sc.geometry
        self.flow = FlowSpec(sc.flow.v, sc.effective_diffusivity())
        self.source = sc.source
        self.dt = sc.dt
        self.field = run_warmup(
            init_field(self.geometry, 0.0), self.flow, self.source, sc.warmup_s, self.dt
        )
        threshold = sc.sonde_threshold
        if threshold is None:
            threshold = sc.sonde_threshold_fraction * float(self.field.values.max())
            if not threshold > 0:
                raise ValueError(
                    "sonde auto-calibration found an empty plume; "
                    "set sonde.threshold explicitly or check the source rate"
                )
        self.sonde = SondeSpec(threshold, sc.sonde_noise_std, sc.sonde_sample_period)
        self.measure_mode = sc.measure_mode

        speed = float(np.hypot(*sc.flow.v))
        self.v_hat = (sc.flow.v[0] / speed, sc.flow.v[1] / speed)
        self.params = sc.planner
        self.local_radius_cells = sc.local_radius_cells
        self.belief = uniform_belief(self.geometry)
        self.usv = UsvState(sc.usv_start, sc.usv_speed, time=self.field.time)
        self.last_hit: tuple[float, float] | None = None
        self._t0 = self.field.time
        self.updates_used = 0
        self.step_index = 0

    # -- action surface ----------------------------------------------------

    def start(self) -> "Mission":
        """Run the loop on a background thread; pair with result()."""
        if self._thread is None and not self._done.is_set():
            self._thread = threading.Thread(target=self.run, daemon=True)
            self._thread.start()
        return self

    def cancel(self):
        self._cancel.set()

    def result(self, timeout=None) -> TrackResult:
        if self._thread is not None:
            self._thread.join(timeout)
        if self._result is None:
            raise RuntimeError("mission has not produced a result yet")
        return self._result

    @property
    def sim_time_s(self) -> float:
        return self.usv.time - self._t0

    # -- the loop ----------------------------------------------------------

    def run(self) -> TrackResult:
        if self._result is not None:
            return self._result

        status = None
        while status is None:
            if self._cancel.is_set():
                status = MissionStatus.CANCELED
                break
            if self.updates_used >= self.goal.max_updates:
                status = MissionStatus.ABORTED
                break
            if self.sim_time_s > self.goal.max_sim_time_s:
                status = MissionStatus.ABORTED
                break

            reading = take_reading(self.field, self.usv, self.sonde, self._rng)
            ctx = MeasurementContext(
                usv_pos=reading.position,
                v_hat=self.v_hat,
                last_hit_pos=self.last_hit,
                sigma2_hit=self.params.sigma2_hit,
                sigma2_miss=self.params.sigma2_miss,
                local_radius_cells=self.local_radius_cells,
            )
            if reading.z:
                like = detection_likelihood(ctx, self.geometry)
            else:
                like = miss_likelihood(ctx, self.geometry)
            try:
                self.belief = bayes_update(self.belief, like)
            except DegenerateUpdateError:
                self.log.degenerate_updates += 1
                logger.warning(
                    "degenerate update at step %d (z=%d); prior kept",
                    self.step_index + 1,
                    reading.z,
                )
            self.updates_used += 1
            self.step_index += 1
            if reading.z:
                self.last_hit = reading.position
                ctx = MeasurementContext(
                    usv_pos=reading.position,
                    v_hat=self.v_hat,
                    last_hit_pos=self.last_hit,
                    sigma2_hit=self.params.sigma2_hit,
                    sigma2_miss=self.params.sigma2_miss,
                    local_radius_cells=self.local_radius_cells,
                )

            estimate = point_estimate(self.belief)
            widths = sci_widths(self.belief, self.goal.gamma)
            fb = MissionFeedback(
                step=self.step_index,
                sim_time_s=self.sim_time_s,
                estimate=estimate,
                sci_m=widths,
                usv_position=self.usv.position,
                last_z=reading.z,
            )
            self.log.feedbacks.append(fb)
            self.log.uncertainty.append(
                (self.step_index, self.sim_time_s, widths[0], widths[1], estimate[0], estimate[1])
            )
            if self._feedback_cb is not None:
                self._feedback_cb(fb)

            if termination_check(widths, self.goal.tau_m):
                self.log.trajectory.append(
                    (reading.time - self._t0, *reading.position,
                     reading.concentration, reading.z, None, None)
                )
                status = MissionStatus.SUCCEEDED
                break

            usv_cell = self.geometry.cell_of(self.usv.position)
            scores = None
            if self._collect_trace:
                scores = score_candidates(self.belief, usv_cell, ctx, self.params)
            waypoint_cell = select_waypoint(self.belief, usv_cell, ctx, self.params, scores=scores)
            if scores is not None:
                for s in scores:
                    self.log.trace.append(
                        (self.step_index, s.cell[0], s.cell[1], s.p_hit, s.ig,
                         int(s.cell == waypoint_cell))
                    )
            waypoint = self.geometry.cell_center(*waypoint_cell)
            self.log.trajectory.append(
                (reading.time - self._t0, *reading.position,
                 reading.concentration, reading.z, *waypoint)
            )
            self._travel(waypoint)

        estimate = point_estimate(self.belief)
        widths = sci_widths(self.belief, self.goal.gamma)
        src = self.source.position
        error = float(np.hypot(estimate[0] - src[0], estimate[1] - src[1]))
        self._result = TrackResult(
            status=status,
            estimate=estimate,
            sci_m=widths,
            error_m=error,
            updates=self.updates_used,
            sim_time_s=self.sim_time_s,
        )
        self._done.set()
        return self._result

    def _travel(self, waypoint):
        """Advance vehicle and field on the same dt schedule until arrival.

        In continuous measure mode the leg is interrupted once sample_period
        elapses, so the next reading happens en route.
        """
        elapsed = 0.0
        while self.usv.position != tuple(waypoint):
            self.usv = advance_towards(self.usv, waypoint, self.dt, self.geometry)
            self.field = field_step(self.field, self.flow, self.source, self.dt)
            elapsed += self.dt
            if (
                self.measure_mode == "continuous"
                and elapsed + 1e-9 >= self.sonde.sample_period
            ):
                break


def run_mission(goal: MissionGoal, rng=None, feedback=None, collect_trace=False) -> TrackResult:
    """Convenience synchronous wrapper around Mission."""
    return Mission(goal, rng=rng, feedback=feedback, collect_trace=collect_trace).run()


def cancel_mission(mission: Mission) -> TrackResult:
    """Cancel at the next update boundary and return the (possibly prior) result.

    Completed missions return their result unchanged; a mission that never
    started runs inline just far enough to honour the cancellation.
    """
    mission.cancel()
    if mission._thread is None and not mission._done.is_set():
        return mission.run()
    return mission.result()
