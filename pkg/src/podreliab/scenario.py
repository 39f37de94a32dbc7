"""Synthetic river-traffic scenes and reference predictors.

A scene moves an ego vessel upstream along the river axis at constant
speed with Gaussian lateral jitter, shifting to a parallel lane around
each scheduled interaction (an evasive maneuver that constant-velocity
extrapolation cannot follow). Every scheduled event spawns one neighbor
whose piecewise-constant-velocity kinematics force the prescribed
along-river crossing exactly at its scheduled time: opposite direction
for an encounter, slower same-direction traffic ahead for overtaking,
faster same-direction traffic from behind for overtaken. Everything is
deterministic given the seed.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ScenarioError
from .metrics import ErrorSeries, PredictionSample
from .trajectory import (STEP_SECONDS, Trajectory, resample,
                         window_sequences, write_ais_csv)
from .projections import DEFAULT_ZONE

EVENT_KINDS = ("encounter", "overtaking", "overtaken")

# Neighbor speed as a multiple of ego speed, per interaction kind.
SPEED_FACTORS = {"encounter": -1.0, "overtaking": 0.6, "overtaken": 1.5}

# Cross-river lane of each neighbor kind, meters from the ego's base lane.
LANE_OFFSETS = {"encounter": 22.0, "overtaking": -14.0, "overtaken": -26.0}

# Size of the ego's evasive lane shift per event kind, meters.
MANEUVER_AMPLITUDES = {"encounter": 14.0, "overtaking": 24.0,
                       "overtaken": 32.0}

MANEUVER_HALF_WIDTH_S = 90.0

# Plausible projected coordinates (UTM zone 32N, Lower Rhine reach) so that
# exported scenes survive the inverse projection with sane lat/lon.
SCENE_ORIGIN = (345000.0, 5690000.0)
DEFAULT_T_START = 1_720_000_000


@dataclass(frozen=True)
class ScenarioSpec:
    """Prescription of one synthetic scene.

    events is a sequence of (kind, scheduled crossing minute) pairs; each
    spawns its own neighbor, so scheduled times must be distinct per kind.
    maneuver_noise is the standard deviation of the ego's lateral jitter.
    """

    seed: int
    duration_min: float
    river_axis: tuple
    ego_speed: float
    events: tuple = ()
    maneuver_noise: float = 0.0

    def __post_init__(self):
        if self.duration_min <= 0.0:
            raise ScenarioError("duration must be positive")
        if self.ego_speed <= 0.0:
            raise ScenarioError("ego_speed must be positive")
        if self.maneuver_noise < 0.0:
            raise ScenarioError("maneuver_noise must be non-negative")
        ax, ay = (float(v) for v in self.river_axis)
        if abs(np.hypot(ax, ay) - 1.0) > 1e-6:
            raise ScenarioError("river_axis must be a unit vector")
        object.__setattr__(self, "river_axis", (ax, ay))
        events = tuple((str(kind), float(minute))
                       for kind, minute in self.events)
        seen = set()
        for kind, minute in events:
            if kind not in EVENT_KINDS:
                raise ScenarioError(f"unknown event kind: {kind!r}")
            if not 0.0 < minute < self.duration_min:
                raise ScenarioError(f"event at minute {minute:g} outside the "
                                    f"scene duration (0, {self.duration_min:g})")
            if (kind, minute) in seen:
                raise ScenarioError(f"conflicting events: duplicate "
                                    f"{kind} at minute {minute:g}")
            seen.add((kind, minute))
        object.__setattr__(self, "events", events)


@dataclass(frozen=True)
class SyntheticErrorSpec:
    """Direct simulation of responses from the regression model."""

    b: float
    m: float
    tau: float
    levels: np.ndarray
    samples_per_level: int
    seed: int

    def __post_init__(self):
        if self.tau < 0.0:
            raise ScenarioError("tau must be non-negative")
        if self.samples_per_level < 1:
            raise ScenarioError("samples_per_level must be at least 1")
        lv = np.asarray(self.levels, dtype=np.float64)
        if lv.ndim != 1 or lv.size == 0 or np.any(np.diff(lv) <= 0):
            raise ScenarioError("levels must be strictly increasing")
        if not np.all(np.isfinite(lv)):
            raise ScenarioError("levels must be finite")
        lv.flags.writeable = False
        object.__setattr__(self, "levels", lv)


def _lane_shift(t_rel, events, amplitudes, half_width_s):
    """Summed smoothstep lane transitions around each event time.

    The shift direction alternates with the 10-minute window parity of the
    event so that successive maneuvers do not drift the ego ever farther
    from its base lane.
    """
    lateral = np.zeros_like(t_rel)
    for kind, minute in events:
        tc = minute * 60.0
        sign = 1.0 if int(minute // 10.0) % 2 == 0 else -1.0
        u = np.clip((t_rel - (tc - half_width_s)) / (2.0 * half_width_s),
                    0.0, 1.0)
        lateral += sign * amplitudes[kind] * u * u * (3.0 - 2.0 * u)
    return lateral


def build_scene_trajectories(spec, step_seconds=STEP_SECONDS,
                             t_start=DEFAULT_T_START, origin=SCENE_ORIGIN,
                             amplitudes=None):
    """Ego and neighbor trajectories of a scene, ego first.

    Positions sit on the uniform grid already; the neighbor created for an
    event crosses the ego's along-river position exactly at its scheduled
    time (kinematics are linear, so the sampled crossing is exact).
    """
    if amplitudes is None:
        amplitudes = MANEUVER_AMPLITUDES
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration_min * 60.0 / step_seconds)) + 1
    t = t_start + step_seconds * np.arange(n, dtype=np.int64)
    t_rel = (t - t_start).astype(np.float64)
    ax, ay = spec.river_axis
    px, py = -ay, ax

    lateral = _lane_shift(t_rel, spec.events, amplitudes,
                          MANEUVER_HALF_WIDTH_S)
    if spec.maneuver_noise > 0.0:
        lateral = lateral + rng.normal(0.0, spec.maneuver_noise, n)
    s_ego = spec.ego_speed * t_rel
    trajectories = [Trajectory(
        "ego", t,
        origin[0] + ax * s_ego + px * lateral,
        origin[1] + ay * s_ego + py * lateral,
        step_seconds=step_seconds)]

    for idx, (kind, minute) in enumerate(spec.events):
        tc = minute * 60.0
        v_n = SPEED_FACTORS[kind] * spec.ego_speed
        s_n = spec.ego_speed * tc + v_n * (t_rel - tc)
        lane = LANE_OFFSETS[kind] + 4.0 * idx
        trajectories.append(Trajectory(
            f"nb{idx:02d}-{kind}", t,
            origin[0] + ax * s_n + px * lane,
            origin[1] + ay * s_n + py * lane,
            step_seconds=step_seconds))
    return trajectories


def generate_scene(spec, window=10, input_length=5,
                   step_seconds=STEP_SECONDS, t_start=DEFAULT_T_START,
                   origin=SCENE_ORIGIN, amplitudes=None):
    """Sequence samples of a synthetic scene, windowed by trajectory_core."""
    trajectories = build_scene_trajectories(spec, step_seconds, t_start,
                                            origin, amplitudes)
    resampled = [resample(tr, step_seconds) for tr in trajectories]
    return window_sequences(resampled[0], resampled, window, input_length,
                            step_seconds)


def constant_velocity_predict(sample, model="const-velocity"):
    """Linear extrapolation of the last observed velocity."""
    ego = sample.ego
    lin = sample.input_length
    if lin < 2:
        raise InputError("constant-velocity prediction needs at least 2 "
                         "input points")
    x, y = ego.easting, ego.northing
    vx, vy = x[lin - 1] - x[lin - 2], y[lin - 1] - y[lin - 2]
    k = np.arange(1, len(ego) - lin + 1, dtype=np.float64)
    pred = np.column_stack((x[lin - 1] + k * vx, y[lin - 1] + k * vy))
    truth = np.column_stack((x[lin:], y[lin:]))
    t0 = np.array([x[lin - 1], y[lin - 1]])
    return PredictionSample(sample.sample_id, model, truth, pred, t0)


def persistence_predict(sample, model="persistence"):
    """Degenerate baseline: the vessel is predicted to stay at t0."""
    ego = sample.ego
    lin = sample.input_length
    x, y = ego.easting, ego.northing
    out = len(ego) - lin
    pred = np.column_stack((np.full(out, x[lin - 1]),
                            np.full(out, y[lin - 1])))
    truth = np.column_stack((x[lin:], y[lin:]))
    t0 = np.array([x[lin - 1], y[lin - 1]])
    return PredictionSample(sample.sample_id, model, truth, pred, t0)


def simulate_errors(spec):
    """Draw error series from a-hat = b + m*a + eps, eps ~ N(0, tau).

    Negative draws truncate to 0 (errors are distances). Deterministic
    given the seed.
    """
    rng = np.random.default_rng(spec.seed)
    shape = (spec.samples_per_level, spec.levels.size)
    mean = spec.b + spec.m * spec.levels
    if spec.tau > 0.0:
        draws = mean + rng.normal(0.0, spec.tau, shape)
    else:
        draws = np.broadcast_to(mean, shape).copy()
    draws = np.maximum(draws, 0.0)
    return [ErrorSeries(f"sim{i:05d}", "synthetic", spec.levels, draws[i])
            for i in range(spec.samples_per_level)]


def write_scenario_json(path, spec):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({
            "seed": spec.seed,
            "duration_min": spec.duration_min,
            "river_axis": list(spec.river_axis),
            "ego_speed_ms": spec.ego_speed,
            "maneuver_noise_m": spec.maneuver_noise,
            "events": [{"kind": kind, "minute": minute}
                       for kind, minute in spec.events],
        }, fh, indent=2)
        fh.write("\n")


def read_scenario_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc.msg})") from None
    known = {"seed", "duration_min", "river_axis", "ego_speed_ms",
             "maneuver_noise_m", "events"}
    unknown = set(obj) - known
    if unknown:
        raise InputError(f"{path}: unknown scenario keys {sorted(unknown)}")
    missing = {"seed", "duration_min", "river_axis", "ego_speed_ms"} - set(obj)
    if missing:
        raise InputError(f"{path}: missing scenario keys {sorted(missing)}")
    try:
        return ScenarioSpec(
            seed=int(obj["seed"]),
            duration_min=float(obj["duration_min"]),
            river_axis=tuple(obj["river_axis"]),
            ego_speed=float(obj["ego_speed_ms"]),
            maneuver_noise=float(obj.get("maneuver_noise_m", 0.0)),
            events=tuple((e["kind"], e["minute"])
                         for e in obj.get("events", ())),
        )
    except (ScenarioError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def export_scene_ais_csv(path, spec, zone=DEFAULT_ZONE, **build_kwargs):
    """Write a scene's trajectories in the AIS CSV schema (round-trippable)."""
    trajectories = build_scene_trajectories(spec, **build_kwargs)
    write_ais_csv(path, trajectories, zone)
    return trajectories


def demo_scenario(seed=0):
    """Seeded default scene: 240 minutes, 24 windows, every label family.

    Event minutes sit strictly inside prediction spans (window minutes
    10k+5 to 10k+9) so each scheduled crossing is attributable to exactly
    one window.
    """
    events = (
        ("encounter", 6.5), ("encounter", 16.8), ("encounter", 27.2),
        ("encounter", 36.3), ("encounter", 37.9),
        ("overtaking", 46.5),
        ("encounter", 56.5), ("encounter", 66.8),
        ("overtaken", 76.5),
        ("encounter", 86.3), ("encounter", 87.9),
        ("overtaking", 96.5),
        ("encounter", 106.5), ("encounter", 116.8),
        ("encounter", 126.2), ("encounter", 127.1), ("encounter", 128.3),
        ("overtaken", 136.5),
        ("overtaking", 146.5),
        ("encounter", 156.5), ("encounter", 166.8),
        ("overtaken", 186.5),
        ("overtaking", 196.5),
        ("encounter", 206.5),
        ("encounter", 216.3), ("overtaking", 217.9),
        ("overtaken", 226.5),
        ("encounter", 236.4), ("overtaken", 237.8),
    )
    return ScenarioSpec(seed=seed, duration_min=240.0,
                        river_axis=(0.6, 0.8), ego_speed=3.5,
                        events=events, maneuver_noise=0.8)
