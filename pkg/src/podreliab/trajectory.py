"""AIS trajectory ingestion, track splitting, resampling, and windowing.

Raw vessel records are grouped per vessel, split into clean tracks at time
gaps and sharp turns, resampled onto a uniform 60 s grid by linear
interpolation in the projected plane, and cut into fixed-length sequence
windows that carry every co-temporal neighbor segment.
"""

import csv
import io
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import InputError
from .projections import DEFAULT_ZONE, tm_forward, tm_inverse

AIS_HEADER = ("vessel_id", "timestamp", "lat", "lon",
              "easting", "northing", "sog", "cog")

GAP_THRESHOLD_S = 600.0
TURN_THRESHOLD_DEG = 150.0
STEP_SECONDS = 60
WINDOW_LENGTH = 10
INPUT_LENGTH = 5
MIN_RESAMPLED_POINTS = 10


def _readonly(values, dtype):
    # Freeze without mutating a caller-owned writeable array.
    a = np.asarray(values, dtype=dtype)
    if a is values and a.flags.writeable:
        a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TrackPoint:
    """One timestamped vessel position in the projected plane."""

    vessel_id: str
    timestamp: int
    easting: float
    northing: float
    sog: float = None
    cog: float = None

    def __post_init__(self):
        if not (math.isfinite(self.easting) and math.isfinite(self.northing)):
            raise InputError(f"non-finite coordinates for {self.vessel_id!r}")
        if self.cog is not None and not 0.0 <= self.cog < 360.0:
            raise InputError(f"course out of [0, 360): {self.cog}")


class Trajectory:
    """Time-ordered positions of one vessel, array-backed and immutable.

    ``step_seconds`` is None for raw (irregular) tracks and the grid step
    after resampling. Arrays are flagged read-only; slices share memory.
    """

    __slots__ = ("vessel_id", "timestamps", "easting", "northing",
                 "sog", "cog", "step_seconds")

    def __init__(self, vessel_id, timestamps, easting, northing,
                 sog=None, cog=None, step_seconds=None):
        ts = _readonly(timestamps, np.int64)
        e = _readonly(easting, np.float64)
        n = _readonly(northing, np.float64)
        if not (ts.shape == e.shape == n.shape) or ts.ndim != 1:
            raise InputError("timestamp/position arrays must be 1-D and equal length")
        if ts.size and np.any(np.diff(ts) <= 0):
            raise InputError(f"timestamps not strictly increasing for {vessel_id!r}")
        if np.any(~np.isfinite(e)) or np.any(~np.isfinite(n)):
            raise InputError(f"non-finite coordinates for {vessel_id!r}")
        if step_seconds is not None and ts.size > 1:
            if np.any(np.diff(ts) != int(step_seconds)):
                raise InputError(f"timestamps not on a {step_seconds} s grid")
        s = _readonly(np.full(ts.shape, np.nan) if sog is None else sog,
                      np.float64)
        c = _readonly(np.full(ts.shape, np.nan) if cog is None else cog,
                      np.float64)
        if s.shape != ts.shape or c.shape != ts.shape:
            raise InputError("sog/cog arrays must match timestamps in length")

        self.vessel_id = vessel_id
        self.timestamps = ts
        self.easting = e
        self.northing = n
        self.sog = s
        self.cog = c
        self.step_seconds = None if step_seconds is None else int(step_seconds)

    def __len__(self):
        return self.timestamps.size

    def __repr__(self):
        span = f"{self.t_start}..{self.t_end}" if len(self) else "empty"
        return (f"Trajectory({self.vessel_id!r}, {len(self)} pts, {span}, "
                f"step={self.step_seconds})")

    @property
    def t_start(self):
        return int(self.timestamps[0])

    @property
    def t_end(self):
        return int(self.timestamps[-1])

    def point(self, i):
        s, c = self.sog[i], self.cog[i]
        return TrackPoint(self.vessel_id, int(self.timestamps[i]),
                          float(self.easting[i]), float(self.northing[i]),
                          None if np.isnan(s) else float(s),
                          None if np.isnan(c) else float(c))

    def slice(self, i, j):
        """Sub-trajectory over index range [i, j); shares array memory."""
        return Trajectory(self.vessel_id, self.timestamps[i:j],
                          self.easting[i:j], self.northing[i:j],
                          self.sog[i:j], self.cog[i:j], self.step_seconds)

    def clip_time(self, t_lo, t_hi):
        """Sub-trajectory of points with t_lo <= timestamp <= t_hi."""
        i = int(np.searchsorted(self.timestamps, t_lo, side="left"))
        j = int(np.searchsorted(self.timestamps, t_hi, side="right"))
        return self.slice(i, j)

    @classmethod
    def from_points(cls, points, step_seconds=None):
        if not points:
            return cls("", [], [], [], step_seconds=step_seconds)
        return cls(points[0].vessel_id,
                   [p.timestamp for p in points],
                   [p.easting for p in points],
                   [p.northing for p in points],
                   [np.nan if p.sog is None else p.sog for p in points],
                   [np.nan if p.cog is None else p.cog for p in points],
                   step_seconds=step_seconds)


@dataclass(frozen=True)
class SequenceSample:
    """One evaluation window: conditioning steps, forecast steps, neighbors.

    The ego window holds input_length + output_length points on the uniform
    grid; neighbors are segments of other vessels overlapping the window's
    time span (clipped to one grid step beyond it on either side).
    """

    ego: Trajectory
    input_length: int
    neighbors: tuple = ()

    def __post_init__(self):
        if self.ego.step_seconds is None:
            raise InputError("sequence windows require a resampled trajectory")
        if not 1 <= self.input_length < len(self.ego):
            raise InputError("input_length must lie in [1, window)")

    @property
    def output_length(self):
        return len(self.ego) - self.input_length

    @property
    def sample_id(self):
        return f"{self.ego.vessel_id}:{self.ego.t_start}"

    @property
    def t0(self):
        """Forecast origin: time of the last conditioning point."""
        return int(self.ego.timestamps[self.input_length - 1])

    @property
    def prediction_times(self):
        return self.ego.timestamps[self.input_length:]


@dataclass(frozen=True)
class RowReject:
    line_number: int
    reason: str


@dataclass
class IngestReport:
    rows_total: int = 0
    rows_accepted: int = 0
    duplicates_collapsed: int = 0
    rejects: list = None

    def __post_init__(self):
        if self.rejects is None:
            self.rejects = []

    @property
    def rows_rejected(self):
        return len(self.rejects)

    def as_dict(self):
        return {
            "rows_total": self.rows_total,
            "rows_accepted": self.rows_accepted,
            "rows_rejected": self.rows_rejected,
            "duplicates_collapsed": self.duplicates_collapsed,
            "rejects": [{"line": r.line_number, "reason": r.reason}
                        for r in self.rejects],
        }


def _parse_timestamp(text):
    """Epoch seconds from an integer string or ISO-8601 UTC stamp."""
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    dt = datetime.fromisoformat(iso)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(round(dt.timestamp()))


def _iter_csv_rows(source):
    """Yield csv rows from a path, byte/str stream, or line iterable."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8-sig", newline="") as fh:
            yield from csv.reader(fh)
        return
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8-sig"))
    elif hasattr(source, "read"):
        head = source.read(0)
        if isinstance(head, bytes):
            source = io.TextIOWrapper(source, encoding="utf-8-sig", newline="")
    yield from csv.reader(source)


def _parse_row(row, zone):
    """TrackPoint from one data row; raises ValueError/InputError on bad rows."""
    if len(row) != len(AIS_HEADER):
        raise ValueError(f"expected {len(AIS_HEADER)} fields, got {len(row)}")
    vessel_id = row[0].strip()
    if not vessel_id:
        raise ValueError("empty vessel_id")
    timestamp = _parse_timestamp(row[1])
    lat, lon, easting, northing = (f.strip() for f in row[2:6])
    if easting and northing:
        x, y = float(easting), float(northing)
    elif lat and lon:
        x, y = tm_forward(float(lat), float(lon), zone)
    else:
        raise ValueError("row carries neither (lat, lon) nor (easting, northing)")
    sog = float(row[6]) if row[6].strip() else None
    cog = float(row[7]) % 360.0 if row[7].strip() else None
    if sog is not None and not math.isfinite(sog):
        raise ValueError("non-finite sog")
    return TrackPoint(vessel_id, timestamp, x, y, sog, cog)


def ingest_records(source, zone=DEFAULT_ZONE):
    """Group AIS CSV rows into per-vessel, time-sorted point lists.

    Duplicate (vessel_id, timestamp) rows collapse to the last occurrence.
    Malformed rows and rows with non-finite coordinates are rejected and
    recorded in the report with their line numbers; a missing or wrong
    header aborts with an input error.

    Returns (per_vessel, report) where per_vessel maps vessel_id to a
    time-sorted list of TrackPoint.
    """
    rows = _iter_csv_rows(source)
    try:
        header = next(rows)
    except StopIteration:
        raise InputError("no records") from None
    if tuple(h.strip().lower() for h in header) != AIS_HEADER:
        raise InputError(f"unexpected header {header!r}; "
                         f"expected {','.join(AIS_HEADER)}")

    report = IngestReport()
    by_vessel = {}
    for line_number, row in enumerate(rows, start=2):
        if not row:
            continue
        report.rows_total += 1
        try:
            point = _parse_row(row, zone)
        except (ValueError, InputError) as exc:
            report.rejects.append(RowReject(line_number, str(exc)))
            continue
        report.rows_accepted += 1
        slot = by_vessel.setdefault(point.vessel_id, {})
        if point.timestamp in slot:
            report.duplicates_collapsed += 1
        slot[point.timestamp] = point

    per_vessel = {
        vid: [pts[t] for t in sorted(pts)]
        for vid, pts in sorted(by_vessel.items())
    }
    return per_vessel, report


def heading_deg(dx, dy):
    """Heading of a displacement, degrees clockwise from north in [0, 360)."""
    return math.degrees(math.atan2(dx, dy)) % 360.0


def heading_change_deg(h_from, h_to):
    """Signed smallest rotation from one heading to another, in [-180, 180)."""
    return (h_to - h_from + 180.0) % 360.0 - 180.0


def _resampled_length(t_start, t_end, step_seconds):
    return (int(t_end) - int(t_start)) // int(step_seconds) + 1


def split_tracks(points, gap_threshold=GAP_THRESHOLD_S,
                 turn_threshold=TURN_THRESHOLD_DEG,
                 step_seconds=STEP_SECONDS,
                 min_resampled_points=MIN_RESAMPLED_POINTS):
    """Split one vessel's time-sorted points at time gaps and sharp turns.

    A new track starts at a point whose gap to its predecessor exceeds
    gap_threshold, or at the vertex where the along-track heading turns by
    more than turn_threshold within one step. Segments that would fall
    short of min_resampled_points after 60 s resampling are discarded;
    the survivors partition the retained input points.
    """
    if len(points) < 2:
        return []
    vessel_ids = {p.vessel_id for p in points}
    if len(vessel_ids) != 1:
        raise InputError(f"split_tracks expects a single vessel, got {sorted(vessel_ids)}")
    for a, b in zip(points, points[1:]):
        if b.timestamp <= a.timestamp:
            raise InputError("points must be strictly time-sorted")

    boundaries = [0]
    prev_heading = None
    for i in range(1, len(points)):
        a, b = points[i - 1], points[i]
        if b.timestamp - a.timestamp > gap_threshold:
            boundaries.append(i)
            prev_heading = None
            continue
        dx, dy = b.easting - a.easting, b.northing - a.northing
        if dx == 0.0 and dy == 0.0:
            continue
        h = heading_deg(dx, dy)
        if prev_heading is not None and \
                abs(heading_change_deg(prev_heading, h)) > turn_threshold:
            # Turn vertex is point i-1: it opens the new segment.
            boundaries.append(max(i - 1, boundaries[-1] + 1))
        prev_heading = h

    boundaries.append(len(points))
    segments = []
    for lo, hi in zip(boundaries, boundaries[1:]):
        seg = points[lo:hi]
        if len(seg) < 2:
            continue
        if _resampled_length(seg[0].timestamp, seg[-1].timestamp,
                             step_seconds) < min_resampled_points:
            continue
        segments.append(Trajectory.from_points(seg))
    return segments


def resample(trajectory, step_seconds=STEP_SECONDS):
    """Linearly interpolate a trajectory onto the grid t0, t0+step, ... <= t_end.

    Original points lying exactly on the grid are reproduced bit-identically.
    Speed and course are re-derived from consecutive resampled positions
    (forward differences, last value repeated). A span shorter than one step
    yields an empty trajectory.
    """
    step = int(step_seconds)
    if step <= 0:
        raise InputError("step_seconds must be positive")
    if len(trajectory) < 2 or trajectory.t_end - trajectory.t_start < step:
        return Trajectory(trajectory.vessel_id, [], [], [], step_seconds=step)

    n_grid = _resampled_length(trajectory.t_start, trajectory.t_end, step)
    grid = trajectory.t_start + step * np.arange(n_grid, dtype=np.int64)
    qx, qy = _kernels.interp_polyline(
        trajectory.timestamps.astype(np.float64),
        trajectory.easting, trajectory.northing,
        grid.astype(np.float64))

    dx, dy = np.diff(qx), np.diff(qy)
    seg = np.sqrt(dx * dx + dy * dy)
    sog = np.append(seg, seg[-1]) / step
    head = np.degrees(np.arctan2(dx, dy)) % 360.0
    # Forward-fill headings over zero-displacement steps.
    idx = np.where(seg > 0.0, np.arange(seg.size), -1)
    np.maximum.accumulate(idx, out=idx)
    head = np.where(idx >= 0, head[np.maximum(idx, 0)], 0.0)
    cog = np.append(head, head[-1])

    return Trajectory(trajectory.vessel_id, grid, qx, qy, sog, cog,
                      step_seconds=step)


def is_upstream(trajectory, river_axis):
    """True when the net displacement along the river axis is positive."""
    if len(trajectory) < 2:
        return False
    ax, ay = float(river_axis[0]), float(river_axis[1])
    net = ((trajectory.easting[-1] - trajectory.easting[0]) * ax
           + (trajectory.northing[-1] - trajectory.northing[0]) * ay)
    return net > 0.0


def window_sequences(trajectory, scene=(), window=WINDOW_LENGTH,
                     input_length=INPUT_LENGTH, step_seconds=STEP_SECONDS):
    """Cut a resampled trajectory into disjoint fixed-length windows.

    Windows stride by their own length (no overlap); a trailing remainder
    shorter than one window is dropped. Each sample carries the segments of
    every other vessel in the scene whose time span overlaps the window's,
    clipped to one grid step beyond the window on both sides.
    """
    if not 1 <= input_length < window:
        raise InputError("input_length must lie in [1, window)")
    if trajectory.step_seconds != step_seconds:
        raise InputError("window_sequences requires a resampled trajectory")

    samples = []
    for k in range(len(trajectory) // window):
        ego = trajectory.slice(k * window, (k + 1) * window)
        w_start, w_end = ego.t_start, ego.t_end
        neighbors = []
        for other in scene:
            if other.vessel_id == trajectory.vessel_id or len(other) == 0:
                continue
            if other.t_end < w_start or other.t_start > w_end:
                continue
            clipped = other.clip_time(w_start - step_seconds,
                                      w_end + step_seconds)
            if len(clipped):
                neighbors.append(clipped)
        samples.append(SequenceSample(ego, input_length, tuple(neighbors)))
    return samples


def extract_trajectories(per_vessel, gap_threshold=GAP_THRESHOLD_S,
                         turn_threshold=TURN_THRESHOLD_DEG,
                         step_seconds=STEP_SECONDS,
                         min_points=MIN_RESAMPLED_POINTS):
    """Full preprocessing: split every vessel's points, resample, filter.

    Returns trajectories sorted by (vessel_id, start time).
    """
    out = []
    for vessel_id in sorted(per_vessel):
        for seg in split_tracks(per_vessel[vessel_id], gap_threshold,
                                turn_threshold, step_seconds, min_points):
            res = resample(seg, step_seconds)
            if len(res) >= min_points:
                out.append(res)
    out.sort(key=lambda t: (t.vessel_id, t.t_start))
    return out


def build_sequence_samples(trajectories, river_axis, window=WINDOW_LENGTH,
                           input_length=INPUT_LENGTH,
                           step_seconds=STEP_SECONDS, upstream_only=True):
    """Window every (by default upstream) trajectory against the full scene."""
    samples = []
    for traj in trajectories:
        if upstream_only and not is_upstream(traj, river_axis):
            continue
        samples.extend(window_sequences(traj, trajectories, window,
                                        input_length, step_seconds))
    return samples


def _fmt_opt(value):
    return "" if value is None or (isinstance(value, float) and math.isnan(value)) \
        else repr(float(value))


def write_ais_csv(path, trajectories, zone=DEFAULT_ZONE, geographic=True):
    """Write trajectories in the AIS CSV schema.

    Easting/northing are written with full round-trip precision; lat/lon
    are derived from the inverse projection when geographic is True.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AIS_HEADER)
        for traj in trajectories:
            if len(traj) and geographic:
                lat, lon = tm_inverse(traj.easting, traj.northing, zone)
                lat = np.atleast_1d(lat)
                lon = np.atleast_1d(lon)
            for i in range(len(traj)):
                writer.writerow([
                    traj.vessel_id,
                    int(traj.timestamps[i]),
                    f"{lat[i]:.9f}" if geographic else "",
                    f"{lon[i]:.9f}" if geographic else "",
                    repr(float(traj.easting[i])),
                    repr(float(traj.northing[i])),
                    _fmt_opt(traj.sog[i]),
                    _fmt_opt(traj.cog[i]),
                ])


def read_ais_csv(path, zone=DEFAULT_ZONE):
    """Shortcut for ingest_records on a CSV file path."""
    return ingest_records(path, zone)
