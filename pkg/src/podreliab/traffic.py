"""Interaction detection and traffic-situation labeling.

An interaction is an along-river crossing between the ego vessel and a
neighbor during the prediction window: the sign of (ego - neighbor)
along-river separation flips. The neighbor's own net displacement decides
the kind: opposite direction gives an encounter, same direction gives
overtaking (ego moves from behind to ahead) or overtaken (ahead to behind).
Counts of events per kind form the sample's traffic-situation label.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError
from .trajectory import TrackPoint

EVENT_KINDS = ("encounter", "overtaking", "overtaken")

# Below this net along-river displacement over the window a neighbor is
# treated as direction-less; a crossing with it counts as an encounter.
MIN_DIRECTION_DISPLACEMENT_M = 50.0

LABELS_HEADER = ("sample_id", "encounter", "overtaking", "overtaken",
                 "label", "coarse_group")


@dataclass(frozen=True)
class InteractionEvent:
    kind: str
    neighbor_id: str
    event_time: float

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise InputError(f"unknown interaction kind: {self.kind!r}")


@dataclass(frozen=True)
class TrafficSituationLabel:
    """Order-free interaction counts of one sequence sample."""

    encounter_count: int = 0
    overtaking_count: int = 0
    overtaken_count: int = 0

    def __post_init__(self):
        for v in self.as_tuple():
            if v < 0 or v != int(v):
                raise InputError(f"counts must be non-negative integers: {self}")

    def as_tuple(self):
        return (self.encounter_count, self.overtaking_count,
                self.overtaken_count)

    @property
    def total(self):
        return sum(self.as_tuple())


def _check_unit(river_axis):
    ax, ay = float(river_axis[0]), float(river_axis[1])
    if abs(np.hypot(ax, ay) - 1.0) > 1e-6:
        raise InputError(f"river_axis must be a unit vector, got ({ax}, {ay})")
    return ax, ay


def along_river_position(point, river_axis):
    """Dot product of a position with the river axis, in meters.

    Accepts a TrackPoint or any (easting, northing) pair; a monotone proxy
    for progression along the river.
    """
    ax, ay = _check_unit(river_axis)
    if isinstance(point, TrackPoint):
        return point.easting * ax + point.northing * ay
    return point[0] * ax + point[1] * ay


def detect_interactions(sample, river_axis,
                        min_direction_displacement=MIN_DIRECTION_DISPLACEMENT_M,
                        lateral_gate=None):
    """Interaction events between the ego window and its neighbors.

    Only crossings during the prediction-window span count, and multiple
    sign flips by one neighbor collapse to the first. Event times are the
    first root of the piecewise-linear along-river separation. Neighbors
    covering fewer than two evaluation times are skipped. The optional
    lateral_gate (meters) drops crossings whose cross-river separation at
    the event time exceeds it; by default no gate is applied.
    """
    ax, ay = _check_unit(river_axis)
    ego = sample.ego
    t_all = ego.timestamps.astype(np.float64)
    s_ego = ego.easting * ax + ego.northing * ay
    ego_sign = 1.0 if s_ego[-1] - s_ego[0] >= 0.0 else -1.0
    is_pred = np.arange(len(ego)) >= sample.input_length

    events = []
    for nb in sample.neighbors:
        if len(nb) < 2:
            continue
        covered = (t_all >= nb.t_start) & (t_all <= nb.t_end)
        if np.count_nonzero(covered) < 2:
            continue
        tq = t_all[covered]
        nx, ny = _kernels.interp_polyline(nb.timestamps.astype(np.float64),
                                          nb.easting, nb.northing, tq)
        s_nb = nx * ax + ny * ay
        net_nb = s_nb[-1] - s_nb[0]

        sel = is_pred[covered]
        if np.count_nonzero(sel) < 2:
            continue
        delta = s_ego[covered][sel] - s_nb[sel]
        t_sel = tq[sel]
        i, _ = _kernels.first_sign_flip(delta)
        if i < 0:
            continue
        # First root of the piecewise-linear separation after the last
        # pre-crossing sample; exact when the next sample sits on zero.
        d0, d1 = delta[i], delta[i + 1]
        t_event = t_sel[i] + (t_sel[i + 1] - t_sel[i]) * d0 / (d0 - d1)

        if abs(net_nb) < min_direction_displacement:
            kind = "encounter"
        elif (1.0 if net_nb >= 0.0 else -1.0) != ego_sign:
            kind = "encounter"
        elif d0 * ego_sign > 0.0:
            # Ego ahead along its own travel direction, neighbor closing in.
            kind = "overtaken"
        else:
            kind = "overtaking"

        if lateral_gate is not None:
            px, py = -ay, ax
            ex, ey = _kernels.interp_polyline(t_all, ego.easting,
                                              ego.northing,
                                              np.array([t_event]))
            qx, qy = _kernels.interp_polyline(nb.timestamps.astype(np.float64),
                                              nb.easting, nb.northing,
                                              np.array([t_event]))
            lateral = abs((ex[0] - qx[0]) * px + (ey[0] - qy[0]) * py)
            if lateral > lateral_gate:
                continue

        events.append(InteractionEvent(kind, nb.vessel_id, float(t_event)))
    return events


def classify_sample(events):
    """Count events per kind into a TrafficSituationLabel."""
    kinds = [e.kind for e in events]
    return TrafficSituationLabel(kinds.count("encounter"),
                                 kinds.count("overtaking"),
                                 kinds.count("overtaken"))


def label_string(label):
    """Canonical rendering: "encounter-k overtaking-m overtaken-n".

    Zero-count kinds are omitted; the all-zero label renders
    "no-interaction".
    """
    parts = [f"{kind}-{count}"
             for kind, count in zip(EVENT_KINDS, label.as_tuple()) if count]
    return " ".join(parts) if parts else "no-interaction"


def coarse_group(label):
    """Coarse grouping with precedence Overtaken > Overtaking > Encounter.

    'Overtaken' allows optional encounters and overtaking; 'Overtaking'
    allows optional encounters but no overtaken events; 'Encounter' is
    encounters only. Every label falls in exactly one group.
    """
    if label.overtaken_count >= 1:
        return "Overtaken"
    if label.overtaking_count >= 1:
        return "Overtaking"
    if label.encounter_count >= 1:
        return "Encounter"
    return "no-interaction"


def sort_key(label):
    """Deterministic report order: fewer kinds first, then fewer events,
    then encounter-heavy before overtaking-heavy before overtaken-heavy."""
    enc, ot, ov = label.as_tuple()
    kinds = (enc > 0) + (ot > 0) + (ov > 0)
    return (kinds, label.total, -enc, -ot, -ov)


def write_labels_csv(path, labeled_samples):
    """Write (sample_id, label) pairs in the label CSV schema."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LABELS_HEADER)
        for sample_id, label in labeled_samples:
            writer.writerow([sample_id, *label.as_tuple(),
                             label_string(label), coarse_group(label)])


def read_labels_csv(path):
    """Read a label CSV into an ordered {sample_id: TrafficSituationLabel}."""
    labels = {}
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip().lower() for h in header) != LABELS_HEADER:
            raise InputError(f"unexpected label CSV header: {header!r}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(LABELS_HEADER):
                raise InputError(f"label CSV line {line_number}: "
                                 f"expected {len(LABELS_HEADER)} fields")
            try:
                label = TrafficSituationLabel(int(row[1]), int(row[2]),
                                              int(row[3]))
            except ValueError as exc:
                raise InputError(f"label CSV line {line_number}: {exc}") from None
            labels[row[0]] = label
    return labels
