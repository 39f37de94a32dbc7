"""Interaction detection and traffic-situation labelling.

Fixtures use linear kinematics so crossing times have closed forms; the
detector's event times must hit them exactly. An independent scalar
re-implementation serves as the oracle for randomized scenes.
"""

import numpy as np
import pytest

from podreliab.errors import InputError
from podreliab.trajectory import SequenceSample, Trajectory
from podreliab.traffic import (InteractionEvent, TrafficSituationLabel,
                               along_river_position, classify_sample,
                               coarse_group, detect_interactions,
                               label_string, read_labels_csv, sort_key,
                               write_labels_csv)

AXIS = (1.0, 0.0)


def _traj(vessel_id, fn, n=10, t0=0, step=60, y=0.0):
    t = t0 + step * np.arange(n, dtype=np.int64)
    x = np.array([fn(float(tv)) for tv in t])
    yy = np.full(n, y, dtype=float)
    return Trajectory(vessel_id, t, x, yy, step_seconds=step)


def _sample(ego, *neighbors):
    return SequenceSample(ego, 5, tuple(neighbors))


def ego_2ms():
    return _traj("ego", lambda t: 2.0 * t)


# ---------------------------------------------------------------------------
# along-river coordinate


def test_along_river_position_dot_product():
    assert along_river_position((3.0, 4.0), (0.6, 0.8)) == 5.0
    assert along_river_position((2.0, -1.0), (1.0, 0.0)) == 2.0


def test_along_river_requires_unit_axis():
    with pytest.raises(InputError):
        along_river_position((1.0, 1.0), (1.0, 1.0))


# ---------------------------------------------------------------------------
# single-neighbor fixtures (crossings with closed-form times)


def test_opposite_direction_is_encounter_at_exact_time():
    # Ego x=2t; neighbor x=1600-2t crosses at t=400, inside (240, 540].
    nb = _traj("nb", lambda t: 1600.0 - 2.0 * t, y=5.0)
    events = detect_interactions(_sample(ego_2ms(), nb), AXIS)
    assert len(events) == 1
    ev = events[0]
    assert ev.kind == "encounter"
    assert ev.neighbor_id == "nb"
    assert ev.event_time == pytest.approx(400.0, abs=1e-9)


def test_slower_same_direction_vessel_is_overtaking():
    # Neighbor x=525+0.5t: ego starts behind (delta<0), passes at t=350.
    nb = _traj("nb", lambda t: 525.0 + 0.5 * t, y=5.0)
    events = detect_interactions(_sample(ego_2ms(), nb), AXIS)
    assert [e.kind for e in events] == ["overtaking"]
    assert events[0].event_time == pytest.approx(350.0, abs=1e-9)


def test_faster_vessel_from_behind_is_overtaken():
    # Neighbor x=4t-900: ego ahead (delta>0) until t=450.
    nb = _traj("nb", lambda t: 4.0 * t - 900.0, y=-5.0)
    events = detect_interactions(_sample(ego_2ms(), nb), AXIS)
    assert [e.kind for e in events] == ["overtaken"]
    assert events[0].event_time == pytest.approx(450.0, abs=1e-9)


def test_directionless_neighbor_counts_as_encounter():
    # Net displacement 0.05*540 = 27 m < 50 m: no attributable direction.
    nb = _traj("nb", lambda t: 800.0 + 0.05 * t, y=5.0)
    events = detect_interactions(_sample(ego_2ms(), nb), AXIS)
    assert [e.kind for e in events] == ["encounter"]
    assert events[0].event_time == pytest.approx(800.0 / 1.95, abs=1e-9)


def test_crossing_during_input_span_is_ignored():
    # Crossing at t=250 < t0=240? No: 250 is inside (240, 300) between t0
    # and the first prediction step, where no samples exist; and the
    # pre-crossing state never flips within [300, 540].
    nb = _traj("nb", lambda t: 1000.0 - 2.0 * t, y=5.0)
    assert detect_interactions(_sample(ego_2ms(), nb), AXIS) == []
    # Clearly inside the observed span: crossing at t=100.
    nb2 = _traj("nb2", lambda t: 400.0 - 2.0 * t, y=5.0)
    assert detect_interactions(_sample(ego_2ms(), nb2), AXIS) == []


def test_multiple_flips_collapse_to_first():
    t = 60 * np.arange(10, dtype=np.int64)
    x_nb = np.array([350.0, 380.0, 420.0, 460.0, 520.0,
                     650.0, 700.0, 800.0, 1000.0, 1150.0])
    nb = Trajectory("nb", t, x_nb, np.full(10, 5.0), step_seconds=60)
    events = detect_interactions(_sample(ego_2ms(), nb), AXIS)
    assert [e.kind for e in events] == ["overtaking"]
    # delta at t=300 is -50, at t=360 is +20: root 300 + 60*50/70.
    assert events[0].event_time == pytest.approx(300.0 + 3000.0 / 70.0,
                                                 abs=1e-9)


def test_zero_sample_on_crossing_is_exact_event_time():
    t = 60 * np.arange(10, dtype=np.int64)
    x_ego = 2.0 * t.astype(float)
    x_nb = x_ego + np.array([60.0, 55.0, 50.0, 40.0, 30.0,
                             20.0, 10.0, 0.0, -10.0, -20.0])
    ego = Trajectory("ego", t, x_ego, np.zeros(10), step_seconds=60)
    nb = Trajectory("nb", t, x_nb, np.full(10, 5.0), step_seconds=60)
    events = detect_interactions(_sample(ego, nb), AXIS)
    assert len(events) == 1
    assert events[0].event_time == 420.0
    # Neighbor starts ahead and falls back: the ego does the passing.
    assert events[0].kind == "overtaking"


def test_neighbor_with_sparse_coverage_is_skipped():
    nb = _traj("nb", lambda t: 1600.0 - 2.0 * t, n=1, t0=300)
    assert detect_interactions(_sample(ego_2ms(), nb), AXIS) == []


def test_lateral_gate_drops_wide_crossings():
    nb = _traj("nb", lambda t: 1600.0 - 2.0 * t, y=200.0)
    sample = _sample(ego_2ms(), nb)
    assert len(detect_interactions(sample, AXIS)) == 1
    assert detect_interactions(sample, AXIS, lateral_gate=100.0) == []
    assert len(detect_interactions(sample, AXIS, lateral_gate=300.0)) == 1


def test_downstream_ego_swaps_roles():
    # Ego runs downstream (-x); a faster downstream neighbor overtakes it.
    ego = _traj("ego", lambda t: 5000.0 - 2.0 * t)
    nb = _traj("nb", lambda t: 5900.0 - 4.0 * t, y=5.0)
    events = detect_interactions(_sample(ego, nb), AXIS)
    assert [e.kind for e in events] == ["overtaken"]
    assert events[0].event_time == pytest.approx(450.0, abs=1e-9)


def test_translation_invariance():
    nb = _traj("nb", lambda t: 1600.0 - 2.0 * t, y=5.0)
    base = detect_interactions(_sample(ego_2ms(), nb), AXIS)

    def shift(traj, dx, dy):
        return Trajectory(traj.vessel_id, traj.timestamps,
                          traj.easting + dx, traj.northing + dy,
                          step_seconds=traj.step_seconds)

    moved = detect_interactions(
        _sample(shift(ego_2ms(), 5.0e4, -3.0e4), shift(nb, 5.0e4, -3.0e4)),
        AXIS)
    assert [(e.kind, e.neighbor_id) for e in moved] == \
        [(e.kind, e.neighbor_id) for e in base]
    assert moved[0].event_time == pytest.approx(base[0].event_time,
                                                abs=1e-6)


def test_neighbor_order_does_not_change_label():
    nbs = [
        _traj("n1", lambda t: 1600.0 - 2.0 * t, y=5.0),
        _traj("n2", lambda t: 525.0 + 0.5 * t, y=-5.0),
        _traj("n3", lambda t: 4.0 * t - 900.0, y=10.0),
    ]
    ego = ego_2ms()
    lab = classify_sample(detect_interactions(_sample(ego, *nbs), AXIS))
    for perm in ([2, 0, 1], [1, 2, 0], [2, 1, 0]):
        shuffled = [nbs[i] for i in perm]
        lab2 = classify_sample(
            detect_interactions(_sample(ego, *shuffled), AXIS))
        assert lab2 == lab
    assert lab == TrafficSituationLabel(1, 1, 1)


# ---------------------------------------------------------------------------
# independent oracle on randomized windows


def _oracle(sample, axis, min_net=50.0):
    """Scalar re-derivation of the detector's contract."""
    ax, ay = axis
    ego = sample.ego
    times = [float(t) for t in ego.timestamps]
    s_ego = [x * ax + y * ay
             for x, y in zip(ego.easting, ego.northing)]
    ego_sign = 1.0 if s_ego[-1] - s_ego[0] >= 0.0 else -1.0
    found = []
    for nb in sample.neighbors:
        cov = [i for i, t in enumerate(times)
               if nb.t_start <= t <= nb.t_end]
        if len(cov) < 2:
            continue
        tc = [times[i] for i in cov]
        sx = np.interp(tc, nb.timestamps.astype(float), nb.easting)
        sy = np.interp(tc, nb.timestamps.astype(float), nb.northing)
        s_nb = [x * ax + y * ay for x, y in zip(sx, sy)]
        net = s_nb[-1] - s_nb[0]
        pred = [j for j, i in enumerate(cov) if i >= sample.input_length]
        if len(pred) < 2:
            continue
        delta = [s_ego[cov[j]] - s_nb[j] for j in pred]
        tp = [tc[j] for j in pred]
        prev = None
        hit = None
        for j, d in enumerate(delta):
            if d == 0.0:
                continue
            if prev is not None and (d > 0) != (delta[prev] > 0):
                hit = (prev, j)
                break
            prev = j
        if hit is None:
            continue
        i, _ = hit
        d0, d1 = delta[i], delta[i + 1]
        t_event = tp[i] + (tp[i + 1] - tp[i]) * d0 / (d0 - d1)
        if abs(net) < min_net:
            kind = "encounter"
        elif (1.0 if net >= 0 else -1.0) != ego_sign:
            kind = "encounter"
        elif d0 * ego_sign > 0:
            kind = "overtaken"
        else:
            kind = "overtaking"
        found.append((kind, nb.vessel_id, t_event))
    return found


def test_detector_matches_oracle_on_random_walks():
    rng = np.random.default_rng(2024)
    axis_angle = rng.uniform(0, 2 * np.pi, 50)
    for k in range(50):
        ax, ay = np.cos(axis_angle[k]), np.sin(axis_angle[k])
        t = 60 * np.arange(10, dtype=np.int64)
        ego = Trajectory("ego", t,
                         np.cumsum(rng.normal(60, 40, 10)),
                         np.cumsum(rng.normal(0, 30, 10)), step_seconds=60)
        nbs = []
        for j in range(rng.integers(1, 5)):
            n = int(rng.integers(2, 10))
            start = int(rng.integers(0, 10 - n + 1))
            tt = 60 * np.arange(start, start + n, dtype=np.int64)
            nbs.append(Trajectory(
                f"n{j}", tt,
                np.cumsum(rng.normal(0, 120, n)) + rng.normal(0, 300),
                np.cumsum(rng.normal(0, 60, n)), step_seconds=60))
        sample = SequenceSample(ego, 5, tuple(nbs))
        got = [(e.kind, e.neighbor_id, e.event_time)
               for e in detect_interactions(sample, (ax, ay))]
        want = _oracle(sample, (ax, ay))
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert g[0] == w[0] and g[1] == w[1]
            assert g[2] == pytest.approx(w[2], abs=1e-6)


# ---------------------------------------------------------------------------
# labels


def test_classify_counts_by_kind():
    events = [InteractionEvent("encounter", "a", 10.0),
              InteractionEvent("overtaken", "b", 20.0),
              InteractionEvent("encounter", "c", 30.0)]
    assert classify_sample(events) == TrafficSituationLabel(2, 0, 1)
    assert classify_sample([]) == TrafficSituationLabel(0, 0, 0)


@pytest.mark.parametrize("counts,text", [
    ((1, 0, 0), "encounter-1"),
    ((2, 1, 0), "encounter-2 overtaking-1"),
    ((0, 0, 3), "overtaken-3"),
    ((1, 1, 1), "encounter-1 overtaking-1 overtaken-1"),
    ((0, 0, 0), "no-interaction"),
])
def test_label_string(counts, text):
    assert label_string(TrafficSituationLabel(*counts)) == text


@pytest.mark.parametrize("counts,group", [
    ((0, 0, 1), "Overtaken"), ((1, 1, 1), "Overtaken"),
    ((1, 1, 0), "Overtaking"), ((0, 2, 0), "Overtaking"),
    ((3, 0, 0), "Encounter"), ((0, 0, 0), "no-interaction"),
])
def test_coarse_group_precedence(counts, group):
    assert coarse_group(TrafficSituationLabel(*counts)) == group


def test_coarse_groups_partition_every_label():
    for enc in range(3):
        for ot in range(3):
            for ov in range(3):
                g = coarse_group(TrafficSituationLabel(enc, ot, ov))
                assert g in ("Encounter", "Overtaking", "Overtaken",
                             "no-interaction")


def test_sort_key_reproduces_report_row_order():
    labels = [TrafficSituationLabel(*c) for c in
              [(1, 0, 1), (3, 0, 0), (0, 1, 0), (1, 0, 0), (0, 0, 1),
               (2, 0, 0), (1, 1, 0), (0, 0, 0)]]
    ordered = [label_string(lab) for lab in sorted(labels, key=sort_key)]
    assert ordered == [
        "no-interaction",
        "encounter-1", "overtaking-1", "overtaken-1",
        "encounter-2", "encounter-3",
        "encounter-1 overtaking-1", "encounter-1 overtaken-1",
    ]


def test_labels_csv_round_trip(tmp_path):
    rows = [("s1", TrafficSituationLabel(1, 0, 0)),
            ("s2", TrafficSituationLabel(0, 2, 1)),
            ("s3", TrafficSituationLabel(0, 0, 0))]
    path = tmp_path / "labels.csv"
    write_labels_csv(path, rows)
    text = path.read_text()
    assert text.splitlines()[0] == \
        "sample_id,encounter,overtaking,overtaken,label,coarse_group"
    assert "s2,0,2,1,overtaking-2 overtaken-1,Overtaken" in text
    back = read_labels_csv(path)
    assert back == dict(rows)


def test_labels_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "labels.csv"
    path.write_text("id,a,b\nx,1,2\n")
    with pytest.raises(InputError):
        read_labels_csv(path)
