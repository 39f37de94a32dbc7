"""AIS ingest, track splitting, grid resampling, and windowing."""

import numpy as np
import pytest

from podreliab.errors import InputError
from podreliab.projections import tm_forward
from podreliab.trajectory import (TrackPoint, Trajectory,
                                  build_sequence_samples,
                                  extract_trajectories, heading_change_deg,
                                  heading_deg, ingest_records, is_upstream,
                                  resample, split_tracks, window_sequences,
                                  write_ais_csv)

HEADER = "vessel_id,timestamp,lat,lon,easting,northing,sog,cog"


def _pts(vessel_id, txy, **kw):
    return [TrackPoint(vessel_id, t, x, y, **kw) for t, x, y in txy]


# ---------------------------------------------------------------------------
# ingest


def test_ingest_basic_grouping_and_sorting(tmp_path):
    path = tmp_path / "ais.csv"
    path.write_text("\n".join([
        HEADER,
        "b,120,,,10.0,20.0,,",
        "a,60,,,1.5,2.5,4.2,359.0",
        "a,0,,,1.0,2.0,,",
        "b,60,,,9.0,19.0,,",
    ]) + "\n")
    per_vessel, rep = ingest_records(path)
    assert list(per_vessel) == ["a", "b"]
    assert [p.timestamp for p in per_vessel["a"]] == [0, 60]
    assert [p.timestamp for p in per_vessel["b"]] == [60, 120]
    assert per_vessel["a"][1].sog == 4.2
    assert rep.rows_total == 4
    assert rep.rows_accepted == 4
    assert rep.rows_rejected == 0


def test_ingest_duplicate_timestamps_keep_last(tmp_path):
    path = tmp_path / "ais.csv"
    path.write_text("\n".join([
        HEADER,
        "a,0,,,1.0,1.0,,",
        "a,0,,,5.0,6.0,,",
    ]) + "\n")
    per_vessel, rep = ingest_records(path)
    assert len(per_vessel["a"]) == 1
    assert per_vessel["a"][0].easting == 5.0
    assert rep.duplicates_collapsed == 1
    assert rep.rows_accepted == 2


def test_ingest_rejects_carry_line_numbers(tmp_path):
    path = tmp_path / "ais.csv"
    path.write_text("\n".join([
        HEADER,
        "a,0,,,1.0,1.0,,",
        "a,notatime,,,2.0,2.0,,",
        "a,120,,,,,,",
        "a,180,,,3.0,3.0,oops,",
        ",240,,,4.0,4.0,,",
    ]) + "\n")
    per_vessel, rep = ingest_records(path)
    assert [p.timestamp for p in per_vessel["a"]] == [0]
    assert rep.rows_total == 5
    assert rep.rows_accepted == 1
    assert [r.line_number for r in rep.rejects] == [3, 4, 5, 6]


def test_ingest_iso_timestamps_and_latlon_projection(tmp_path):
    path = tmp_path / "ais.csv"
    path.write_text("\n".join([
        HEADER,
        "a,2022-01-01T00:00:00Z,51.2,6.8,,,,",
        "a,2022-01-01T00:01:00+00:00,51.201,6.801,,,,",
    ]) + "\n")
    per_vessel, _ = ingest_records(path)
    pts = per_vessel["a"]
    assert pts[0].timestamp == 1640995200
    assert pts[1].timestamp == 1640995260
    x, y = tm_forward(51.2, 6.8)
    assert pts[0].easting == x and pts[0].northing == y


def test_ingest_prefers_projected_columns_over_latlon(tmp_path):
    path = tmp_path / "ais.csv"
    path.write_text(HEADER + "\na,0,51.2,6.8,123.0,456.0,,\n")
    per_vessel, _ = ingest_records(path)
    assert per_vessel["a"][0].easting == 123.0
    assert per_vessel["a"][0].northing == 456.0


def test_ingest_wrong_header_rejected(tmp_path):
    path = tmp_path / "ais.csv"
    path.write_text("vessel,when,lat,lon,e,n,sog,cog\n")
    with pytest.raises(InputError):
        ingest_records(path)


def test_ingest_empty_file_is_no_records(tmp_path):
    path = tmp_path / "ais.csv"
    path.write_text("")
    with pytest.raises(InputError, match="no records"):
        ingest_records(path)


def test_ingest_accepts_bytes_with_bom():
    data = ("﻿" + HEADER + "\na,0,,,1.0,2.0,,\n").encode("utf-8")
    per_vessel, rep = ingest_records(data)
    assert per_vessel["a"][0].northing == 2.0
    assert rep.rows_accepted == 1


def test_ingest_normalizes_course_to_circle():
    data = (HEADER + "\na,0,,,1.0,2.0,3.0,370.5\n").encode()
    per_vessel, _ = ingest_records(data)
    assert per_vessel["a"][0].cog == pytest.approx(10.5)


# ---------------------------------------------------------------------------
# heading helpers


@pytest.mark.parametrize("dx,dy,expected", [
    (0.0, 1.0, 0.0), (1.0, 0.0, 90.0), (0.0, -1.0, 180.0), (-1.0, 0.0, 270.0),
    (1.0, 1.0, 45.0),
])
def test_heading_compass_convention(dx, dy, expected):
    assert heading_deg(dx, dy) == pytest.approx(expected)


@pytest.mark.parametrize("h0,h1,expected", [
    (350.0, 10.0, 20.0), (10.0, 350.0, -20.0), (0.0, 180.0, -180.0),
    (180.0, 0.0, -180.0), (90.0, 90.0, 0.0),
])
def test_heading_change_wraps(h0, h1, expected):
    assert heading_change_deg(h0, h1) == pytest.approx(expected)


# ---------------------------------------------------------------------------
# splitting


def _straight(vessel_id, n, t0=0, step=60, speed=2.0):
    return _pts(vessel_id, [(t0 + i * step, i * step * speed, 0.0)
                            for i in range(n)])


def test_split_keeps_exact_threshold_gap_together():
    pts = _straight("v", 5) + _pts("v", [(240 + 600, 3000.0, 0.0)])
    segs = split_tracks(pts, min_resampled_points=2)
    assert len(segs) == 1


def test_split_on_gap_above_threshold():
    pts = _straight("v", 5) + _pts("v", [(240 + 601, 3000.0, 0.0),
                                         (240 + 661, 3120.0, 0.0)])
    segs = split_tracks(pts, min_resampled_points=2)
    assert len(segs) == 2
    assert segs[0].t_end == 240
    assert segs[1].t_start == 841


def test_split_u_turn_vertex_opens_new_segment():
    # 20 points marching +x, reversing direction at point 12.
    xy = [(i * 60.0, 0.0) for i in range(13)]
    xy += [((12 - i) * 60.0, 0.0) for i in range(1, 8)]
    pts = _pts("v", [(i * 60, x, y) for i, (x, y) in enumerate(xy)])
    segs = split_tracks(pts, min_resampled_points=2)
    assert len(segs) == 2
    assert len(segs[0]) == 12
    assert len(segs[1]) == 8
    assert segs[1].t_start == 12 * 60


def test_split_tolerates_moderate_turns():
    # 90-degree bend stays in one piece under the 150-degree rule.
    xy = [(i * 60.0, 0.0) for i in range(6)]
    xy += [(300.0, (i + 1) * 60.0) for i in range(6)]
    pts = _pts("v", [(i * 60, x, y) for i, (x, y) in enumerate(xy)])
    assert len(split_tracks(pts, min_resampled_points=2)) == 1


def test_split_gap_resets_heading_reference():
    # Direction reverses across a gap: only the gap splits, no turn cut.
    pts = _pts("v", [(0, 0.0, 0.0), (60, 100.0, 0.0), (120, 200.0, 0.0),
                     (2000, 500.0, 0.0), (2060, 400.0, 0.0),
                     (2120, 300.0, 0.0)])
    segs = split_tracks(pts, min_resampled_points=2)
    assert len(segs) == 2
    assert [len(s) for s in segs] == [3, 3]


def test_split_ignores_stationary_steps_for_heading():
    pts = _pts("v", [(0, 0.0, 0.0), (60, 100.0, 0.0), (120, 100.0, 0.0),
                     (180, 100.0, 0.0), (240, 200.0, 0.0)])
    assert len(split_tracks(pts, min_resampled_points=2)) == 1


def test_split_discards_segments_below_min_grid_length():
    assert split_tracks(_straight("v", 5)) == []  # default minimum is 10
    assert len(split_tracks(_straight("v", 12))) == 1


def test_split_requires_single_sorted_vessel():
    mixed = _straight("a", 3) + _straight("b", 3, t0=1000)
    with pytest.raises(InputError):
        split_tracks(mixed)
    unsorted_pts = list(reversed(_straight("a", 3)))
    with pytest.raises(InputError):
        split_tracks(unsorted_pts)


# ---------------------------------------------------------------------------
# resampling


def test_resample_reproduces_grid_points_bitwise():
    rng = np.random.default_rng(5)
    t = np.int64(60) * np.arange(12, dtype=np.int64)
    x = rng.normal(0, 1000, 12)
    y = rng.normal(0, 1000, 12)
    traj = Trajectory("v", t, x, y)
    out = resample(traj, 60)
    assert np.array_equal(out.timestamps, t)
    assert np.array_equal(out.easting, x)
    assert np.array_equal(out.northing, y)
    assert out.step_seconds == 60


def test_resample_linear_midpoint():
    traj = Trajectory("v", [0, 120], [0.0, 120.0], [0.0, 240.0])
    out = resample(traj, 60)
    assert list(out.timestamps) == [0, 60, 120]
    assert out.easting[1] == pytest.approx(60.0)
    assert out.northing[1] == pytest.approx(120.0)


def test_resample_matches_numpy_oracle_on_irregular_times():
    rng = np.random.default_rng(17)
    t = np.cumsum(rng.integers(5, 200, size=40)).astype(np.int64)
    x = rng.normal(0, 500, 40)
    y = rng.normal(0, 500, 40)
    traj = Trajectory("v", t, x, y)
    out = resample(traj, 60)
    grid = t[0] + 60 * np.arange((t[-1] - t[0]) // 60 + 1, dtype=np.int64)
    assert np.array_equal(out.timestamps, grid)
    assert np.array_equal(out.easting, np.interp(grid.astype(float),
                                                 t.astype(float), x))
    assert np.array_equal(out.northing, np.interp(grid.astype(float),
                                                  t.astype(float), y))


def test_resample_idempotent():
    rng = np.random.default_rng(23)
    t = np.cumsum(rng.integers(5, 200, size=30)).astype(np.int64)
    traj = Trajectory("v", t, rng.normal(0, 500, 30), rng.normal(0, 500, 30))
    once = resample(traj, 60)
    twice = resample(once, 60)
    assert np.array_equal(once.timestamps, twice.timestamps)
    assert np.array_equal(once.easting, twice.easting)
    assert np.array_equal(once.northing, twice.northing)


def test_resample_short_span_is_empty():
    traj = Trajectory("v", [0, 59], [0.0, 10.0], [0.0, 10.0])
    out = resample(traj, 60)
    assert len(out) == 0
    assert out.step_seconds == 60


def test_resample_derives_speed_and_course():
    traj = Trajectory("v", [0, 60, 120], [0.0, 0.0, 60.0],
                      [0.0, 60.0, 60.0])
    out = resample(traj, 60)
    assert np.allclose(out.sog, [1.0, 1.0, 1.0])
    assert np.allclose(out.cog, [0.0, 90.0, 90.0])


def test_resample_forward_fills_course_when_stationary():
    traj = Trajectory("v", [0, 60, 120], [0.0, 60.0, 60.0],
                      [0.0, 0.0, 0.0])
    out = resample(traj, 60)
    assert np.allclose(out.sog, [1.0, 0.0, 0.0])
    assert np.allclose(out.cog, [90.0, 90.0, 90.0])


# ---------------------------------------------------------------------------
# windowing


def test_window_count_uses_disjoint_stride(grid_traj):
    xs = list(range(30))
    traj = grid_traj("v", xs, [0.0] * 30)
    assert len(window_sequences(traj, (), 10, 5, 60)) == 3
    traj29 = grid_traj("v", xs[:29], [0.0] * 29)
    assert len(window_sequences(traj29, (), 10, 5, 60)) == 2


def test_window_sample_identity_and_times(grid_traj):
    traj = grid_traj("v", list(range(20)), [0.0] * 20, t_start=600)
    samples = window_sequences(traj, (), 10, 5, 60)
    first = samples[0]
    assert first.sample_id == "v:600"
    assert first.t0 == 600 + 4 * 60
    assert list(first.prediction_times) == [900, 960, 1020, 1080, 1140]
    assert samples[1].sample_id == f"v:{600 + 600}"


def test_window_attaches_overlapping_neighbors_clipped(grid_traj):
    ego = grid_traj("ego", list(range(20)), [0.0] * 20)
    near = grid_traj("n1", list(range(8)), [5.0] * 8, t_start=300)
    far = grid_traj("n2", list(range(5)), [9.0] * 5, t_start=5000)
    samples = window_sequences(ego, (ego, near, far), 10, 5, 60)
    w0, w1 = samples
    assert [n.vessel_id for n in w0.neighbors] == ["n1"]
    assert [n.vessel_id for n in w1.neighbors] == ["n1"]
    # Clipping keeps at most one step beyond the window edges.
    assert w0.neighbors[0].t_start >= w0.ego.t_start - 60
    assert w1.neighbors[0].t_end <= w1.ego.t_end + 60
    # The ego itself is never its own neighbor.
    assert all(n.vessel_id != "ego" for s in samples for n in s.neighbors)


def test_window_requires_resampled_input():
    traj = Trajectory("v", [0, 70, 130], [0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
    with pytest.raises(InputError):
        window_sequences(traj, (), 10, 5, 60)


def test_upstream_filter_uses_net_axis_displacement(grid_traj):
    up = grid_traj("u", [0.0, 60.0], [0.0, 80.0])
    down = grid_traj("d", [60.0, 0.0], [80.0, 0.0])
    axis = (0.6, 0.8)
    assert is_upstream(up, axis)
    assert not is_upstream(down, axis)
    traj_up = grid_traj("u", list(range(0, 200, 10))[:10], [0.0] * 10)
    traj_down = grid_traj("d", list(range(200, 0, -10))[:10], [0.0] * 10)
    samples = build_sequence_samples([traj_up, traj_down], (1.0, 0.0))
    assert {s.ego.vessel_id for s in samples} == {"u"}


# ---------------------------------------------------------------------------
# round trip


def test_ais_csv_round_trip_is_exact(tmp_path, grid_traj):
    rng = np.random.default_rng(31)
    traj = Trajectory("rhine-1", 60 * np.arange(12, dtype=np.int64),
                      345000 + rng.normal(0, 2000, 12),
                      5690000 + rng.normal(0, 2000, 12),
                      rng.uniform(0, 6, 12), rng.uniform(0, 360, 12),
                      step_seconds=60)
    path = tmp_path / "out.csv"
    write_ais_csv(path, [traj])
    per_vessel, rep = ingest_records(path)
    assert rep.rows_rejected == 0
    pts = per_vessel["rhine-1"]
    assert np.array_equal([p.easting for p in pts], traj.easting)
    assert np.array_equal([p.northing for p in pts], traj.northing)
    assert np.array_equal([p.sog for p in pts], traj.sog)
    assert np.array_equal([p.cog for p in pts], traj.cog)


def test_extract_trajectories_full_pipeline(tmp_path):
    rows = [HEADER]
    for i in range(25):  # on-grid upstream run
        rows.append(f"a,{i * 60},,,{i * 90.0},{i * 120.0},,")
    rows.append(f"a,{25 * 60 + 700},,,99999.0,99999.0,,")  # gap splits
    for i in range(11):
        rows.append(f"b,{i * 47},,,{i * 10.0},0.0,,")  # off-grid points
    path = tmp_path / "ais.csv"
    path.write_text("\n".join(rows) + "\n")
    per_vessel, _ = ingest_records(path)
    trajs = extract_trajectories(per_vessel)
    assert [t.vessel_id for t in trajs] == ["a"]
    assert len(trajs[0]) == 25
    assert trajs[0].step_seconds == 60
