"""Displacement errors, 3-second densification, and per-group statistics.

The displacement error is the planar Euclidean distance between predicted
and ground-truth positions. Per-sample error series are densified by linear
interpolation of both polylines onto a 3 s grid anchored at the shared
last-observed position, and aggregated into boxplot-style summary
statistics per traffic situation.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AlignmentError, EmptyGroupError, InputError
from .trajectory import _readonly

SUBSTEP_SECONDS = 3
STATS_HEADER = ("model", "group", "horizon_min", "n", "mean", "median",
                "std", "q1", "q3", "wlow", "whigh")


def _positions(values, name, min_len=1):
    a = _readonly(values, np.float64)
    if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] < min_len:
        raise InputError(f"{name} must be an (n >= {min_len}, 2) array")
    if not np.all(np.isfinite(a)):
        raise InputError(f"non-finite coordinates in {name}")
    return a


@dataclass(frozen=True)
class PredictionSample:
    """One evaluation unit: ground truth and prediction over the horizon.

    truth/predicted are (output_length, 2) positions 60 s apart;
    t0_position is the shared last-observed position anchoring both.
    """

    sample_id: str
    model: str
    truth: np.ndarray
    predicted: np.ndarray
    t0_position: np.ndarray
    label: object = None

    def __post_init__(self):
        t = _positions(self.truth, "truth")
        p = _positions(self.predicted, "predicted")
        if t.shape != p.shape:
            raise InputError(f"truth and predicted lengths differ for "
                             f"{self.sample_id!r}")
        t0 = _readonly(np.asarray(self.t0_position, dtype=np.float64).ravel(),
                       np.float64)
        if t0.shape != (2,) or not np.all(np.isfinite(t0)):
            raise InputError("t0_position must be a finite (x, y) pair")
        object.__setattr__(self, "truth", t)
        object.__setattr__(self, "predicted", p)
        object.__setattr__(self, "t0_position", t0)

    @property
    def output_length(self):
        return self.truth.shape[0]


@dataclass(frozen=True)
class ErrorSeries:
    """Displacement errors of one sample over its horizon grid (minutes)."""

    sample_id: str
    model: str
    horizons: np.ndarray
    errors: np.ndarray
    label: object = None

    def __post_init__(self):
        h = _readonly(self.horizons, np.float64)
        e = _readonly(self.errors, np.float64)
        if h.ndim != 1 or h.shape != e.shape or h.size == 0:
            raise InputError("horizons/errors must be equal-length 1-D arrays")
        if np.any(np.diff(h) <= 0):
            raise InputError(f"horizons not strictly increasing for "
                             f"{self.sample_id!r}")
        if np.any(~np.isfinite(e)) or np.any(e < 0):
            raise InputError(f"errors must be finite and non-negative for "
                             f"{self.sample_id!r}")
        object.__setattr__(self, "horizons", h)
        object.__setattr__(self, "errors", e)


@dataclass(frozen=True)
class SummaryStats:
    """Boxplot-style summary of one error group at one horizon."""

    mean: float
    median: float
    std: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    n: int

    def __post_init__(self):
        if not self.q1 <= self.median <= self.q3:
            raise InputError("quartiles out of order")
        if self.whisker_low > self.q1 or self.whisker_high < self.q3:
            raise InputError("whiskers inside the box")


def displacement_error(predicted, truth):
    """Planar Euclidean distance between paired positions.

    Accepts single (x, y) pairs or (..., 2) arrays; returns a scalar or an
    array of the broadcast leading shape.
    """
    p = np.asarray(predicted, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape[-1] != 2 or t.shape[-1] != 2:
        raise InputError("positions must have a trailing dimension of 2")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(t))):
        raise InputError("non-finite coordinates")
    dx = p[..., 0] - t[..., 0]
    dy = p[..., 1] - t[..., 1]
    out = np.sqrt(dx * dx + dy * dy)
    return float(out) if out.ndim == 0 else out


def horizon_grid(output_length, step_seconds=60, substep_seconds=SUBSTEP_SECONDS):
    """Densified horizon grid in minutes: substep, 2*substep, ..., end."""
    n = int(output_length) * int(step_seconds) // int(substep_seconds)
    return np.arange(1, n + 1) * (substep_seconds / 60.0)


def step_errors(sample):
    """Undensified per-step errors at 1, 2, ..., output_length minutes."""
    horizons = np.arange(1, sample.output_length + 1, dtype=np.float64)
    errors = displacement_error(sample.predicted, sample.truth)
    return ErrorSeries(sample.sample_id, sample.model, horizons, errors,
                       sample.label)


def densify_3s(sample, step_seconds=60, substep_seconds=SUBSTEP_SECONDS):
    """Errors on the dense grid, by linear interpolation of both polylines.

    Both the truth and the prediction polyline are anchored at the shared
    t=0 position, interpolated at substep intervals through the final
    horizon, and differenced pointwise. Horizons are reported in minutes.
    """
    length = sample.output_length
    node_t = np.arange(length + 1, dtype=np.float64) * step_seconds
    tx = np.concatenate(([sample.t0_position[0]], sample.truth[:, 0]))
    ty = np.concatenate(([sample.t0_position[1]], sample.truth[:, 1]))
    px = np.concatenate(([sample.t0_position[0]], sample.predicted[:, 0]))
    py = np.concatenate(([sample.t0_position[1]], sample.predicted[:, 1]))

    n_sub = length * step_seconds // substep_seconds
    t_query = np.arange(1, n_sub + 1, dtype=np.float64) * substep_seconds
    errors = _kernels.gap_at_times(node_t, tx, ty, px, py, t_query)
    horizons = horizon_grid(length, step_seconds, substep_seconds)
    return ErrorSeries(sample.sample_id, sample.model, horizons, errors,
                       sample.label)


def errors_at_horizon(series, horizon):
    """Error of every series at one horizon (minutes), as an array.

    Raises AlignmentError naming the first series whose grid lacks the
    horizon; raises EmptyGroupError for an empty collection.
    """
    series = list(series)
    if not series:
        raise EmptyGroupError(f"no samples at horizon {horizon}")
    values = np.empty(len(series))
    for k, s in enumerate(series):
        idx = np.flatnonzero(np.isclose(s.horizons, horizon,
                                        rtol=0.0, atol=1e-9))
        if idx.size == 0:
            raise AlignmentError(f"series {s.sample_id!r} has no horizon "
                                 f"{horizon} min")
        values[k] = s.errors[idx[0]]
    return values


def summarize(values):
    """SummaryStats of raw error values.

    Uses the population (divide-by-n) standard deviation, linear
    interpolation between order statistics for quartiles, and whiskers at
    the most extreme data within 1.5 IQR of the box (clamped to the box
    edge when nothing lies beyond it, so whiskers never invert).
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyGroupError("cannot summarize an empty group")
    if not np.all(np.isfinite(arr)):
        raise InputError("non-finite error values")
    q1, q3 = np.quantile(arr, [0.25, 0.75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    return SummaryStats(
        mean=float(np.mean(arr)),
        median=float(np.median(arr)),
        std=float(np.std(arr)),
        q1=float(q1),
        q3=float(q3),
        whisker_low=min(float(arr[arr >= lo_fence].min()), float(q1)),
        whisker_high=max(float(arr[arr <= hi_fence].max()), float(q3)),
        n=int(arr.size),
    )


def aggregate(series, horizon):
    """Summary statistics of a group of error series at one horizon."""
    return summarize(errors_at_horizon(series, horizon))


def aggregate_pooled(series):
    """Summary statistics pooling every horizon of every series."""
    series = list(series)
    if not series:
        raise EmptyGroupError("no samples to pool")
    return summarize(np.concatenate([s.errors for s in series]))


def read_predictions_jsonl(path):
    """Read prediction samples from JSON-lines.

    Each line holds {"sample_id", "model", "truth", "pred", "t0"};
    labels are attached separately by sample_id.
    """
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{line_number}: invalid JSON "
                                 f"({exc.msg})") from None
            missing = {"sample_id", "model", "truth", "pred", "t0"} - set(obj)
            if missing:
                raise InputError(f"{path}:{line_number}: missing keys "
                                 f"{sorted(missing)}")
            try:
                samples.append(PredictionSample(
                    str(obj["sample_id"]), str(obj["model"]),
                    np.asarray(obj["truth"], dtype=np.float64),
                    np.asarray(obj["pred"], dtype=np.float64),
                    np.asarray(obj["t0"], dtype=np.float64)))
            except (InputError, ValueError) as exc:
                raise InputError(f"{path}:{line_number}: {exc}") from None
    return samples


def write_predictions_jsonl(path, samples):
    """Write prediction samples in the JSON-lines ingest format."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps({
                "sample_id": s.sample_id,
                "model": s.model,
                "truth": s.truth.tolist(),
                "pred": s.predicted.tolist(),
                "t0": s.t0_position.tolist(),
            }) + "\n")


def write_stats_csv(path, rows):
    """Write (model, group, horizon_min, SummaryStats) rows as CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STATS_HEADER)
        for model, group, horizon, st in rows:
            writer.writerow([
                model, group, repr(float(horizon)), st.n,
                repr(st.mean), repr(st.median), repr(st.std),
                repr(st.q1), repr(st.q3),
                repr(st.whisker_low), repr(st.whisker_high),
            ])
