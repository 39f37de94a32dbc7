"""Command-line pipeline: ingest, classify, evaluate, demo.

Every command reads a JSON run configuration, writes its artifacts under
the output directory, and finishes with a manifest recording the
configuration hash, input-file hashes, and package versions so that a
re-run can be byte-compared (only the manifest timestamp may differ).
Exit codes: 0 success, 1 internal error, 2 input error.
"""

import argparse
import dataclasses
import datetime
import hashlib
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._kernels import BACKEND
from .errors import (AlignmentError, InputError, PodReliabError,
                     ScenarioError)
from .projections import TMZone
from .trajectory import (Trajectory, extract_trajectories, ingest_records,
                         build_sequence_samples, window_sequences, resample,
                         write_ais_csv)
from .traffic import (classify_sample, coarse_group, detect_interactions,
                      label_string, sort_key, write_labels_csv,
                      read_labels_csv)
from .metrics import (aggregate, aggregate_pooled, densify_3s,
                      read_predictions_jsonl, write_predictions_jsonl,
                      write_stats_csv)
from .pod import build_poap_curve, curve_csv_text, curve_summary
from .scenario import (build_scene_trajectories, constant_velocity_predict,
                       demo_scenario, persistence_predict,
                       read_scenario_json, write_scenario_json)
from .svgplot import PALETTE, box_chart, line_chart
from . import report

COARSE_ORDER = ("Encounter", "Overtaking", "Overtaken", "no-interaction")
OVERALL = "Overall"

_CONFIG_FIELDS = None


@dataclass
class RunConfig:
    """Effective settings for one pipeline run."""

    ais_csv: str = None
    predictions_jsonl: str = None
    labels_csv: str = None
    scenario_json: str = None
    trajectories_dir: str = None
    river_axis: tuple = (0.6, 0.8)
    gap_threshold_s: float = 600.0
    turn_threshold_deg: float = 150.0
    step_seconds: int = 60
    input_length: int = 5
    output_length: int = 5
    threshold_m: float = 20.0
    h_max_min: float = 5.0
    confidence: float = 0.95
    out_dir: str = "out"
    seed: int = 0
    tm_zone: int = 32
    min_direction_displacement_m: float = 50.0
    lateral_gate_m: float = None
    substep_seconds: int = 3

    def __post_init__(self):
        self.validate()

    def validate(self):
        axis = np.asarray(self.river_axis, dtype=float)
        if axis.shape != (2,) or not np.all(np.isfinite(axis)):
            raise InputError("river_axis must be two finite numbers")
        norm = math.hypot(axis[0], axis[1])
        if norm == 0.0:
            raise InputError("river_axis must be non-zero")
        self.river_axis = (float(axis[0] / norm), float(axis[1] / norm))
        if not self.threshold_m > 0.0:
            raise InputError("threshold_m must be positive")
        if not self.h_max_min > 0.0:
            raise InputError("h_max_min must be positive")
        if not 0.0 < self.confidence < 1.0:
            raise InputError("confidence must lie strictly in (0, 1)")
        if self.step_seconds <= 0 or self.substep_seconds <= 0:
            raise InputError("step_seconds and substep_seconds must be "
                             "positive")
        if self.step_seconds % self.substep_seconds != 0:
            raise InputError("substep_seconds must divide step_seconds")
        if self.input_length < 1 or self.output_length < 1:
            raise InputError("input_length and output_length must be >= 1")
        if not self.gap_threshold_s > 0.0:
            raise InputError("gap_threshold_s must be positive")
        if not 0.0 < self.turn_threshold_deg <= 180.0:
            raise InputError("turn_threshold_deg must lie in (0, 180]")
        if self.lateral_gate_m is not None and not self.lateral_gate_m > 0.0:
            raise InputError("lateral_gate_m must be positive when set")

    @property
    def window_length(self):
        return self.input_length + self.output_length

    @property
    def zone(self):
        return TMZone.utm(self.tm_zone)

    @classmethod
    def from_file(cls, path):
        try:
            raw = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InputError(f"config {path} is not valid JSON: {exc}") \
                from exc
        if not isinstance(data, dict):
            raise InputError("config root must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError("unknown config keys: " + ", ".join(unknown))
        if "river_axis" in data:
            data["river_axis"] = tuple(data["river_axis"])
        return cls(**data)

    def canonical_dict(self):
        data = dataclasses.asdict(self)
        data["river_axis"] = list(self.river_axis)
        return data

    def sha256(self):
        text = json.dumps(self.canonical_dict(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir, command, config, input_paths=()):
    inputs = {}
    for p in input_paths:
        if p is None:
            continue
        path = Path(p)
        if path.is_file():
            inputs[str(path)] = _sha256_file(path)
    manifest = {
        "command": command,
        "config": config.canonical_dict(),
        "config_sha256": config.sha256(),
        "created_utc": datetime.datetime.now(datetime.timezone.utc)
        .isoformat(timespec="seconds"),
        "inputs": inputs,
        "kernel_backend": BACKEND,
        "versions": {
            "numpy": np.__version__,
            "podreliab": __version__,
            "python": sys.version.split()[0],
            "scipy": scipy.__version__,
        },
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def _slug(name):
    text = re.sub(r"[^A-Za-z0-9._-]+", "_", str(name)).strip("_")
    return text or "unnamed"


def _out_dir(config):
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# ingest


def cmd_ingest(config):
    if not config.ais_csv:
        raise InputError("ingest requires ais_csv in the config")
    per_vessel, rep = ingest_records(config.ais_csv, zone=config.zone)
    if rep.rows_total == 0:
        raise InputError("no records")
    trajectories = extract_trajectories(
        per_vessel,
        gap_threshold=config.gap_threshold_s,
        turn_threshold=config.turn_threshold_deg,
        step_seconds=config.step_seconds,
        min_points=config.window_length)
    out = _out_dir(config)
    traj_dir = out / "trajectories"
    traj_dir.mkdir(exist_ok=True)
    for tr in trajectories:
        name = f"{_slug(tr.vessel_id)}_{tr.t_start}.csv"
        write_ais_csv(traj_dir / name, [tr], zone=config.zone)
    summary = rep.as_dict()
    summary["vessels"] = len(per_vessel)
    summary["trajectories"] = len(trajectories)
    summary["resampled_points"] = int(sum(len(t) for t in trajectories))
    (out / "ingest_report.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    write_manifest(out, "ingest", config, [config.ais_csv])
    print(f"ingest: {rep.rows_accepted}/{rep.rows_total} rows -> "
          f"{len(trajectories)} trajectories ({out})")
    return 0


# ---------------------------------------------------------------------------
# classify


def _load_trajectories(config):
    if config.trajectories_dir:
        root = Path(config.trajectories_dir)
        if not root.is_dir():
            raise InputError(f"trajectories_dir {root} is not a directory")
        paths = sorted(root.glob("*.csv"))
        if not paths:
            raise InputError(f"no trajectory CSV files under {root}")
        trajectories = []
        for path in paths:
            per_vessel, rep = ingest_records(path, zone=config.zone)
            if rep.rows_rejected:
                first = rep.rejects[0]
                raise InputError(f"{path}: line {first.line_number}: "
                                 f"{first.reason}")
            for vid in sorted(per_vessel):
                track = Trajectory.from_points(per_vessel[vid])
                trajectories.append(resample(track, config.step_seconds))
        trajectories.sort(key=lambda t: (t.vessel_id, t.t_start))
        return trajectories
    if config.ais_csv:
        per_vessel, rep = ingest_records(config.ais_csv, zone=config.zone)
        if rep.rows_total == 0:
            raise InputError("no records")
        return extract_trajectories(
            per_vessel,
            gap_threshold=config.gap_threshold_s,
            turn_threshold=config.turn_threshold_deg,
            step_seconds=config.step_seconds,
            min_points=config.window_length)
    raise InputError("classify requires trajectories_dir or ais_csv")


def _label_samples(config, samples):
    labeled = []
    for sample in samples:
        events = detect_interactions(
            sample, config.river_axis,
            min_direction_displacement=config.min_direction_displacement_m,
            lateral_gate=config.lateral_gate_m)
        labeled.append((sample.sample_id, classify_sample(events)))
    return labeled


def cmd_classify(config):
    trajectories = _load_trajectories(config)
    samples = build_sequence_samples(
        trajectories, config.river_axis,
        window=config.window_length,
        input_length=config.input_length,
        step_seconds=config.step_seconds)
    labeled = _label_samples(config, samples)
    out = _out_dir(config)
    write_labels_csv(out / "labels.csv", labeled)
    write_manifest(out, "classify", config,
                   [config.ais_csv] if config.ais_csv else
                   sorted(Path(config.trajectories_dir).glob("*.csv")))
    groups = {}
    for _, label in labeled:
        groups[coarse_group(label)] = groups.get(coarse_group(label), 0) + 1
    parts = ", ".join(f"{g}: {groups[g]}" for g in sorted(groups))
    print(f"classify: {len(labeled)} samples ({parts or 'none'}) ({out})")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def _series_color(index):
    return PALETTE[index % len(PALETTE)]


def _boxplot(path_svg, path_csv, boxes, title, ylabel):
    names = [name for name, _ in boxes]
    lines = ["name,whisker_low,q1,median,q3,whisker_high"]
    for name, s in boxes:
        lines.append(",".join([name, repr(s.whisker_low), repr(s.q1),
                               repr(s.median), repr(s.q3),
                               repr(s.whisker_high)]))
    csv_text = "\n".join(lines) + "\n"
    chart = box_chart(
        [{"name": name, "stats": s, "color": _series_color(i)}
         for i, (name, s) in enumerate(boxes)],
        title=title, xlabel="", ylabel=ylabel, metadata_csv=csv_text)
    Path(path_svg).write_text(chart, encoding="utf-8")
    Path(path_csv).write_text(csv_text, encoding="utf-8")
    return names


def _poap_figure(path_svg, path_csv, group_name, curves, threshold_m):
    """One reliability chart per group: p solid, lower bound dash-dot."""
    header = ["a_min"]
    columns = []
    plotted = []
    grid = None
    for i, (model, curve) in enumerate(curves):
        if grid is None:
            grid = curve.grid
        header.append(f"{model}_p")
        header.append(f"{model}_p_lower95")
        columns.append(curve.p)
        columns.append(curve.p_lower95)
        color = _series_color(i)
        plotted.append({"name": f"{model} POAP", "x": curve.grid,
                        "y": curve.p, "color": color, "dash": "solid"})
        plotted.append({"name": f"{model} lower 95%", "x": curve.grid,
                        "y": curve.p_lower95, "color": color,
                        "dash": "dash-dot"})
    lines = [",".join(header)]
    for j in range(len(grid)):
        row = [repr(float(grid[j]))]
        row.extend(repr(float(col[j])) for col in columns)
        lines.append(",".join(row))
    csv_text = "\n".join(lines) + "\n"
    chart = line_chart(
        plotted,
        title=f"POAP vs prediction horizon: {group_name} "
              f"(threshold {threshold_m:g} m)",
        xlabel="prediction horizon a [min]",
        ylabel="probability of adequate prediction",
        refline_y=0.9, y_range=(0.0, 1.0), metadata_csv=csv_text)
    Path(path_svg).write_text(chart, encoding="utf-8")
    Path(path_csv).write_text(csv_text, encoding="utf-8")


def _evaluate_core(config, predictions, labels, out):
    """Shared evaluation: stats tables, boxplots, POAP curves, reports."""
    missing = sorted({p.sample_id for p in predictions
                      if p.sample_id not in labels})
    if missing:
        shown = ", ".join(missing[:5])
        raise InputError(f"{len(missing)} prediction sample(s) have no "
                         f"label, e.g. {shown}")
    if not predictions:
        raise InputError("no prediction samples to evaluate")

    models = sorted({p.model for p in predictions})
    series = []
    for p in predictions:
        labeled = dataclasses.replace(p, label=labels[p.sample_id])
        series.append(densify_3s(labeled, step_seconds=config.step_seconds,
                                 substep_seconds=config.substep_seconds))

    # Coarse grouping for the error statistics.
    coarse_series = {}
    coarse_ids = {}
    for s in series:
        group = coarse_group(s.label)
        coarse_series.setdefault((group, s.model), []).append(s)
        coarse_ids.setdefault(group, set()).add(s.sample_id)
    groups_present = [g for g in COARSE_ORDER if g in coarse_ids]
    counts = {g: len(coarse_ids[g]) for g in groups_present}
    counts[OVERALL] = len({s.sample_id for s in series})
    by_model = {m: [s for s in series if s.model == m] for m in models}

    horizons = [float(k) * config.step_seconds / 60.0
                for k in range(1, config.output_length + 1)]
    stats_rows = []
    table2_cells = {}
    for model in models:
        for group in groups_present + [OVERALL]:
            subset = (by_model[model] if group == OVERALL
                      else coarse_series.get((group, model), []))
            for horizon in horizons:
                try:
                    stats = aggregate(subset, horizon)
                except PodReliabError:
                    continue
                stats_rows.append((model, group, horizon, stats))
                if horizon == horizons[-1]:
                    table2_cells[(group, model)] = stats
    write_stats_csv(out / "stats.csv", stats_rows)

    table2 = report.error_stats_table(
        models, groups_present + [OVERALL], table2_cells, counts,
        horizon_min=horizons[-1])
    (out / "table2.txt").write_text(table2, encoding="utf-8")

    # Boxplots: pooled per model, and per model at each whole-minute step.
    pooled = [(m, aggregate_pooled(by_model[m])) for m in models
              if by_model[m]]
    _boxplot(out / "boxplot_models.svg", out / "boxplot_models.csv",
             pooled, "Prediction error per model (all steps pooled)",
             "Euclidean error [m]")
    per_step = []
    for model in models:
        for horizon in horizons:
            try:
                per_step.append((f"{model} @{horizon:g} min",
                                 aggregate(by_model[model], horizon)))
            except PodReliabError:
                continue
    _boxplot(out / "boxplot_horizons.svg", out / "boxplot_horizons.csv",
             per_step, "Prediction error per model and prediction step",
             "Euclidean error [m]")

    # Fine-grained labels for the reliability assessment.
    fine_series = {}
    fine_ids = {}
    label_objects = {}
    for s in series:
        name = label_string(s.label)
        label_objects[name] = s.label
        fine_series.setdefault((name, s.model), []).append(s)
        fine_ids.setdefault(name, set()).add(s.sample_id)
    fine_names = sorted(label_objects, key=lambda n: sort_key(
        label_objects[n]))

    curves_dir = out / "curves"
    curves_dir.mkdir(exist_ok=True)
    summaries_dir = out / "summaries"
    summaries_dir.mkdir(exist_ok=True)

    table3_rows = []
    summaries = []
    for name in fine_names + [OVERALL]:
        count = (counts[OVERALL] if name == OVERALL
                 else len(fine_ids[name]))
        solutions = {}
        group_curves = []
        for model in models:
            subset = (by_model[model] if name == OVERALL
                      else fine_series.get((name, model), []))
            if not subset:
                continue
            try:
                curve = build_poap_curve(
                    subset, threshold=config.threshold_m,
                    h_max=config.h_max_min, confidence=config.confidence)
            except PodReliabError:
                continue
            solutions[model] = curve.a90_95
            group_curves.append((model, curve))
            stem = f"{_slug(model)}_{_slug(name)}"
            (curves_dir / f"{stem}.csv").write_text(
                curve_csv_text(curve), encoding="utf-8")
            summary = curve_summary(curve, model, name)
            (summaries_dir / f"{stem}.json").write_text(
                json.dumps(summary, indent=2) + "\n", encoding="utf-8")
            summaries.append(summary)
        display = name[:1].upper() + name[1:] if name != OVERALL else name
        table3_rows.append((display, count, solutions))
        if group_curves:
            stem = _slug(name)
            _poap_figure(out / f"poap_{stem}.svg", out / f"poap_{stem}.csv",
                         display, group_curves, config.threshold_m)

    table3 = report.reliability_table(models, table3_rows,
                                      h_max=config.h_max_min,
                                      threshold_m=config.threshold_m,
                                      confidence=config.confidence)
    (out / "table3.txt").write_text(table3, encoding="utf-8")
    (out / "summaries.json").write_text(
        json.dumps(summaries, indent=2) + "\n", encoding="utf-8")
    return models, counts


def cmd_evaluate(config):
    if not config.predictions_jsonl:
        raise InputError("evaluate requires predictions_jsonl in the config")
    if not config.labels_csv:
        raise InputError("evaluate requires labels_csv in the config")
    predictions = read_predictions_jsonl(config.predictions_jsonl)
    labels = read_labels_csv(config.labels_csv)
    out = _out_dir(config)
    models, counts = _evaluate_core(config, predictions, labels, out)
    write_manifest(out, "evaluate", config,
                   [config.predictions_jsonl, config.labels_csv])
    print(f"evaluate: {counts[OVERALL]} samples, "
          f"{len(models)} model(s) ({out})")
    return 0


# ---------------------------------------------------------------------------
# demo


def cmd_demo(config):
    if config.scenario_json:
        spec = read_scenario_json(config.scenario_json)
    else:
        spec = demo_scenario(config.seed)
    out = _out_dir(config)
    write_scenario_json(out / "scenario.json", spec)

    trajectories = build_scene_trajectories(spec,
                                            step_seconds=config.step_seconds)
    write_ais_csv(out / "scene.csv", trajectories, zone=config.zone)
    resampled = [resample(t, config.step_seconds) for t in trajectories]
    samples = window_sequences(resampled[0], resampled,
                               window=config.window_length,
                               input_length=config.input_length,
                               step_seconds=config.step_seconds)
    if not samples:
        raise InputError("scenario too short: no complete windows")

    labeled = _label_samples(config, samples)
    write_labels_csv(out / "labels.csv", labeled)
    labels = {sid: label for sid, label in labeled}

    predictions = [constant_velocity_predict(s) for s in samples]
    predictions.extend(persistence_predict(s) for s in samples)
    write_predictions_jsonl(out / "predictions.jsonl", predictions)

    models, counts = _evaluate_core(config, predictions, labels, out)
    write_manifest(out, "demo", config,
                   [config.scenario_json] if config.scenario_json else [])
    print(f"demo: {len(samples)} windows, {len(models)} model(s), "
          f"seed {spec.seed} ({out})")
    return 0


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "ingest": cmd_ingest,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
    "demo": cmd_demo,
}

_HELP = {
    "ingest": "parse AIS records into resampled trajectory segments",
    "classify": "label sequence windows by traffic situation",
    "evaluate": "error statistics and POAP reliability from predictions",
    "demo": "synthetic scenario end to end (scene, labels, evaluation)",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="podreliab",
        description="Reliability evaluation for vessel trajectory "
                    "predictors (POD/POAP).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in _COMMANDS.items():
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", required=True,
                       help="path to the JSON run configuration")
        p.add_argument("--threshold-m", type=float, default=None,
                       help="override the adequacy threshold [m]")
        p.add_argument("--h-max", type=float, default=None,
                       help="override the largest evaluated horizon [min]")
        p.add_argument("--out", default=None,
                       help="override the output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.from_file(args.config)
        if args.threshold_m is not None:
            config.threshold_m = args.threshold_m
        if args.h_max is not None:
            config.h_max_min = args.h_max
        if args.out is not None:
            config.out_dir = args.out
        if args.seed is not None:
            config.seed = args.seed
        config.validate()
        return args.func(config)
    except (InputError, AlignmentError, ScenarioError, FileNotFoundError,
            NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PodReliabError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
