"""Plain-text report tables.

Two layouts: per-situation error statistics ("mean (median, std)" cells,
best value per statistic starred) and the reliability-horizon table
(a_90/95 per model and situation, best starred, worst daggered, censored
entries rendered "> h_max"). Exact ties mark every tied entry; markers are
omitted entirely when all models tie. Sample counts ride along in
parentheses after the row name.
"""

import math

from .pod import render_horizon

INSUFFICIENT = "insufficient data"


def fmt_value(value, decimals=2):
    """Fixed decimals with trailing zeros (and a bare point) trimmed."""
    text = f"{value:.{decimals}f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def _marks(values, n_columns, pick):
    """Column indices to mark: the pick (min/max) and its exact ties.

    values maps column index to a comparable number. No marks when fewer
    than two columns have values or when every present column ties.
    """
    if len(values) < 2:
        return set()
    target = pick(values.values())
    marked = {i for i, v in values.items() if v == target}
    if len(marked) == len(values):
        return set()
    return marked


def _render_columns(header, rows, footnotes=()):
    widths = [len(h) for h in header]
    for cells in rows:
        for i, cell in enumerate(cells):
            widths[i] = max(widths[i], len(cell))
    lines = [" | ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("-+-".join("-" * w for w in widths))
    for cells in rows:
        lines.append(" | ".join(c.ljust(w)
                                for c, w in zip(cells, widths)).rstrip())
    if footnotes:
        lines.append("")
        lines.extend(footnotes)
    return "\n".join(lines) + "\n"


def error_stats_table(models, groups, cells, counts, horizon_min=None,
                      threshold_note=None):
    """Error-statistics table: one row per group, one column per model.

    cells maps (group, model) to SummaryStats (or None when the group is
    empty for that model). The lowest mean, median, and std in a row are
    each starred independently.
    """
    rows = []
    for group in groups:
        stats = {i: cells.get((group, m)) for i, m in enumerate(models)}
        stats = {i: s for i, s in stats.items() if s is not None}
        star_mean = _marks({i: s.mean for i, s in stats.items()},
                           len(models), min)
        star_med = _marks({i: s.median for i, s in stats.items()},
                          len(models), min)
        star_std = _marks({i: s.std for i, s in stats.items()},
                          len(models), min)
        cells_row = [f"{group} ({counts.get(group, 0)})"]
        for i in range(len(models)):
            s = stats.get(i)
            if s is None:
                cells_row.append(INSUFFICIENT)
                continue
            cells_row.append(
                f"{fmt_value(s.mean)}{'*' if i in star_mean else ''} "
                f"({fmt_value(s.median)}{'*' if i in star_med else ''}, "
                f"{fmt_value(s.std)}{'*' if i in star_std else ''})")
        rows.append(cells_row)

    title = "Error statistics (mean, (median, std.) [m])"
    if horizon_min is not None:
        title += f" at the {fmt_value(horizon_min, 0)}-minute prediction step"
    footnotes = [
        "* lowest value per statistic within the row; exact ties mark all, "
        "and no marks are placed when every model ties.",
        "std is the population (divide-by-n) standard deviation.",
    ]
    if threshold_note:
        footnotes.append(threshold_note)
    table = _render_columns(["Traffic situation", *models], rows, footnotes)
    return title + "\n\n" + table


def _rank_value(solution):
    if solution.censored:
        return math.inf
    if solution.unreliable:
        return 0.0
    return solution.value


def reliability_table(models, rows, h_max, threshold_m, confidence=0.95):
    """Reliability-horizon table: a_90/95 per traffic situation and model.

    rows is a sequence of (display_name, count, {model: HorizonSolution or
    None}). The largest horizon per row is starred, the smallest daggered;
    censored entries rank above every finite one and render "> h_max".
    """
    body = []
    for name, count, solutions in rows:
        present = {i: _rank_value(solutions[m])
                   for i, m in enumerate(models)
                   if solutions.get(m) is not None}
        stars = _marks(present, len(models), max)
        daggers = _marks(present, len(models), min)
        cells = [f"{name} ({count})"]
        for i, m in enumerate(models):
            sol = solutions.get(m)
            if sol is None:
                cells.append(INSUFFICIENT)
                continue
            mark = "*" if i in stars else ""
            mark += "†" if i in daggers else ""
            cells.append(render_horizon(sol, h_max) + mark)
        body.append(cells)

    pct = fmt_value(confidence * 100.0, 1)
    title = (f"a_90/{pct} reliability horizons [min] at a "
             f"{fmt_value(threshold_m)} m decision threshold")
    footnotes = [
        "* largest (most reliable) horizon per row; † smallest; exact "
        "ties mark all, and no marks are placed when every model ties.",
        f"> {h_max:g} marks lower bounds still above 90% at the largest "
        f"evaluated horizon.",
        "Lower bound: delta method on z(a) = (a_th - b - m a)/tau with the "
        "full MLE covariance of (b, m, tau), one-sided normal quantile "
        "1.6449.",
    ]
    table = _render_columns(["Traffic situation", *models], body, footnotes)
    return title + "\n\n" + table
