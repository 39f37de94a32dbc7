"""Deterministic SVG charts.

Charts are emitted as self-contained SVG text with fixed fonts, palette,
and coordinate formatting, so identical inputs yield byte-identical files.
The exact numbers being plotted travel inside a <metadata> CDATA block as
CSV; callers co-emit the same CSV next to the figure, keeping figures pure
views of their data.
"""

import math

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

DASH_PATTERNS = {"solid": None, "dash-dot": "8,3,2,3", "dashed": "6,4"}

MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 18, 40, 52


def _esc(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _f(v):
    return f"{v:.2f}"


def _nice_ticks(lo, hi, target=6):
    """Round tick positions covering [lo, hi]."""
    if not math.isfinite(lo) or not math.isfinite(hi):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = 10.0 * mag
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if (hi - lo) / (mult * mag) <= target:
            step = mult * mag
            break
    first = math.ceil(lo / step - 1e-9)
    last = math.floor(hi / step + 1e-9)
    return [k * step for k in range(first, last + 1)]


def _tick_label(value, step):
    decimals = max(0, -int(math.floor(math.log10(step) + 1e-9)))
    text = f"{value:.{decimals}f}"
    return text if text != "-0" else "0"


def _data_range(values, pad_frac=0.04, force=None):
    if force is not None:
        return float(force[0]), float(force[1])
    lo = min(values)
    hi = max(values)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = (hi - lo) * pad_frac
    return lo - pad, hi + pad


class _Frame:
    """Maps data coordinates onto the pixel plot area."""

    def __init__(self, width, height, x_range, y_range):
        self.width, self.height = width, height
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.px0, self.px1 = MARGIN_L, width - MARGIN_R
        self.py0, self.py1 = height - MARGIN_B, MARGIN_T

    def x(self, v):
        t = (v - self.x0) / (self.x1 - self.x0)
        return self.px0 + t * (self.px1 - self.px0)

    def y(self, v):
        t = (v - self.y0) / (self.y1 - self.y0)
        return self.py0 + t * (self.py1 - self.py0)


def _chart_open(width, height, title, metadata_csv):
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<title>{_esc(title)}</title>',
        f'<metadata id="chart-data"><![CDATA[\n{metadata_csv}]]></metadata>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{width / 2:.0f}" y="22" font-family="sans-serif" '
        f'font-size="15" text-anchor="middle" fill="#111111">'
        f'{_esc(title)}</text>',
    ]
    return parts


def _chart_axes(parts, frame, xlabel, ylabel, x_ticks, y_ticks,
                x_tick_labels=None):
    f = frame
    for i, t in enumerate(x_ticks):
        px = f.x(t)
        if not f.px0 - 0.5 <= px <= f.px1 + 0.5:
            continue
        label = x_tick_labels[i] if x_tick_labels else \
            _tick_label(t, x_ticks[1] - x_ticks[0] if len(x_ticks) > 1 else 1)
        parts.append(f'<line x1="{_f(px)}" y1="{_f(f.py0)}" x2="{_f(px)}" '
                     f'y2="{_f(f.py1)}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{_f(px)}" y="{_f(f.py0 + 18)}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'text-anchor="middle" fill="#333333">{_esc(label)}</text>')
    for t in y_ticks:
        py = f.y(t)
        if not f.py1 - 0.5 <= py <= f.py0 + 0.5:
            continue
        label = _tick_label(t, y_ticks[1] - y_ticks[0] if len(y_ticks) > 1 else 1)
        parts.append(f'<line x1="{_f(f.px0)}" y1="{_f(py)}" x2="{_f(f.px1)}" '
                     f'y2="{_f(py)}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{_f(f.px0 - 6)}" y="{_f(py + 4)}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'text-anchor="end" fill="#333333">{_esc(label)}</text>')
    parts.append(f'<rect x="{_f(f.px0)}" y="{_f(f.py1)}" '
                 f'width="{_f(f.px1 - f.px0)}" height="{_f(f.py0 - f.py1)}" '
                 f'fill="none" stroke="#333333" stroke-width="1"/>')
    parts.append(f'<text x="{_f((f.px0 + f.px1) / 2)}" '
                 f'y="{_f(f.py0 + 38)}" font-family="sans-serif" '
                 f'font-size="12" text-anchor="middle" fill="#111111">'
                 f'{_esc(xlabel)}</text>')
    parts.append(f'<text x="18" y="{_f((f.py0 + f.py1) / 2)}" '
                 f'font-family="sans-serif" font-size="12" '
                 f'text-anchor="middle" fill="#111111" '
                 f'transform="rotate(-90 18 {_f((f.py0 + f.py1) / 2)})">'
                 f'{_esc(ylabel)}</text>')


def line_chart(series, *, title="", xlabel="", ylabel="", refline_y=None,
               x_range=None, y_range=None, width=760, height=480,
               metadata_csv=""):
    """Multi-series line chart.

    series is a sequence of dicts with keys name, x, y and optional color
    and dash ('solid', 'dash-dot', 'dashed'). Returns SVG text.
    """
    all_x = [float(v) for s in series for v in s["x"]]
    all_y = [float(v) for s in series for v in s["y"]]
    if refline_y is not None:
        all_y.append(float(refline_y))
    frame = _Frame(width, height, _data_range(all_x, force=x_range),
                   _data_range(all_y, force=y_range))

    parts = _chart_open(width, height, title, metadata_csv)
    _chart_axes(parts, frame, xlabel, ylabel,
                _nice_ticks(frame.x0, frame.x1),
                _nice_ticks(frame.y0, frame.y1))

    if refline_y is not None:
        py = frame.y(refline_y)
        parts.append(f'<line x1="{_f(frame.px0)}" y1="{_f(py)}" '
                     f'x2="{_f(frame.px1)}" y2="{_f(py)}" stroke="#888888" '
                     f'stroke-width="1" stroke-dasharray="4,4"/>')
        parts.append(f'<text x="{_f(frame.px1 - 4)}" y="{_f(py - 5)}" '
                     f'font-family="sans-serif" font-size="10" '
                     f'text-anchor="end" fill="#666666">{refline_y:g}</text>')

    for i, s in enumerate(series):
        color = s.get("color") or PALETTE[i % len(PALETTE)]
        dash = DASH_PATTERNS.get(s.get("dash", "solid"))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        points = " ".join(f"{_f(frame.x(float(x)))},{_f(frame.y(float(y)))}"
                          for x, y in zip(s["x"], s["y"]))
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="1.6"{dash_attr} points="{points}"/>')

    legend_y = MARGIN_T + 8
    for i, s in enumerate(series):
        color = s.get("color") or PALETTE[i % len(PALETTE)]
        dash = DASH_PATTERNS.get(s.get("dash", "solid"))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        lx = frame.px1 - 170
        ly = legend_y + 16 * i
        parts.append(f'<line x1="{_f(lx)}" y1="{_f(ly)}" x2="{_f(lx + 26)}" '
                     f'y2="{_f(ly)}" stroke="{color}" '
                     f'stroke-width="1.6"{dash_attr}/>')
        parts.append(f'<text x="{_f(lx + 32)}" y="{_f(ly + 4)}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'fill="#111111">{_esc(s["name"])}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def box_chart(boxes, *, title="", xlabel="", ylabel="", width=760,
              height=480, metadata_csv=""):
    """Boxplot chart from precomputed summary statistics.

    boxes is a sequence of dicts with keys name, stats (SummaryStats) and
    optional color. Whiskers, quartile box, and median come straight from
    the stats; no raw data is consulted.
    """
    lo = min(b["stats"].whisker_low for b in boxes)
    hi = max(b["stats"].whisker_high for b in boxes)
    frame = _Frame(width, height, (-0.5, len(boxes) - 0.5),
                   _data_range([lo, hi]))

    parts = _chart_open(width, height, title, metadata_csv)
    _chart_axes(parts, frame, xlabel, ylabel,
                list(range(len(boxes))),
                _nice_ticks(frame.y0, frame.y1),
                x_tick_labels=[b["name"] for b in boxes])

    half = 0.28
    for i, b in enumerate(boxes):
        st = b["stats"]
        color = b.get("color") or PALETTE[i % len(PALETTE)]
        cx = frame.x(i)
        x_l, x_r = frame.x(i - half), frame.x(i + half)
        y_lo, y_hi = frame.y(st.whisker_low), frame.y(st.whisker_high)
        y_q1, y_q3 = frame.y(st.q1), frame.y(st.q3)
        y_med = frame.y(st.median)
        cap = (x_r - x_l) * 0.3
        parts.append(f'<line x1="{_f(cx)}" y1="{_f(y_lo)}" x2="{_f(cx)}" '
                     f'y2="{_f(y_q1)}" stroke="{color}" stroke-width="1.2"/>')
        parts.append(f'<line x1="{_f(cx)}" y1="{_f(y_q3)}" x2="{_f(cx)}" '
                     f'y2="{_f(y_hi)}" stroke="{color}" stroke-width="1.2"/>')
        for y_cap in (y_lo, y_hi):
            parts.append(f'<line x1="{_f(cx - cap)}" y1="{_f(y_cap)}" '
                         f'x2="{_f(cx + cap)}" y2="{_f(y_cap)}" '
                         f'stroke="{color}" stroke-width="1.2"/>')
        parts.append(f'<rect x="{_f(x_l)}" y="{_f(y_q3)}" '
                     f'width="{_f(x_r - x_l)}" height="{_f(y_q1 - y_q3)}" '
                     f'fill="{color}" fill-opacity="0.25" '
                     f'stroke="{color}" stroke-width="1.2"/>')
        parts.append(f'<line x1="{_f(x_l)}" y1="{_f(y_med)}" x2="{_f(x_r)}" '
                     f'y2="{_f(y_med)}" stroke="{color}" stroke-width="2"/>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def extract_metadata_csv(svg_text):
    """The CSV carried in a chart's metadata block (inverse of embedding)."""
    start = svg_text.index("<![CDATA[\n") + len("<![CDATA[\n")
    end = svg_text.index("]]></metadata>")
    return svg_text[start:end]
