"""Reliability curves from error-versus-horizon data.

The response (displacement error) is regressed on the process parameter
(prediction horizon) as a-hat = b + m*a + eps with eps ~ N(0, tau), fitted
by maximum likelihood on one of four axis-scale combinations. The
probability of an accurate prediction at horizon a is
P(a-hat < a_th) = Phi((a_th - b - m*a)/tau); its one-sided 95% lower
bound follows from the delta method on the MLE covariance. a_90 and
a_90/95 are the horizons where the point estimate and the bound reach 90%.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import (AlignmentError, CovarianceError, InputError,
                     ScaleDomainError, SingularDesignError)
from .trajectory import _readonly

SCALES = ("linear", "logarithmic")
DEFAULT_THRESHOLD_M = 20.0
DEFAULT_H_MAX_MIN = 5.0
DEFAULT_CONFIDENCE = 0.95
GRID_STEP_MIN = 0.05

# Admissibility limit for |corr(|residual|, a)| in transform selection.
HETEROSCEDASTICITY_LIMIT = 0.7


def _apply_scale(values, scale, what):
    if scale == "linear":
        return np.asarray(values, dtype=np.float64)
    arr = np.asarray(values, dtype=np.float64)
    if np.any(arr <= 0.0):
        raise ScaleDomainError(f"logarithmic {what}-scale requires strictly "
                               f"positive {what} values")
    return np.log(arr)


@dataclass(frozen=True)
class AxisTransform:
    """Axis-scale combination for the regression of a-hat on a."""

    a_scale: str = "linear"
    ahat_scale: str = "linear"

    def __post_init__(self):
        if self.a_scale not in SCALES or self.ahat_scale not in SCALES:
            raise InputError(f"scales must be one of {SCALES}")

    @property
    def name(self):
        short = {"linear": "lin", "logarithmic": "log"}
        return f"{short[self.a_scale]}-{short[self.ahat_scale]}"

    def apply_a(self, values):
        return _apply_scale(values, self.a_scale, "a")

    def apply_ahat(self, values):
        return _apply_scale(values, self.ahat_scale, "a-hat")


# Tie-break preference order for transform selection.
CANDIDATE_TRANSFORMS = (
    AxisTransform("linear", "linear"),
    AxisTransform("linear", "logarithmic"),
    AxisTransform("logarithmic", "linear"),
    AxisTransform("logarithmic", "logarithmic"),
)


@dataclass(frozen=True)
class LevelData:
    """Process-parameter levels (minutes) with their responses (meters).

    Levels are non-decreasing; repeated levels are permitted so that both
    per-level averages and pooled raw scatter fit through the same path.
    samples_per_level records how many raw series each averaged response
    summarizes (None for pooled or raw data).
    """

    levels: np.ndarray
    responses: np.ndarray
    samples_per_level: int = None

    def __post_init__(self):
        lv = _readonly(self.levels, np.float64)
        rs = _readonly(self.responses, np.float64)
        if lv.ndim != 1 or lv.shape != rs.shape:
            raise InputError("levels/responses must be equal-length 1-D arrays")
        if lv.size < 3:
            raise InputError("at least 3 points are required for a fit")
        if np.any(np.diff(lv) < 0):
            raise InputError("levels must be non-decreasing")
        if not (np.all(np.isfinite(lv)) and np.all(np.isfinite(rs))):
            raise InputError("levels/responses must be finite")
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "responses", rs)

    @property
    def n_distinct(self):
        return int(np.unique(self.levels).size)


@dataclass(frozen=True)
class RegressionFit:
    """MLE parameters of the linear model on the transformed axes.

    covariance is the 3x3 inverse observed Fisher information over
    (b, m, tau); degenerate marks a perfect fit (tau = 0), for which the
    POAP curve becomes a step function.
    """

    b: float
    m: float
    tau: float
    covariance: np.ndarray
    transform: AxisTransform
    n: int
    r_squared: float
    degenerate: bool = False

    def __post_init__(self):
        cov = _readonly(self.covariance, np.float64)
        if cov.shape != (3, 3):
            raise InputError("covariance must be 3x3")
        if self.tau < 0.0:
            raise InputError("tau must be non-negative")
        if not 0.0 <= self.r_squared <= 1.0:
            raise InputError("r_squared must lie in [0, 1]")
        object.__setattr__(self, "covariance", cov)


@dataclass(frozen=True)
class TransformSelection:
    """Outcome of the four-way transform comparison.

    r_squared maps each evaluated transform name to its fit quality;
    admissible records which passed the heteroscedasticity screen.
    fallback is set when every candidate failed the screen and the
    selection reverted to the best r-squared overall.
    """

    transform: AxisTransform
    r_squared: dict
    admissible: dict
    fallback: bool = False


@dataclass(frozen=True)
class HorizonSolution:
    """Horizon at which a curve reaches the target probability.

    value is in minutes; censored marks curves still above the target at
    the largest evaluated horizon (value = h_max); unreliable marks curves
    below the target at all horizons (value = 0).
    """

    value: float
    censored: bool = False
    unreliable: bool = False


@dataclass(frozen=True)
class PoapCurve:
    """Point-estimate and lower-bound reliability curves over the horizon."""

    threshold: float
    h_max: float
    grid: np.ndarray
    p: np.ndarray
    p_lower95: np.ndarray
    a90: HorizonSolution
    a90_95: HorizonSolution
    fit: RegressionFit
    selection: TransformSelection
    n_series: int
    confidence: float = DEFAULT_CONFIDENCE

    def __post_init__(self):
        for name in ("grid", "p", "p_lower95"):
            object.__setattr__(self, name,
                               _readonly(getattr(self, name), np.float64))


def average_per_level(series):
    """Mean response per horizon level across samples.

    All series must share one horizon grid exactly; the offender is named
    otherwise.
    """
    series = list(series)
    if not series:
        raise InputError("no error series to average")
    ref = series[0]
    for s in series[1:]:
        if s.horizons.shape != ref.horizons.shape or \
                not np.array_equal(s.horizons, ref.horizons):
            raise AlignmentError(
                f"series {s.sample_id!r} horizon grid differs from "
                f"{ref.sample_id!r}")
    means = np.mean(np.vstack([s.errors for s in series]), axis=0)
    return LevelData(ref.horizons.copy(), means,
                     samples_per_level=len(series))


def pool_series(series):
    """All raw (horizon, error) pairs of the series, sorted by horizon.

    Levels repeat; use for fits on raw scatter rather than level means.
    """
    series = list(series)
    if not series:
        raise InputError("no error series to pool")
    levels = np.concatenate([s.horizons for s in series])
    responses = np.concatenate([s.errors for s in series])
    order = np.argsort(levels, kind="stable")
    return LevelData(levels[order], responses[order])


def _ols(x, y):
    """Closed-form least squares of y on x: (b, m, sse, sst)."""
    xb, yb = np.mean(x), np.mean(y)
    dx, dy = x - xb, y - yb
    sxx = np.dot(dx, dx)
    if sxx == 0.0:
        raise SingularDesignError("zero variance in the process parameter")
    m = np.dot(dx, dy) / sxx
    b = yb - m * xb
    resid = y - b - m * x
    sse = float(np.dot(resid, resid))
    sst = float(np.dot(dy, dy))
    return float(b), float(m), sse, sst


def _abs_resid_corr(x, resid):
    """Correlation of |residual| with x; 0 when either side is constant."""
    r = np.abs(resid)
    rc = r - np.mean(r)
    xc = x - np.mean(x)
    denom = np.sqrt(np.dot(rc, rc) * np.dot(xc, xc))
    if denom == 0.0:
        return 0.0
    return float(np.dot(rc, xc) / denom)


def _r2(sse, sst):
    if sst == 0.0:
        return 1.0 if sse <= 1e-300 else 0.0
    return min(max(1.0 - sse / sst, 0.0), 1.0)


def select_transform(data, limit=HETEROSCEDASTICITY_LIMIT):
    """Pick the axis transform whose fit is straightest and most even.

    All four scale combinations are fitted (log variants only when the
    data admit them); candidates whose |corr(|residual|, a)| exceeds the
    limit are screened out as heteroscedastic; the survivor with the
    highest r-squared wins, ties resolved by the fixed preference order
    lin-lin, lin-log, log-lin, log-log. If everything is screened out the
    best r-squared overall is returned with the fallback flag set.
    """
    r2s, admissible, fits = {}, {}, {}
    for tf in CANDIDATE_TRANSFORMS:
        try:
            x = tf.apply_a(data.levels)
            y = tf.apply_ahat(data.responses)
            b, m, sse, sst = _ols(x, y)
        except (ScaleDomainError, SingularDesignError):
            continue
        r2s[tf.name] = _r2(sse, sst)
        resid = y - b - m * x
        admissible[tf.name] = abs(_abs_resid_corr(x, resid)) <= limit
        fits[tf.name] = tf

    if not r2s:
        raise SingularDesignError("no axis transform admits a fit")

    def best_among(names):
        chosen, chosen_r2 = None, -np.inf
        for tf in CANDIDATE_TRANSFORMS:
            if tf.name in names and r2s[tf.name] > chosen_r2:
                chosen, chosen_r2 = tf, r2s[tf.name]
        return chosen

    survivors = [name for name, ok in admissible.items() if ok]
    if survivors:
        return TransformSelection(best_among(survivors), r2s, admissible)
    return TransformSelection(best_among(list(r2s)), r2s, admissible,
                              fallback=True)


def fit_mle(data, transform=AxisTransform()):
    """Maximum-likelihood fit of the linear model on transformed axes.

    For the uncensored normal model the MLE equals ordinary least squares
    for (b, m) with tau^2 = SSE/n (divide by n). The covariance is the
    inverse observed Fisher information: Var(b, m) = tau^2 (X'X)^-1,
    Var(tau) = tau^2/(2n), zero cross-covariance with tau.
    """
    x = transform.apply_a(data.levels)
    y = transform.apply_ahat(data.responses)
    n = x.size
    b, m, sse, sst = _ols(x, y)
    tau = np.sqrt(max(sse, 0.0) / n)

    cov = np.zeros((3, 3))
    if tau > 0.0:
        xb = np.mean(x)
        sxx = float(np.dot(x - xb, x - xb))
        t2 = tau * tau
        cov[0, 0] = t2 * (1.0 / n + xb * xb / sxx)
        cov[1, 1] = t2 / sxx
        cov[0, 1] = cov[1, 0] = -t2 * xb / sxx
        cov[2, 2] = t2 / (2.0 * n)

    return RegressionFit(b=b, m=m, tau=float(tau), covariance=cov,
                         transform=transform, n=int(n),
                         r_squared=_r2(sse, sst), degenerate=(tau == 0.0))


def _transformed_z(fit, threshold, a):
    x = fit.transform.apply_a(a)
    th = float(fit.transform.apply_ahat(np.asarray(threshold,
                                                   dtype=np.float64)))
    mean = fit.b + fit.m * x
    return x, th, mean


def poap(fit, threshold, a):
    """P(a-hat < threshold) at horizon a under the fitted model.

    Handles scalars or arrays of a; a degenerate (tau = 0) fit yields the
    step function 1 when the regression mean lies below the threshold,
    else 0.
    """
    x, th, mean = _transformed_z(fit, threshold, a)
    if fit.tau == 0.0:
        out = (mean < th).astype(np.float64)
    else:
        out = ndtr((th - mean) / fit.tau)
    return float(out) if np.ndim(out) == 0 else out


def wald_lower_bound(fit, threshold, a, confidence=DEFAULT_CONFIDENCE):
    """One-sided lower confidence bound of the POAP at horizon a.

    Propagates the MLE covariance through z(a) = (a_th - b - m a)/tau by
    the delta method with gradient (-1/tau, -a/tau, -z/tau) and returns
    Phi(z - q * SE(z)) for the one-sided normal quantile q.
    """
    if not 0.0 < confidence < 1.0:
        raise InputError("confidence must lie in (0, 1)")
    if fit.tau == 0.0:
        return poap(fit, threshold, a)

    cov = fit.covariance
    if not np.all(np.isfinite(cov)) or np.any(np.diag(cov) < 0.0):
        raise CovarianceError("covariance is non-finite or has negative "
                              "variances")

    x, th, mean = _transformed_z(fit, threshold, a)
    z = (th - mean) / fit.tau
    g0 = -1.0 / fit.tau
    g1 = -x / fit.tau
    g2 = -z / fit.tau
    se2 = (cov[0, 0] * g0 * g0 + cov[1, 1] * g1 * g1 + cov[2, 2] * g2 * g2
           + 2.0 * (cov[0, 1] * g0 * g1 + cov[0, 2] * g0 * g2
                    + cov[1, 2] * g1 * g2))
    se2 = np.asarray(se2, dtype=np.float64)
    if np.any(se2 < -1e-9):
        raise CovarianceError("delta-method variance is negative")
    se = np.sqrt(np.maximum(se2, 0.0))
    out = ndtr(z - ndtri(confidence) * se)
    return float(out) if np.ndim(out) == 0 else out


def solve_a_at_probability(curve_fn, target=0.9, h_max=DEFAULT_H_MAX_MIN,
                           eps=1e-9, tol=1e-12):
    """Largest horizon in (0, h_max] where the curve still meets the target.

    Assumes the curve is non-increasing. Bisection narrows the crossing to
    tol minutes. A curve above the target everywhere is censored at h_max;
    one below the target already at eps is flagged unreliable.
    """
    if curve_fn(h_max) >= target:
        return HorizonSolution(float(h_max), censored=True)
    if curve_fn(eps) < target:
        return HorizonSolution(0.0, unreliable=True)
    lo, hi = eps, float(h_max)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if curve_fn(mid) >= target:
            lo = mid
        else:
            hi = mid
    return HorizonSolution(lo)


def build_poap_curve(series, threshold=DEFAULT_THRESHOLD_M,
                     h_max=DEFAULT_H_MAX_MIN, confidence=DEFAULT_CONFIDENCE,
                     target=0.9, grid_step=GRID_STEP_MIN, transform=None):
    """Full reliability analysis of a group of error series.

    Averages responses per horizon level, selects the axis transform
    (unless one is forced), fits by maximum likelihood, evaluates the
    point-estimate and lower-bound curves on the grid, and extracts the
    target horizons.
    """
    if threshold <= 0.0:
        raise InputError("threshold must be positive")
    if h_max <= 0.0:
        raise InputError("h_max must be positive")

    series = list(series)
    data = average_per_level(series)
    if data.n_distinct < 3:
        raise InputError("POAP analysis needs at least 3 distinct horizon "
                         "levels")
    if transform is None:
        selection = select_transform(data)
    else:
        selection = TransformSelection(transform, {}, {})
    fit = fit_mle(data, selection.transform)

    grid = np.arange(1, int(round(h_max / grid_step)) + 1) * grid_step
    p = np.atleast_1d(poap(fit, threshold, grid))
    p_low = np.atleast_1d(wald_lower_bound(fit, threshold, grid, confidence))

    a90 = solve_a_at_probability(
        lambda a: poap(fit, threshold, a), target, h_max)
    a90_95 = solve_a_at_probability(
        lambda a: wald_lower_bound(fit, threshold, a, confidence),
        target, h_max)

    return PoapCurve(threshold=float(threshold), h_max=float(h_max),
                     grid=grid, p=p, p_lower95=p_low, a90=a90,
                     a90_95=a90_95, fit=fit, selection=selection,
                     n_series=len(series), confidence=confidence)


def render_horizon(solution, h_max=DEFAULT_H_MAX_MIN, decimals=3):
    """Report rendering: censored values as "> h_max", else fixed decimals
    with trailing zeros trimmed."""
    if solution.censored:
        return f"> {h_max:g}"
    if solution.unreliable:
        return "0"
    text = f"{solution.value:.{decimals}f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def curve_csv_text(curve):
    """CSV body of the curve grid: a_min,p,p_lower95."""
    lines = ["a_min,p,p_lower95"]
    for a, p, pl in zip(curve.grid, curve.p, curve.p_lower95):
        lines.append(f"{float(a)!r},{float(p)!r},{float(pl)!r}")
    return "\n".join(lines) + "\n"


def write_curve_csv(path, curve):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(curve_csv_text(curve))


def curve_summary(curve, model, label):
    """Machine-readable fit summary in the stable key order."""
    def horizon_value(sol):
        if sol.censored:
            return f"> {curve.h_max:g}"
        return float(sol.value)

    return {
        "model": model,
        "label": label,
        "transform": curve.fit.transform.name,
        "b": curve.fit.b,
        "m": curve.fit.m,
        "tau": curve.fit.tau,
        "r2": curve.fit.r_squared,
        "n": curve.fit.n,
        "threshold_m": curve.threshold,
        "a90": horizon_value(curve.a90),
        "a90_95": horizon_value(curve.a90_95),
        "censored": bool(curve.a90.censored or curve.a90_95.censored),
    }


def write_summary_json(path, summary):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
