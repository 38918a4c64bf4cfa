"""Single-variable collapse analysis of rescaled <M^2(t)> curves.

Pipeline: detect each curve's crossover (bend) time, restrict to a
relative window [beta t_x, gamma t_x], evaluate the curve-to-curve spread
of log y on a common log-x grid,

    C(w) = (1/N_eff) sum_{j in J} Var_curves[log y(x_j)],

minimize over the exponent w, and repeat over a grid of windows.  The
median of the accepted per-window optima is the reported exponent, with a
systematic width from the central 16-84 quantile range.  A companion
diagnostic measures the relative spread across sizes at fixed h to tell a
single crossing from a genuine global collapse.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AnalysisError
from .scaling import CriticalConstants, RescaledCurve, rescale_curve
from .series import EnsembleSeries


class WindowRejected(Exception):
    """Signal that a window/exponent combination supports no comparison
    (empty overlap, too few curves, ...).  Not fatal: the window is
    marked unaccepted."""


@dataclass(frozen=True)
class CollapseWindow:
    """Relative fit window [beta_frac * t_x, gamma_frac * t_x]."""

    beta_frac: float
    gamma_frac: float

    def __post_init__(self):
        if not 0 < self.beta_frac < self.gamma_frac:
            raise ValueError(
                f"window requires 0 < beta < gamma, got ({self.beta_frac}, {self.gamma_frac})"
            )


@dataclass(frozen=True)
class CollapseSettings:
    """Tunable parameters of the collapse pipeline (all manifest-recorded)."""

    w_min: float = 0.2
    w_max: float = 3.0
    n_scan: int = 200
    refine_tol: float = 1e-3
    points_per_decade: int = 100
    min_curves: int = 2
    bend_fraction: float = 0.25
    bend_delta: float = 0.05
    # window acceptance thresholds
    min_overlap_decades: float = 0.3
    min_covered_points: int = 20
    min_triple_fraction: float = 0.25

    def __post_init__(self):
        if self.w_min <= 0 or self.w_max <= self.w_min:
            raise ValueError("need 0 < w_min < w_max")
        if self.min_curves < 2:
            raise ValueError("min_curves must be >= 2")


@dataclass(eq=False)
class WindowEstimate:
    """Result of the cost minimization for a single window."""

    window: CollapseWindow
    w_opt: float
    cost_min: float
    n_grid: int
    accepted: bool
    reason: str = ""


@dataclass(eq=False)
class CollapseResult:
    """Reported exponent with its window-ensemble systematic band."""

    w_rep: float
    sigma_sys: float
    k: float
    band: tuple[float, float]
    estimates: list[WindowEstimate]

    @property
    def accepted_estimates(self) -> list[WindowEstimate]:
        return [e for e in self.estimates if e.accepted]


@dataclass(eq=False)
class CrossingDiagnostic:
    """Relative spread across sizes on a common collapse-variable grid."""

    x_grid: np.ndarray = field(repr=False)
    delta_values: np.ndarray = field(repr=False)
    x_min: float

    def __post_init__(self):
        if np.any(self.delta_values < 0):
            raise ValueError("relative spread must be nonnegative")


@dataclass(eq=False)
class CommonGrid:
    """Log-spaced collapse-variable grid with per-curve coverage sets."""

    x_grid: np.ndarray = field(repr=False)
    kept: list[int]              # indices into the curve list
    coverage: np.ndarray = field(repr=False)  # bool, (n_kept, n_grid)
    j_mask: np.ndarray = field(repr=False)    # bool, grid points with enough coverage

    @property
    def n_effective(self) -> int:
        return int(self.j_mask.sum())


def default_window_grid() -> list[CollapseWindow]:
    """beta in {0.10, 0.15, ..., 0.50} x gamma in {0.60, 0.70, ..., 1.00}."""
    betas = [round(0.10 + 0.05 * i, 2) for i in range(9)]
    gammas = [round(0.60 + 0.10 * i, 2) for i in range(5)]
    return [CollapseWindow(b, g) for b in betas for g in gammas if b < g]


def detect_crossover_time(
    series: EnsembleSeries,
    early_fraction: float = 0.25,
    delta: float = 0.05,
) -> float:
    """Time at which <M^2(t)> bends away from its early-time power law.

    Fits log <M^2> vs log t over the earliest `early_fraction` of the
    log-time range and returns the first later time whose residual
    exceeds `delta` (natural log), or t_max if none does.
    """
    mask = (series.times > 0) & (series.mean_M2 > 0)
    if mask.sum() < 8:
        raise AnalysisError(
            f"bend detection needs >= 8 recorded times with t > 0 and positive "
            f"<M^2>, got {int(mask.sum())}"
        )
    logt = np.log(series.times[mask])
    logy = np.log(series.mean_M2[mask])
    cutoff = logt[0] + early_fraction * (logt[-1] - logt[0])
    early = logt <= cutoff
    if early.sum() < 3:
        early = np.zeros_like(early)
        early[:3] = True
        cutoff = logt[2]
    slope, intercept = np.polyfit(logt[early], logy[early], 1)
    residual = np.abs(logy - (slope * logt + intercept))
    later = logt > cutoff
    deviating = later & (residual > delta)
    if not deviating.any():
        return float(series.times[mask][-1])
    return float(series.times[mask][np.argmax(deviating)])


def build_common_grid(
    curves: list[RescaledCurve],
    points_per_decade: int = 100,
    min_curves: int = 2,
) -> CommonGrid:
    """Common log-spaced grid over the x-range where at least `min_curves`
    curves have usable (positive x and y) points.

    Raises WindowRejected when fewer than `min_curves` curves survive or
    their ranges do not overlap.
    """
    if len(curves) < 2:
        raise WindowRejected("need at least 2 curves")
    kept, lo_list, hi_list = [], [], []
    for idx, curve in enumerate(curves):
        m = (curve.x_values > 0) & (curve.y_values > 0)
        if m.sum() < 2:
            continue
        logx = np.log(curve.x_values[m])
        kept.append(idx)
        lo_list.append(logx[0])
        hi_list.append(logx[-1])
    if len(kept) < min_curves:
        raise WindowRejected(
            f"only {len(kept)} curves have >= 2 usable points (need {min_curves})"
        )
    lo = np.sort(lo_list)[min_curves - 1]
    hi = np.sort(hi_list)[len(kept) - min_curves]
    if hi <= lo:
        raise WindowRejected("curve x-ranges do not overlap")
    decades = (hi - lo) / math.log(10.0)
    n_pts = int(np.clip(math.ceil(decades * points_per_decade) + 1, 2, 4000))
    log_grid = np.linspace(lo, hi, n_pts)
    coverage = np.zeros((len(kept), n_pts), dtype=bool)
    for row, idx in enumerate(kept):
        curve = curves[idx]
        m = (curve.x_values > 0) & (curve.y_values > 0)
        logx = np.log(curve.x_values[m])
        coverage[row] = (log_grid >= logx[0]) & (log_grid <= logx[-1])
    j_mask = coverage.sum(axis=0) >= min_curves
    if not j_mask.any():
        raise WindowRejected("no grid point is covered by enough curves")
    return CommonGrid(x_grid=np.exp(log_grid), kept=kept, coverage=coverage, j_mask=j_mask)


def collapse_cost(curves: list[RescaledCurve], grid: CommonGrid) -> float:
    """Mean over covered grid points of the across-curve variance of log y.

    Interpolation is linear in (log x, log y); the variance at each point
    is the unbiased sample variance over the curves covering it.
    """
    n_pts = len(grid.x_grid)
    log_grid = np.log(grid.x_grid)
    logy = np.full((len(grid.kept), n_pts), np.nan)
    for row, idx in enumerate(grid.kept):
        curve = curves[idx]
        m = (curve.x_values > 0) & (curve.y_values > 0)
        logy[row, grid.coverage[row]] = np.interp(
            log_grid[grid.coverage[row]],
            np.log(curve.x_values[m]),
            np.log(curve.y_values[m]),
        )
    counts = grid.coverage.sum(axis=0)
    vals = np.where(grid.coverage, np.nan_to_num(logy), 0.0)
    mean = vals.sum(axis=0) / np.maximum(counts, 1)
    sq_dev = np.where(grid.coverage, (np.nan_to_num(logy) - mean) ** 2, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        var = sq_dev.sum(axis=0) / np.maximum(counts - 1, 1)
    return float(var[grid.j_mask].mean())


def _slice_series(series: EnsembleSeries, mask: np.ndarray) -> EnsembleSeries:
    return EnsembleSeries(
        label=series.label,
        times=series.times[mask],
        mean_M2=series.mean_M2[mask],
        stderr_M2=series.stderr_M2[mask],
        n_realizations=series.n_realizations,
        time_unit=series.time_unit,
    )


def _windowed_series(
    series_list: list[EnsembleSeries],
    window: CollapseWindow,
    settings: CollapseSettings,
) -> list[EnsembleSeries]:
    """Restrict each series to [beta t_x, gamma t_x]; drop unusable ones."""
    out = []
    for series in series_list:
        t_x = detect_crossover_time(series, settings.bend_fraction, settings.bend_delta)
        mask = (
            (series.times >= window.beta_frac * t_x)
            & (series.times <= window.gamma_frac * t_x)
            & (series.times > 0)
            & (series.mean_M2 > 0)
        )
        if mask.sum() >= 2:
            out.append(_slice_series(series, mask))
    return out


def _coverage_problem(grid: CommonGrid, n_curves: int, settings: CollapseSettings) -> str | None:
    """Reason the grid fails the overlap/coverage checks, or None if it passes."""
    counts = grid.coverage.sum(axis=0)
    log_span = math.log(grid.x_grid[-1] / grid.x_grid[0]) / math.log(10.0)
    if log_span < settings.min_overlap_decades:
        return f"overlap spans {log_span:.3f} decades (< {settings.min_overlap_decades})"
    if int((counts >= 2).sum()) < settings.min_covered_points:
        return (
            f"{int((counts >= 2).sum())} grid points with >= 2 curves "
            f"(< {settings.min_covered_points})"
        )
    if n_curves >= 3:
        triple_frac = float((counts >= 3).sum() / len(grid.x_grid))
        if triple_frac < settings.min_triple_fraction:
            return (
                f"{triple_frac:.0%} of grid points have >= 3 curves "
                f"(< {settings.min_triple_fraction:.0%})"
            )
    return None


def _window_cost(
    windowed: list[EnsembleSeries],
    constants: CriticalConstants,
    w: float,
    settings: CollapseSettings,
) -> tuple[float, CommonGrid]:
    """C(w) for one window; raises WindowRejected when the configuration
    at this w fails the overlap/coverage checks."""
    curves = [rescale_curve(s, constants, w) for s in windowed]
    grid = build_common_grid(curves, settings.points_per_decade, settings.min_curves)
    problem = _coverage_problem(grid, len(curves), settings)
    if problem is not None:
        raise WindowRejected(problem)
    return collapse_cost(curves, grid), grid


def optimize_w(
    series_list: list[EnsembleSeries],
    constants: CriticalConstants,
    window: CollapseWindow,
    settings: CollapseSettings = CollapseSettings(),
) -> WindowEstimate:
    """Minimize C(w) for one window: coarse scan then golden-section refine.

    Exponents where the curves fail the overlap/coverage checks are
    excluded from the minimization (shrunken overlap at extreme w gives
    artificially low spreads).  The estimate is unaccepted when no
    exponent admits a valid comparison or the cost landscape is
    degenerate (identical curves carry no information).
    """
    windowed = _windowed_series(series_list, window, settings)
    if len(windowed) < settings.min_curves:
        return WindowEstimate(
            window=window, w_opt=math.nan, cost_min=math.inf, n_grid=0,
            accepted=False,
            reason=f"only {len(windowed)} curves have >= 2 points in the window",
        )

    last_reason = ""

    def cost_at(w: float) -> float:
        nonlocal last_reason
        try:
            return _window_cost(windowed, constants, w, settings)[0]
        except WindowRejected as exc:
            last_reason = str(exc)
            return math.inf

    ws = np.linspace(settings.w_min, settings.w_max, settings.n_scan)
    costs = np.array([cost_at(w) for w in ws])
    finite = np.isfinite(costs)
    if not finite.any():
        return WindowEstimate(
            window=window, w_opt=math.nan, cost_min=math.inf, n_grid=0,
            accepted=False,
            reason=f"no scanned exponent passes the coverage checks ({last_reason})",
        )
    i_best = int(np.nanargmin(np.where(finite, costs, np.nan)))

    # golden-section refinement inside the bracketing scan interval
    a = float(ws[max(i_best - 1, 0)])
    b = float(ws[min(i_best + 1, len(ws) - 1)])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = cost_at(c), cost_at(d)
    while b - a > settings.refine_tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = cost_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = cost_at(d)
    w_opt = 0.5 * (a + b)
    try:
        cost_min, grid = _window_cost(windowed, constants, w_opt, settings)
    except WindowRejected:
        cost_min = math.inf
    if not math.isfinite(cost_min) or cost_min > costs[i_best]:
        w_opt = float(ws[i_best])
        cost_min, grid = _window_cost(windowed, constants, w_opt, settings)

    finite_costs = costs[finite]
    if finite_costs.max() - finite_costs.min() <= 1e-12 * max(1.0, finite_costs.max()):
        return WindowEstimate(
            window=window, w_opt=float(w_opt), cost_min=float(cost_min),
            n_grid=grid.n_effective, accepted=False,
            reason="flat cost landscape (curves carry no collapse information)",
        )
    return WindowEstimate(
        window=window, w_opt=float(w_opt), cost_min=float(cost_min),
        n_grid=grid.n_effective, accepted=True, reason="",
    )


def estimate_w(
    series_list: list[EnsembleSeries],
    constants: CriticalConstants,
    windows: list[CollapseWindow] | None = None,
    k: float = 4.0,
    settings: CollapseSettings = CollapseSettings(),
) -> CollapseResult:
    """Window-ensemble estimate: median of accepted per-window optima,
    systematic width (q84 - q16)/2, and the k-sigma band."""
    if windows is None:
        windows = default_window_grid()
    if len(windows) < 3:
        raise ValueError("need at least 3 windows")
    if k < 1:
        raise ValueError("band multiplier k must be >= 1")
    estimates = [optimize_w(series_list, constants, win, settings) for win in windows]
    accepted = [e.w_opt for e in estimates if e.accepted]
    if len(accepted) < 3:
        reasons = "; ".join(
            f"({e.window.beta_frac:g},{e.window.gamma_frac:g}): {e.reason}"
            for e in estimates if not e.accepted
        )
        raise AnalysisError(
            f"only {len(accepted)} of {len(windows)} windows accepted (need >= 3). "
            f"Rejections: {reasons}"
        )
    values = np.asarray(accepted)
    w_rep = float(np.median(values))
    q16, q84 = np.percentile(values, [16.0, 84.0])
    sigma_sys = float((q84 - q16) / 2.0)
    return CollapseResult(
        w_rep=w_rep,
        sigma_sys=sigma_sys,
        k=float(k),
        band=(w_rep - k * sigma_sys, w_rep + k * sigma_sys),
        estimates=estimates,
    )


def crossing_spread(
    curves: list[RescaledCurve],
    points_per_decade: int = 100,
) -> CrossingDiagnostic:
    """Relative spread across sizes, Delta(x) = (max_L - min_L)/mean, on a
    grid covering the x-range common to all curves.

    All curves must share the field h and differ in L; a sharp minimum of
    Delta marks a single crossing rather than a global collapse.
    """
    if len(curves) < 2:
        raise AnalysisError("need at least 2 curves at distinct L")
    labels = [c.label for c in curves]
    if len({(lab.family, lab.d, lab.h) for lab in labels}) != 1:
        raise ValueError("curves must share model family, dimension and field h")
    if len({lab.L for lab in labels}) != len(labels):
        raise ValueError("curves must have pairwise distinct L")
    los, his, interps = [], [], []
    for curve in curves:
        m = (curve.x_values > 0) & (curve.y_values > 0)
        if m.sum() < 2:
            raise AnalysisError(f"curve L={curve.label.L} has < 2 usable points")
        logx = np.log(curve.x_values[m])
        los.append(logx[0])
        his.append(logx[-1])
        interps.append((logx, np.log(curve.y_values[m])))
    lo, hi = max(los), min(his)
    if hi <= lo:
        raise AnalysisError("curves do not share an overlapping x-range")
    decades = (hi - lo) / math.log(10.0)
    n_pts = int(np.clip(math.ceil(decades * points_per_decade) + 1, 2, 4000))
    log_grid = np.linspace(lo, hi, n_pts)
    y = np.exp(np.stack([np.interp(log_grid, lx, ly) for lx, ly in interps]))
    delta = (y.max(axis=0) - y.min(axis=0)) / y.mean(axis=0)
    x_grid = np.exp(log_grid)
    return CrossingDiagnostic(
        x_grid=x_grid,
        delta_values=delta,
        x_min=float(x_grid[int(np.argmin(delta))]),
    )
