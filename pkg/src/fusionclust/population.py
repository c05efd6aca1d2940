"""Population-level analog of the fusion clustering path for 1-d mixtures.

For a density restricted to an interval, the quantity driving everything is
the gap between the conditional means of the two pieces either side of a cut
point.  A cluster is split where that gap is maximized; when the maximizer
sits at an endpoint the interval is truncated instead, shrinking along the
curve on which both endpoints achieve the maximum.  The first interval where
an interior maximizer takes over, detected through the sign change of the
two sub-interval balance terms, yields the population split.

All quantities are computed numerically; Gaussian mixtures use closed forms
throughout, other families fall back to quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .mixtures import MixtureModel

__all__ = [
    "NoBalanceError",
    "PopulationSplit",
    "MisclassificationReport",
    "mean_gap",
    "mean_gap_slope",
    "midpoint_imbalance",
    "balanced_right_end",
    "find_population_split",
    "split_size",
    "misclassification_report",
    "population_table_row",
]


class NoBalanceError(RuntimeError):
    """No balanced right endpoint exists below the hint: the truncation curve ended."""


@dataclass(frozen=True)
class PopulationSplit:
    """Outcome of the population procedure on a mixture.

    When ``found`` the cluster (left_edge, right_edge) is split at
    ``split_point``; otherwise the truncation collapsed the support first.
    ``density_min`` is the interior local minimum of the density when it is
    unique, ``second_split_found`` reports whether recursing on the
    sub-clusters produced another split.
    """

    found: bool
    left_edge: float | None = None
    split_point: float | None = None
    right_edge: float | None = None
    density_min: float | None = None
    second_split_found: bool = False

    def __post_init__(self):
        if self.found:
            if not (self.left_edge < self.split_point < self.right_edge):
                raise ValueError("split point must lie inside the cluster")

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "left_edge": self.left_edge,
            "split_point": self.split_point,
            "right_edge": self.right_edge,
            "density_min": self.density_min,
            "second_split_found": self.second_split_found,
        }


@dataclass(frozen=True)
class MisclassificationReport:
    """Two-component classification error of the procedure vs the oracle cut."""

    s_mc: float
    mce_oracle: float
    mce_procedure: float
    excess: float

    def to_dict(self) -> dict:
        return {
            "s_mc": self.s_mc,
            "mce_oracle": self.mce_oracle,
            "mce_procedure": self.mce_procedure,
            "excess": self.excess,
        }


# ---------------------------------------------------------------------------
# criterion and its derivative
# ---------------------------------------------------------------------------

def mean_gap(model: MixtureModel, lo: float, hi: float, at: float) -> float:
    """Gap between the conditional means right and left of ``at`` in (lo, hi).

    At the endpoints the convention is the distance between the whole
    interval's conditional mean and that endpoint, which is the gap's
    continuous limit.
    """
    if not lo <= at <= hi:
        raise ValueError("need lo <= at <= hi")
    if at == lo:
        return model.truncated_mean(lo, hi) - lo
    if at == hi:
        return hi - model.truncated_mean(lo, hi)
    return model.truncated_mean(at, hi) - model.truncated_mean(lo, at)


def mean_gap_slope(model: MixtureModel, lo: float, hi: float, at) -> float | np.ndarray:
    """Sign-equivalent derivative of ``mean_gap`` in its cut point (Gaussian only).

    Equals the derivative times a strictly positive factor, so zero crossings
    locate the stationary points of the gap exactly.  Accepts an array of cut
    points.  Closed form, hence restricted to all-normal mixtures.
    """
    if not model.is_gaussian:
        raise ValueError("mean_gap_slope requires a mixture of normal components")
    at = np.asarray(at, dtype=float)
    mu = model.truncated_mean(lo, hi)
    p_left = model.prob(lo, at)
    p_right = model.prob(at, hi)
    lower_xint = model._gauss_xint(np.float64(lo), at)
    out = mu * p_left * p_left + (p_right - p_left) * lower_xint - at * p_left * p_right
    return out if out.shape else float(out)


def midpoint_imbalance(model: MixtureModel, lo: float, hi) -> float | np.ndarray:
    """Conditional mean minus interval midpoint; zero when the interval balances."""
    hi_arr = np.asarray(hi, dtype=float)
    if hi_arr.shape and model.is_gaussian:
        lo_arr = np.full_like(hi_arr, lo)
        p = model.prob(lo_arr, hi_arr)
        if np.any(p <= 0.0):
            raise ValueError("interval carries no probability")
        return model._gauss_xint(lo_arr, hi_arr) / p - 0.5 * (lo + hi_arr)
    if hi_arr.shape:
        return np.array([model.truncated_mean(lo, h) - 0.5 * (lo + h) for h in hi_arr])
    return model.truncated_mean(lo, float(hi)) - 0.5 * (lo + float(hi))


def balanced_right_end(model: MixtureModel, lo: float, hi_hint: float, *,
                       step: float | None = None) -> float:
    """Largest right endpoint at or below ``hi_hint`` balancing the interval.

    Scans downward from the hint for a sign change of the imbalance, then
    sharpens the root by bisection to 1e-10.  Raises :class:`NoBalanceError`
    when no balanced endpoint exists above ``lo``.
    """
    if not lo < hi_hint:
        raise NoBalanceError(f"empty interval ({lo}, {hi_hint})")
    if step is None:
        step = (hi_hint - lo) / 256.0
    r = hi_hint
    f = midpoint_imbalance(model, lo, r)
    if f == 0.0:
        return r
    while True:
        r2 = max(r - step, lo)
        if r2 >= r or r2 <= lo:
            raise NoBalanceError(f"no balanced endpoint below {hi_hint} for lo={lo}")
        f2 = midpoint_imbalance(model, lo, r2)
        if f2 == 0.0:
            return r2
        if (f2 > 0) != (f > 0):
            return float(
                brentq(lambda x: midpoint_imbalance(model, lo, x), r2, r, xtol=1e-10)
            )
        r, f = r2, f2


# ---------------------------------------------------------------------------
# interior maximizer of the gap
# ---------------------------------------------------------------------------

_GAUSS_SCAN_GRID = 257
_GENERIC_SCAN_GRID = 65


def _interior_gap_max(model, lo, hi, window):
    """Location of the interior local maximizer of the gap, or None.

    Search is restricted to the window between the outermost density modes:
    an interior maximizer cannot fall outside it, and the restriction keeps
    the scan away from ill-conditioned deep-tail regions.
    """
    wl, wr = max(lo, window[0]), min(hi, window[1])
    if not wl < wr:
        return None
    if model.is_gaussian:
        grid = np.linspace(wl, wr, _GAUSS_SCAN_GRID)
        h = mean_gap_slope(model, lo, hi, grid)
        sign = np.sign(h)
        nz = np.nonzero(sign)[0]
        candidates = []
        for i, j in zip(nz[:-1], nz[1:]):
            if sign[i] > 0 and sign[j] < 0:  # rising then falling: local max
                candidates.append(
                    brentq(lambda t: mean_gap_slope(model, lo, hi, t),
                           grid[i], grid[j], xtol=1e-10)
                )
        if not candidates:
            return None
        if len(candidates) == 1:
            return float(candidates[0])
        gaps = [mean_gap(model, lo, hi, c) for c in candidates]
        return float(candidates[int(np.argmax(gaps))])

    grid = np.linspace(wl, wr, _GENERIC_SCAN_GRID)
    gaps = np.array([mean_gap(model, lo, hi, t) for t in grid])
    i = int(np.argmax(gaps))
    if i == 0 or i == len(grid) - 1:
        return None
    res = minimize_scalar(
        lambda t: -mean_gap(model, lo, hi, t),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        options={"xtol": 1e-9},
    )
    return float(res.x)


# ---------------------------------------------------------------------------
# split detection scan
# ---------------------------------------------------------------------------

def _gaussian_width_bound(model):
    """Max interval width that can host a split of a two-normal mixture."""
    if model.is_gaussian and len(model.components) == 2:
        means = [c.mean for c in model.components]
        return 2.0 * abs(means[1] - means[0])
    return None


def _split_predicate(model, lo, hi, window):
    """(fired, split_point): both sub-intervals balance against the cut."""
    s = _interior_gap_max(model, lo, hi, window)
    if s is None:
        return False, None
    d1 = midpoint_imbalance(model, lo, s)
    d2 = midpoint_imbalance(model, s, hi)
    return bool(d1 < 0.0 < d2), s


def _scan_for_split(model, lo, hi, grid_step, minima, window, collapse_tol):
    """March the left edge along the balanced-truncation curve until the
    split predicate fires; refine the firing edge by bisection.

    Returns (left_edge, split_point, right_edge) or None when the interval
    loses all interior density minima (a unimodal restriction cannot split)
    or collapses.
    """
    width_bound = _gaussian_width_bound(model)
    prev = None  # last (lo, hi) where the predicate did not fire
    while True:
        if hi - lo < collapse_tol:
            return None
        if not any(lo < d < hi for d in minima):
            return None
        fired = False
        if width_bound is None or hi - lo <= width_bound:
            fired, _ = _split_predicate(model, lo, hi, window)
        if fired:
            break
        prev = (lo, hi)
        lo_next = lo + grid_step
        try:
            hi_next = balanced_right_end(model, lo_next, hi, step=grid_step)
        except NoBalanceError:
            return None
        lo, hi = lo_next, hi_next

    if prev is not None:
        # bisect the firing edge; the balanced end at the left bracket stays
        # a valid hint because the curve is decreasing
        a, hint_a = prev[0], prev[1]
        b, hint_b = lo, hi
        xtol = max(1e-8, 1e-5 * grid_step)
        while b - a > xtol:
            mid = 0.5 * (a + b)
            try:
                hm = balanced_right_end(model, mid, hint_a, step=grid_step)
            except NoBalanceError:
                a = mid
                continue
            ok, _ = _split_predicate(model, mid, hm, window)
            if ok:
                b, hint_b = mid, hm
            else:
                a, hint_a = mid, hm
        lo, hi = b, hint_b
    s = _interior_gap_max(model, lo, hi, window)
    if s is None:
        return None
    return lo, s, hi


def find_population_split(model: MixtureModel, grid_step: float | None = None, *,
                          tail_mass: float = 1e-9,
                          check_second_split: bool = True) -> PopulationSplit:
    """Run the population procedure on a mixture.

    The left edge starts at the ``tail_mass`` tail quantile (or the support
    edge when finite) and advances on a grid of ``grid_step`` (default 1e-3 of
    the interquantile span); the right edge follows through the balance
    equation, initialized at the outermost balanced endpoint.  At each stop
    the interior gap maximizer ``s`` is located and the two balance terms
    ``mean(lo,s)-(lo+s)/2`` and ``mean(s,hi)-(s+hi)/2`` are inspected; the
    first edge where they turn negative/positive is the split cluster.  If the
    interval becomes unimodal or collapses first there is no split.

    With ``check_second_split`` the procedure recurses on any sub-cluster
    still containing an interior density minimum.
    """
    extrema = model.find_local_extrema()
    minima = [x for x, kind in extrema if kind == "min"]
    modes = [x for x, kind in extrema if kind == "mode"]
    density_min = minima[0] if len(minima) == 1 else None
    if not minima:
        return PopulationSplit(found=False, density_min=None)

    lo0, hi_probe = model.tail_quantiles(tail_mass)
    slo, shi = model.support()
    lo0 = max(lo0, slo)
    hi_probe = min(hi_probe, shi)
    if grid_step is None:
        grid_step = 1e-3 * (hi_probe - lo0)
    collapse_tol = max(1e-6 * (hi_probe - lo0), 1e-12)

    # outermost balanced right endpoint; widen the probe if the interval is
    # still left-heavy at the clipped edge
    hi0 = hi_probe
    expansions = 0
    while midpoint_imbalance(model, lo0, hi0) > 0.0:
        hi0 = min(lo0 + 2.0 * (hi0 - lo0), shi)
        expansions += 1
        if hi0 >= shi or expansions > 64:
            hi0 = shi if math.isfinite(shi) else hi0
            break
    try:
        hi0 = balanced_right_end(model, lo0, hi0, step=(hi0 - lo0) / 256.0)
    except NoBalanceError:
        return PopulationSplit(found=False, density_min=density_min)

    window = (min(modes), max(modes)) if modes else (lo0, hi0)
    res = _scan_for_split(model, lo0, hi0, grid_step, minima, window, collapse_tol)
    if res is None:
        return PopulationSplit(found=False, density_min=density_min)
    left, point, right = res

    second = False
    if check_second_split:
        span = right - left
        for sub_lo, sub_hi in ((left, point), (point, right)):
            if not any(sub_lo < d < sub_hi for d in minima):
                continue
            sub_step = max(grid_step * (sub_hi - sub_lo) / span, grid_step * 1e-2)
            sub = _scan_for_split(model, sub_lo, sub_hi, sub_step, minima, window,
                                  collapse_tol)
            if sub is not None:
                second = True
                break
    return PopulationSplit(
        found=True,
        left_edge=float(left),
        split_point=float(point),
        right_edge=float(right),
        density_min=density_min,
        second_split_found=second,
    )


# ---------------------------------------------------------------------------
# split size and misclassification
# ---------------------------------------------------------------------------

def split_size(model: MixtureModel, lo: float, point: float, hi: float) -> float:
    """Smaller of the two sub-interval probabilities of a split."""
    if not lo < point < hi:
        raise ValueError("need lo < point < hi")
    return float(min(model.prob(lo, point), model.prob(point, hi)))


def misclassification_report(model: MixtureModel,
                             split: PopulationSplit) -> MisclassificationReport:
    """Classification error of thresholding at the split vs the optimal cut.

    Only defined for two-component mixtures.  The oracle cut solves
    ``w1 f1 = w2 f2`` between the component medians; the error of a cut ``s``
    is ``w1 P(X1 > s) + w2 P(X2 <= s)`` with components ordered by median.
    Without a split the procedure pools everything, misclassifying the
    lighter component entirely.
    """
    if len(model.components) != 2:
        raise ValueError("misclassification analysis needs exactly two components")
    d1, d2 = (c.dist() for c in model.components)
    w1, w2 = (float(w) for w in model.weights)
    med1, med2 = d1.ppf(0.5), d2.ppf(0.5)
    if med1 > med2:
        d1, d2, w1, w2, med1, med2 = d2, d1, w2, w1, med2, med1

    def density_diff(s):
        return w1 * d1.pdf(s) - w2 * d2.pdf(s)

    s_mc = float(brentq(density_diff, med1, med2, xtol=1e-10))

    def mce(s):
        return w1 * d1.sf(s) + w2 * d2.cdf(s)

    mce_oracle = float(mce(s_mc))
    if split.found:
        mce_proc = float(mce(split.split_point))
    else:
        mce_proc = min(w1, w2)
    return MisclassificationReport(
        s_mc=s_mc,
        mce_oracle=mce_oracle,
        mce_procedure=mce_proc,
        excess=mce_proc - mce_oracle,
    )


def population_table_row(model: MixtureModel,
                         grid_step: float | None = None) -> dict:
    """Split analysis of a two-normal mixture as one flat result row."""
    if not (model.is_gaussian and len(model.components) == 2):
        raise ValueError("table rows are defined for two-normal mixtures")
    c1, c2 = model.components
    w1, w2 = (float(w) for w in model.weights)
    if c1.mean > c2.mean:
        c1, c2, w1, w2 = c2, c1, w2, w1
    split = find_population_split(model, grid_step)
    report = misclassification_report(model, split)
    return {
        "p1": w1,
        "p2": w2,
        "mu1": c1.mean,
        "mu2": c2.mean,
        "d_min": split.density_min,
        "s_star": split.split_point,
        "L_star": split.left_edge,
        "R_star": split.right_edge,
        "second_split": "YES" if split.second_split_found else "NO",
        "s_mc": report.s_mc,
        "excess_mce": report.excess,
    }
