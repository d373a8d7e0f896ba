"""Topological entropy estimators (values in nats).

Three independent routes:

* braid route, exact: for 3-strand braids the entropy of the associated
  mapping class is log of the spectral radius of the SL(2,Z) image when
  that matrix is hyperbolic, else 0.
* braid route, dynamical: iterate the braid's action on integral curve
  coordinates and measure the exponential growth rate of the coordinate
  norm.  A plain least-squares slope of the log-norms carries an O(d/p)
  bias whenever the growth is polynomial of degree d (reducible braids),
  which would break the agreement with the exact oracle at the required
  tolerance; the estimate is therefore the intercept of the first
  differences regressed against 1/p over the tail of the range — exact in
  the limit for exponential growth, O(1/p^2)-accurate for polynomial
  growth.  The plain slope is recorded in params for comparison.
* map route: Bowen ball covers of a point grid under the dynamical metric
  d_{f,p}(x,y) = max_{k<p} |f^k x - f^k y| (greedy covers on a finite grid
  under-resolve, so the rate is biased low and flagged as such), and the
  growth rate of the length of a closed material curve under repeated
  transport (a lower-bound proxy, like the braid route).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .braids import BraidWord, sl2_image
from .dynamics import DiskMap, PolyCurve, circle_curve, transport_curve
from .dynnikov import (  # re-exported: coordinate ops live with the entropy
    apply_word,          # estimators that consume them
    dynnikov_update,
    norm1,
    round_curve,
    round_curves,
    zero,
)
from .errors import ResolutionError

LOWER_BOUND_TAG = "one-sided lower bound"


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    method: str  # bowen | curve_growth | dynnikov | sl2
    params: dict = field(default_factory=dict)
    error: float | str | None = None


# ---------------------------------------------------------------------------
# growth-rate fits
# ---------------------------------------------------------------------------


def growth_rate_extrapolated(log_values, tail_fraction: float = 0.5):
    """Limit growth rate of a sequence log N_1 .. log N_P.

    Fits the first differences y_p = log N_p - log N_{p-1} against 1/p over
    the trailing `tail_fraction` of the range and returns the intercept
    (the p -> infinity value) together with fit diagnostics, including the
    plain least-squares slope of log N_p against p."""
    logs = np.asarray(log_values, dtype=float)
    P = len(logs)
    if P < 2:
        raise ValueError("need at least two points to fit a growth rate")
    ps = np.arange(1, P + 1, dtype=float)
    plain = float(np.polyfit(ps, logs, 1)[0])
    diffs = np.diff(logs)  # y_p for p = 2..P
    dps = ps[1:]
    k = max(2, int(math.ceil(len(diffs) * tail_fraction)))
    tail_y = diffs[-k:]
    tail_x = 1.0 / dps[-k:]
    if len(tail_y) == 1:
        rate = float(tail_y[0])
        coef = (0.0, rate)
    else:
        coef = np.polyfit(tail_x, tail_y, 1)
        rate = float(coef[1])  # intercept at 1/p -> 0
    rate = max(rate, 0.0)
    return rate, {
        "plain_slope": plain,
        "tail_points": int(len(tail_y)),
        "tail_slope_vs_inv_p": float(coef[0]),
    }


def slope_last_half(log_values):
    """Plain least-squares slope over the last half of the p range."""
    logs = np.asarray(log_values, dtype=float)
    P = len(logs)
    if P < 2:
        raise ValueError("need at least two points to fit a slope")
    k = max(2, P // 2)
    ps = np.arange(P - k + 1, P + 1, dtype=float)
    return float(np.polyfit(ps, logs[-k:], 1)[0])


# ---------------------------------------------------------------------------
# braid entropies
# ---------------------------------------------------------------------------


def braid_entropy_sl2(word: BraidWord) -> EntropyEstimate:
    """Exact entropy of a 3-strand braid from its SL(2,Z) image: zero when
    |trace| <= 2, else log of the larger eigenvalue modulus."""
    m = sl2_image(word)
    tr = m[0][0] + m[1][1]
    t = abs(tr)
    if t <= 2:
        return EntropyEstimate(0.0, "sl2", {"trace": int(tr)}, error=0.0)
    # log((t + sqrt(t^2 - 4))/2) = log t + log((1 + sqrt(1 - 4/t^2))/2),
    # safe for traces far beyond float range
    ratio = 4.0 / (t * t)
    value = math.log(t) + math.log(0.5 * (1.0 + math.sqrt(1.0 - ratio)))
    return EntropyEstimate(value, "sl2", {"trace_abs": int(t)}, error=0.0)


def braid_entropy_dynnikov(
    word: BraidWord, p_max: int = 40, c0=None
) -> EntropyEstimate:
    """Entropy lower bound for any diffeomorphism inducing the braid, from
    the growth of the l1 norm of curve coordinates under iteration (exact
    integer dynamics).  With c0 = None the orbit sums the norms of all
    round curves."""
    if p_max < 8:
        raise ValueError("p_max must be >= 8")
    if c0 is not None:
        states = [tuple(c0)]
        if norm1(states[0]) == 0:
            raise ValueError("c0 must represent a nonempty lamination")
    else:
        states = list(round_curves(word.n))
    if not states or all(norm1(c) == 0 for c in states):
        return EntropyEstimate(
            0.0, "dynnikov", {"p_max": p_max, "note": "no curves"},
            error=LOWER_BOUND_TAG,
        )
    logs = []
    for _ in range(p_max):
        states = [apply_word(c, word.letters) for c in states]
        logs.append(math.log(sum(norm1(c) for c in states)))
    rate, params = growth_rate_extrapolated(logs)
    params["p_max"] = p_max
    return EntropyEstimate(rate, "dynnikov", params, error=LOWER_BOUND_TAG)


# ---------------------------------------------------------------------------
# map entropies
# ---------------------------------------------------------------------------


def _disk_grid(spacing: float) -> np.ndarray:
    ax = np.arange(-1.0 + spacing / 2, 1.0, spacing)
    X, Y = np.meshgrid(ax, ax)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    keep = (pts**2).sum(axis=1) <= (1.0 - spacing / 2) ** 2
    return pts[keep]


def _greedy_cover_count(orbits, p: int, eps: float, order) -> int:
    """Centers needed by one greedy pass to cover all grid points with
    d_{f,p}-balls of radius eps (an upper bound on the covering number)."""
    N = orbits.shape[1]
    covered = np.zeros(N, dtype=bool)
    count = 0
    eps2 = eps * eps
    for idx in order:
        if covered[idx]:
            continue
        count += 1
        d2 = np.zeros(N)
        for k in range(p):
            diff = orbits[k] - orbits[k, idx]
            np.maximum(d2, (diff**2).sum(axis=1), out=d2)
        covered |= d2 <= eps2
    return count


def bowen_entropy(
    f: DiskMap,
    eps_list=(0.2, 0.1, 0.05),
    p_max: int = 8,
    grid_density: float = 25.0,
    seed: int = 0,
) -> EntropyEstimate:
    """Bowen-ball cover growth on a point grid of spacing 1/grid_density.

    Covers are greedy (visit order shuffled by `seed`), hence upper bounds
    on covering numbers; the fitted rate under-resolves expansion on a
    finite grid and is flagged biased-low.  The value is the least-squares
    slope of log counts against p at the smallest epsilon; per-epsilon
    slopes are reported so the monotone trend is visible."""
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    eps_sorted = sorted(set(float(e) for e in eps_list), reverse=True)
    if not eps_sorted:
        raise ValueError("eps_list must be nonempty")
    pts = _disk_grid(1.0 / grid_density)
    N = len(pts)
    orbits = np.empty((p_max, N, 2))
    orbits[0] = pts
    for k in range(1, p_max):
        orbits[k] = f.apply(orbits[k - 1])
    order = np.random.default_rng(seed).permutation(N)
    table = []  # rows (p, eps, count)
    slopes = {}
    ps = np.arange(1, p_max + 1, dtype=float)
    for eps in eps_sorted:
        logs = []
        for p in range(1, p_max + 1):
            cnt = _greedy_cover_count(orbits, p, eps, order)
            table.append((p, eps, cnt))
            logs.append(math.log(cnt))
        slopes[eps] = float(np.polyfit(ps, logs, 1)[0]) if p_max > 1 else 0.0
    eps_min = eps_sorted[-1]
    return EntropyEstimate(
        max(slopes[eps_min], 0.0),
        "bowen",
        {
            "eps_used": eps_min,
            "per_eps_slopes": slopes,
            "grid_points": int(N),
            "p_max": p_max,
            "table": table,
        },
        error="biased low (greedy cover on a finite grid)",
    )


def curve_growth(
    f: DiskMap,
    c: PolyCurve | None = None,
    p_max: int = 10,
    tol: float = 0.01,
    max_vertices: int = 400_000,
) -> EntropyEstimate:
    """Exponential growth rate of the length of a closed material curve
    under repeated transport: least-squares slope of log length against p
    over the last half of the range.  If refinement hits the vertex budget
    the estimate comes from the completed prefix and is flagged."""
    if p_max < 4:
        raise ValueError("p_max must be >= 4")
    cur = circle_curve() if c is None else c
    lengths = []
    truncated = False
    for _ in range(p_max):
        try:
            cur = transport_curve(f, cur, tol, max_vertices)
        except ResolutionError:
            truncated = True
            break
        lengths.append(cur.length())
    if len(lengths) < 2:
        raise ResolutionError("curve transport failed before two lengths")
    value = max(slope_last_half([math.log(v) for v in lengths]), 0.0)
    return EntropyEstimate(
        value,
        "curve_growth",
        {
            "p_completed": len(lengths),
            "p_max": p_max,
            "lengths": lengths,
            "final_vertices": int(len(cur.vertices)),
            "tol": tol,
            "truncated": truncated,
        },
        error=LOWER_BOUND_TAG,
    )
