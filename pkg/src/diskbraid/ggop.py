"""Monte-Carlo estimation of the Gambaudo-Ghys operator.

For a quasimorphism psi on braid words, the raw operator is the integral

    G'(psi)(f) = integral over X_n of psi(gamma(f; x)) dx

estimated by uniform i.i.d. configurations x (rejection for near-collisions
and for extraction degeneracies, both counted), and the stabilized operator

    G(psi)(f) = lim_p G'(psi)(f^p) / p

estimated as the least-squares slope of the volume-scaled means against p.
The same configurations are reused at every power (common random numbers),
which removes most of the sample noise from the slope.

Reductions are fixed-order pairwise summation over the sample index, so a
run is bit-identical regardless of the `threads` setting.  All randomness
derives from per-sample `SeedSequence((seed, index, attempt))` streams:
identical (seed, config) gives identical estimates to the last bit.

Three-strand braids are evaluated through the PSL(2,Z) substitution
(`braid_psi`): the pipeline is the surface one, the group is a stand-in.
Every report carries that note.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import farey
from .braids import BraidWord, mat_pow, sl2_image
from .cocycle import TraceOptions, base_config, extract_braids_batch
from .dynamics import (
    AnnulusTwist,
    DiskMap,
    HamiltonianPush,
    RadialFlow,
    StripShear,
    moving_mask,
    power,
)
from .errors import BudgetError, SamplingError
from .quasimorphism import QmSpec, qm_value

_MAX_ATTEMPTS = 50
_CONFIG_TRIES = 1000
_PSL2_NOTE = (
    "n=3 braids evaluated through the PSL(2,Z) substitution "
    "(model stand-in; the formal pipeline is unchanged)"
)


@dataclass(frozen=True)
class MCConfig:
    n: int = 3
    samples: int = 256
    seed: int = 0
    min_sep: float = 0.02
    p_list: tuple = (1, 2, 3, 4)
    # Condition sampling on >= 1 point in the map's moving region and
    # reweight by the exactly-estimated probability of that event.  The
    # inactive configurations this skips contribute exactly zero (their
    # braid is trivial), so the estimate is unbiased; for maps supported
    # on a small fraction of the disk this removes almost all variance
    # per unit work.  Off by default: the plain estimator stays the
    # uniform-i.i.d. one.
    active_only: bool = False

    def __post_init__(self):
        if not isinstance(self.n, int) or not 2 <= self.n <= 5:
            raise ValueError("strand count n must be an integer in 2..5")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.min_sep > 0:
            raise ValueError("min_sep must be positive")
        p_list = tuple(int(p) for p in self.p_list)
        object.__setattr__(self, "p_list", p_list)
        if not p_list or p_list[0] < 1:
            raise ValueError("p_list must be nonempty positive integers")
        if any(b <= a for a, b in zip(p_list, p_list[1:])):
            raise ValueError("p_list must be strictly increasing")
        if not isinstance(self.active_only, bool):
            raise ValueError("active_only must be a bool")


@dataclass(frozen=True)
class GGEstimate:
    raw_mean: float  # per-unit-volume mean at the first power
    std_err: float
    volume_factor: float  # area(D^2)^n = pi^n
    stabilized: float  # volume-scaled slope against p
    ci: float
    per_p: tuple  # rows (p, mean, std_err), per-unit-volume
    samples: int
    rejected: int
    note: str = ""

    def __post_init__(self):
        if self.std_err < 0 or self.ci < 0:
            raise ValueError("error fields must be nonnegative")


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _draw_points(rng, count):
    """`count` points uniform in the disk (rejection from the square)."""
    pts = np.empty((count, 2))
    for k in range(count):
        while True:
            xy = rng.uniform(-1.0, 1.0, size=2)
            if xy[0] * xy[0] + xy[1] * xy[1] <= 0.996:
                pts[k] = xy
                break
    return pts


def _draw_config(rng, n, min_sep):
    """One admissible configuration; returns (points, configs discarded)."""
    for tries in range(_CONFIG_TRIES):
        pts = _draw_points(rng, n)
        d2 = pts[:, None, :] - pts[None, :, :]
        dist = np.hypot(d2[..., 0], d2[..., 1])
        np.fill_diagonal(dist, np.inf)
        if dist.min() >= min_sep:
            return pts, tries
    raise SamplingError(
        f"no admissible configuration after {_CONFIG_TRIES} draws "
        f"(min_sep={min_sep} too large for n={n})"
    )


def _sample_rng(seed, index, attempt):
    return np.random.default_rng(
        np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, index, attempt))
    )


_ACTIVE_TRIES = 100_000


def _draw_config_any_active(rng, n, min_sep, f):
    """One admissible configuration with >= 1 point in the moving region.

    Returns (points, min_sep discards).  Inactive draws are discarded
    silently — they are the event being conditioned away, not a failure
    — but a map that never produces one (it moves nothing, or close to
    it) is reported instead of looping forever."""
    discarded = 0
    for _ in range(_ACTIVE_TRIES):
        pts, d = _draw_config(rng, n, min_sep)
        discarded += d
        if moving_mask(f, pts).any():
            return pts, discarded
    raise SamplingError(
        f"no configuration with an active point in {_ACTIVE_TRIES} draws; "
        "active_only needs a map that moves a usable fraction of the disk"
    )


def active_weight(f: DiskMap, mc: MCConfig, draws: int = 1_000_000):
    """(P, rel_err): probability that a min_sep-admissible configuration
    has >= 1 point in f's moving region, under the sampling measure.

    Estimated by a seeded geometric Monte Carlo (no dynamics), so it is
    deterministic for a given mc.seed and cheap; rel_err is the relative
    standard error of P.  This is the reweighting factor for
    ``active_only`` runs."""
    rng = np.random.default_rng(
        np.random.SeedSequence((mc.seed & 0xFFFFFFFFFFFFFFFF, 0xAC7157))
    )
    # polar sampling of the same disk the rejection sampler accepts
    u = rng.uniform(0.0, 1.0, size=(draws, mc.n))
    th = rng.uniform(0.0, 2.0 * math.pi, size=(draws, mc.n))
    r = np.sqrt(u) * math.sqrt(0.996)
    pts = np.stack((r * np.cos(th), r * np.sin(th)), axis=-1)
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    idx = np.arange(mc.n)
    dist[:, idx, idx] = np.inf
    sep_ok = dist.min(axis=(1, 2)) >= mc.min_sep
    kept = int(sep_ok.sum())
    if kept == 0:
        raise SamplingError("min_sep rejects every configuration")
    flat = pts[sep_ok].reshape(-1, 2)
    active = moving_mask(f, flat).reshape(kept, mc.n).any(axis=1)
    hits = int(active.sum())
    if hits == 0:
        raise SamplingError(
            "the map's moving region has negligible probability; "
            "active_only cannot be reweighted"
        )
    p = hits / kept
    rel = math.sqrt((1.0 - p) / hits)
    return p, rel


def _chunk_bounds(count, parts):
    step = math.ceil(count / max(1, parts))
    return [(a, min(count, a + step)) for a in range(0, count, step)]


def _extract_batch(fp, xs, z, opts, threads):
    if threads <= 1 or len(xs) < 2 * threads:
        return extract_braids_batch(fp, xs, z, opts)
    out = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(extract_braids_batch, fp, xs[a:b], z, opts)
            for a, b in _chunk_bounds(len(xs), threads)
        ]
        for fut in futures:
            out.extend(fut.result())
    return out


def _mc_braids(f, mc, p_list, *, z, dt, axis_angle, max_refine, threads):
    """Braid words gamma(f^p; x_i) for shared samples x_i at every p.

    A sample that cannot be extracted at *all* powers is rejected and
    redrawn from its own fresh stream, so the common-random-numbers
    coupling across p is never broken.
    """
    n, N = mc.n, mc.samples
    z = base_config(n) if z is None else np.asarray(z, dtype=float)
    opts = TraceOptions(dt_init=dt, max_refine=max_refine, axis_angle=axis_angle)
    powers = [power(f, p) for p in p_list]
    rejected = 0
    attempt = [0] * N
    configs = np.empty((N, n, 2))
    for i in range(N):
        pts, discarded = _draw_config(_sample_rng(mc.seed, i, 0), n, mc.min_sep)
        rejected += discarded
        configs[i] = pts

    words = [[None] * N for _ in p_list]
    pending = list(range(N))
    while pending:
        failed = set()
        xs = configs[pending]
        for pi, fp in enumerate(powers):
            outs = _extract_batch(fp, xs, z, opts, threads)
            for row, out in zip(pending, outs):
                if isinstance(out, Exception):
                    failed.add(row)
                else:
                    words[pi][row] = out
        if not failed:
            break
        rejected += len(failed)
        pending = sorted(failed)
        for row in pending:
            attempt[row] += 1
            if attempt[row] >= _MAX_ATTEMPTS:
                raise BudgetError(
                    f"sample {row}: {_MAX_ATTEMPTS} extraction attempts failed"
                )
            pts, discarded = _draw_config(
                _sample_rng(mc.seed, row, attempt[row]), n, mc.min_sep
            )
            rejected += discarded
            configs[row] = pts

    if rejected > mc.samples:
        raise SamplingError(
            f"rejection rate above 50% ({rejected} rejected for "
            f"{mc.samples} kept); lower min_sep"
        )
    return words, rejected


# ---------------------------------------------------------------------------
# reduction (fixed-order, thread-count independent)
# ---------------------------------------------------------------------------


def _pairwise_sum(vec) -> float:
    a = np.asarray(vec, dtype=float).copy()
    while a.size > 1:
        m = a.size // 2
        s = a[: 2 * m : 2] + a[1 : 2 * m : 2]
        if a.size % 2:
            s = np.concatenate([s, a[-1:]])
        a = s
    return float(a[0]) if a.size else 0.0


def _mean_se(vals):
    vals = np.asarray(vals, dtype=float)
    N = vals.size
    mean = _pairwise_sum(vals) / N
    if N > 1:
        var = _pairwise_sum((vals - mean) ** 2) / (N - 1)
        se = math.sqrt(max(0.0, var) / N)
    else:
        se = 0.0
    return mean, se


def _psi_values(psi, words, threads):
    if threads > 1 and len(words) >= 2 * threads:
        out = [None] * len(words)

        def run(a, b):
            for i in range(a, b):
                out[i] = float(psi(words[i]))

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(
                pool.map(
                    lambda ab: run(*ab), _chunk_bounds(len(words), threads)
                )
            )
        return np.asarray(out, dtype=float)
    return np.asarray([float(psi(w)) for w in words], dtype=float)


# ---------------------------------------------------------------------------
# the operator
# ---------------------------------------------------------------------------


def gg_raw(
    psi,
    f: DiskMap,
    mc: MCConfig,
    *,
    z=None,
    dt: float = 1.0 / 256,
    axis_angle: float = 0.0,
    max_refine: int = 6,
    threads: int = 1,
):
    """(mean, std_err) of psi(gamma(f; x)) per unit volume.

    The integral estimate is volume_factor * mean with
    volume_factor = pi**n; both normalizations appear in reports."""
    words, _ = _mc_braids(
        f, mc, (1,), z=z, dt=dt, axis_angle=axis_angle,
        max_refine=max_refine, threads=threads,
    )
    return _mean_se(_psi_values(psi, words[0], threads))


def _stab_core(mat, p_list, vol):
    """(stabilized, ci, per_p rows) from a (len(p_list), N) value matrix.

    Because the same sample configurations feed every power (common
    random numbers), the honest uncertainty of the slope is the spread
    of *per-sample* slopes, not the propagated spread of the per-power
    means; the latter overstates the noise by ignoring the correlation.
    A residual term from the mean profile still guards against a
    non-linear trend."""
    rows = []
    for p, row in zip(p_list, mat):
        mean, se = _mean_se(row)
        rows.append((p, mean, se))
    if len(rows) == 1:
        p1, m1, se1 = rows[0]
        return vol * m1 / p1, vol * se1 / p1, rows
    p_arr = np.asarray(p_list, dtype=float)
    pbar = p_arr.mean()
    spp = float(((p_arr - pbar) ** 2).sum())
    coef = (p_arr - pbar) / spp
    slope, se_slope = _mean_se(coef @ mat)
    if len(rows) > 2:
        y_arr = np.asarray([r[1] for r in rows])
        resid = y_arr - (y_arr.mean() + slope * (p_arr - pbar))
        var_resid = float((resid * resid).sum() / (len(rows) - 2) / spp)
    else:
        var_resid = 0.0
    ci = vol * math.sqrt(se_slope * se_slope + var_resid)
    return vol * slope, ci, rows


def gg_stab_multi(
    psis,
    f: DiskMap,
    mc: MCConfig,
    *,
    z=None,
    dt: float = 1.0 / 256,
    axis_angle: float = 0.0,
    max_refine: int = 6,
    threads: int = 1,
):
    """Stabilized estimates for several quasimorphisms on one sample stream.

    Extraction dominates the cost, so evaluating a family of psi's on
    the same braid words is nearly free compared with separate gg_stab
    calls — and it guarantees the estimates are comparable (identical
    configurations, identical words)."""
    psis = list(psis)
    if not psis:
        raise ValueError("need at least one quasimorphism")
    words, rejected = _mc_braids(
        f, mc, mc.p_list, z=z, dt=dt, axis_angle=axis_angle,
        max_refine=max_refine, threads=threads,
    )
    vol = math.pi ** mc.n
    notes = ["common random numbers across p"]
    if mc.n == 3:
        notes.append(_PSL2_NOTE)
    note = "; ".join(notes)
    out = []
    for psi in psis:
        mat = np.stack([_psi_values(psi, ws, threads) for ws in words])
        stabilized, ci, rows = _stab_core(mat, mc.p_list, vol)
        out.append(
            GGEstimate(
                raw_mean=rows[0][1],
                std_err=rows[0][2],
                volume_factor=vol,
                stabilized=stabilized,
                ci=ci,
                per_p=tuple(rows),
                samples=mc.samples,
                rejected=rejected,
                note=note,
            )
        )
    return out


def gg_stab(
    psi,
    f: DiskMap,
    mc: MCConfig,
    *,
    z=None,
    dt: float = 1.0 / 256,
    axis_angle: float = 0.0,
    max_refine: int = 6,
    threads: int = 1,
) -> GGEstimate:
    """Stabilized operator: volume-scaled LS slope of G'(psi)(f^p) vs p."""
    return gg_stab_multi(
        (psi,), f, mc, z=z, dt=dt, axis_angle=axis_angle,
        max_refine=max_refine, threads=threads,
    )[0]


_AUTONOMOUS = (RadialFlow, StripShear, HamiltonianPush, AnnulusTwist)


def vanishing_check(psi, f: DiskMap, mc: MCConfig, **kwargs) -> bool:
    """True iff the stabilized value on an autonomous primitive is zero
    within 3 standard errors.  Accepts the identity and any single
    autonomous primitive (these have zero topological entropy)."""
    if f.n_stages > 1 or (
        f.n_stages == 1 and not isinstance(f.primitives[0], _AUTONOMOUS)
    ):
        raise ValueError(
            "vanishing_check expects the identity or a single autonomous "
            "primitive (RadialFlow/StripShear/HamiltonianPush/AnnulusTwist)"
        )
    est = gg_stab(psi, f, mc, **kwargs)
    return bool(abs(est.stabilized) <= 3.0 * est.ci)


def recurrence_fraction(
    f: DiskMap, mc: MCConfig, deltas=(0.05, 0.1, 0.2), p_cap: int = 64
):
    """Poincare-recurrence sanity rows (delta, returning fraction).

    The fraction of sampled points whose orbit re-enters the
    delta-neighborhood of its start within p_cap iterations; monotone in
    delta by construction and positive for any area-preserving map at
    reasonable delta."""
    if p_cap < 1:
        raise ValueError("p_cap must be >= 1")
    rng = np.random.default_rng(
        np.random.SeedSequence((mc.seed & 0xFFFFFFFFFFFFFFFF, 0x5EC0))
    )
    pts = _draw_points(rng, mc.samples)
    cur = pts.copy()
    min_dist = np.full(mc.samples, np.inf)
    for _ in range(p_cap):
        cur = f.apply(cur)
        gap = cur - pts
        min_dist = np.minimum(min_dist, np.hypot(gap[:, 0], gap[:, 1]))
    return tuple(
        (float(d), float(np.mean(min_dist <= d))) for d in sorted(deltas)
    )


# ---------------------------------------------------------------------------
# psi builders
# ---------------------------------------------------------------------------


def braid_psi(qm: QmSpec, R: int = 2, P_max: int = 8, d_budget: int = 120):
    """Homogenized quasimorphism evaluator on 3-strand words via PSL(2,Z).

    Returns a callable word -> psi_bar(sl2_image(word)) computed as
    qm(M^P)/P with P adapted so the Farey distance of the powered orbit
    stays near d_budget (homogenization error ~ D/P).  Elliptic and
    parabolic images homogenize to zero exactly (bounded orbits) and
    short-circuit; hyperbolic values are memoized on the canonical
    matrix, so a Monte-Carlo stream that revisits conjugacy classes pays
    once per class."""
    if P_max < 2:
        raise ValueError("P_max must be >= 2")
    cache: dict = {}

    def psi(word: BraidWord) -> float:
        if word.n != 3:
            raise ValueError("braid_psi evaluates 3-strand words")
        m = sl2_image(word)
        hit = cache.get(m)
        if hit is not None:
            return hit
        if abs(m[0][0] + m[1][1]) <= 2:
            val = 0.0
        else:
            tau_hat = max(1, farey.distance(qm.base, farey.act(m, qm.base)))
            # classes already longer than the budget are evaluated at the
            # first power: their homogenization error D/(P*tau) is small
            # relative to the value, and doubling the orbit would double
            # the corridor cost for nothing
            p_ad = max(1, min(P_max, d_budget // tau_hat))
            val = qm_value(qm, mat_pow(m, p_ad), R=R) / p_ad
        cache[m] = val
        return val

    psi.qm = qm
    psi.R = R
    psi.P_max = P_max
    psi.d_budget = d_budget
    psi.cache = cache
    psi.note = _PSL2_NOTE
    return psi
